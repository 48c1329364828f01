#include "esback/distributions.hpp"

#include <cmath>
#include <functional>

#include "esback/errors.hpp"
#include "esback/special.hpp"

namespace esback {

namespace {

// Mean of |T| for Student t with nu > 1 degrees of freedom.
double abs_t_mean(double nu) {
  return 2.0 * std::sqrt(nu) * std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
         (std::sqrt(M_PI) * (nu - 1.0));
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

LossModel::LossModel(Family f, double nu, double gamma)
    : family_(f), nu_(nu), gamma_(gamma) {
  switch (family_) {
    case Family::Normal:
      break;
    case Family::StudentT: {
      if (!(nu_ > 2.0)) throw DomainError("LossModel: StudentT requires nu > 2");
      loc_ = 0.0;
      scale_ = std::sqrt(nu_ / (nu_ - 2.0));
      break;
    }
    case Family::SkewedT: {
      if (!(nu_ > 2.0)) throw DomainError("LossModel: SkewedT requires nu > 2");
      if (!(gamma_ > 0.0)) throw DomainError("LossModel: SkewedT requires gamma > 0");
      double m1 = abs_t_mean(nu_) * (gamma_ - 1.0 / gamma_);
      double g3 = gamma_ * gamma_ * gamma_;
      double m2 = (g3 + 1.0 / g3) / (gamma_ + 1.0 / gamma_) * nu_ / (nu_ - 2.0);
      loc_ = m1;
      scale_ = std::sqrt(m2 - m1 * m1);
      break;
    }
  }
}

LossModel LossModel::normal() { return LossModel(Family::Normal, 0.0, 1.0); }
LossModel LossModel::student_t(double nu) { return LossModel(Family::StudentT, nu, 1.0); }
LossModel LossModel::skewed_t(double nu, double gamma) {
  return LossModel(Family::SkewedT, nu, gamma);
}

double LossModel::raw_pdf(double y) const {
  switch (family_) {
    case Family::Normal:
      return std_normal_pdf(y);
    case Family::StudentT:
      return student_t_pdf(y, nu_);
    case Family::SkewedT: {
      double c = 2.0 / (gamma_ + 1.0 / gamma_);
      return y >= 0.0 ? c * student_t_pdf(y / gamma_, nu_)
                      : c * student_t_pdf(gamma_ * y, nu_);
    }
  }
  return 0.0;
}

double LossModel::raw_cdf(double y) const {
  switch (family_) {
    case Family::Normal:
      return std_normal_cdf(y);
    case Family::StudentT:
      return student_t_cdf(y, nu_);
    case Family::SkewedT: {
      double c = 2.0 / (gamma_ + 1.0 / gamma_);
      if (y < 0.0) return (c / gamma_) * student_t_cdf(gamma_ * y, nu_);
      return 0.5 * c / gamma_ + c * gamma_ * (student_t_cdf(y / gamma_, nu_) - 0.5);
    }
  }
  return 0.0;
}

double LossModel::raw_quantile(double u) const {
  switch (family_) {
    case Family::Normal:
      return std_normal_quantile(u);
    case Family::StudentT:
      return student_t_quantile(u, nu_);
    case Family::SkewedT: {
      double c = 2.0 / (gamma_ + 1.0 / gamma_);
      double p0 = 0.5 * c / gamma_;  // mass below zero, 1/(1+gamma^2)
      if (u < p0) return student_t_quantile(u * gamma_ / c, nu_) / gamma_;
      return gamma_ * student_t_quantile(0.5 + (u - p0) / (c * gamma_), nu_);
    }
  }
  return 0.0;
}

double LossModel::pdf(double x) const {
  if (family_ == Family::Normal) return std_normal_pdf(x);
  return scale_ * raw_pdf(loc_ + scale_ * x);
}

double LossModel::cdf(double x) const {
  if (family_ == Family::Normal) return std_normal_cdf(x);
  return raw_cdf(loc_ + scale_ * x);
}

double LossModel::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("LossModel::quantile: u must lie in (0,1)");
  if (family_ == Family::Normal) return std_normal_quantile(u);
  return (raw_quantile(u) - loc_) / scale_;
}

double LossModel::es(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("LossModel::es: alpha must lie in (0,1)");
  if (nu_ != 0.0 && nu_ <= 1.0) throw NonfiniteError("LossModel::es: undefined for nu <= 1");
  switch (family_) {
    case Family::Normal:
      return std_normal_pdf(std_normal_quantile(alpha)) / (1.0 - alpha);
    case Family::StudentT: {
      double q = student_t_quantile(alpha, nu_);
      double raw = student_t_pdf(q, nu_) * (nu_ + q * q) / ((nu_ - 1.0) * (1.0 - alpha));
      return raw / scale_;
    }
    case Family::SkewedT: {
      // (1/(1-alpha)) Int_alpha^1 q(u) du with the substitution
      // u = 1 - (1-alpha) w^4, which removes the tail singularity.
      auto f = [this, alpha](double w) {
        if (w <= 0.0) return 0.0;
        double u = 1.0 - (1.0 - alpha) * w * w * w * w;
        if (u >= 1.0) u = std::nextafter(1.0, 0.0);
        return quantile(u) * 4.0 * w * w * w;
      };
      return integrate(f, 0.0, 1.0, 1e-8 * es_scale_hint(alpha));
    }
  }
  return 0.0;
}

// Rough magnitude of the answer, used to turn the relative tolerance into an
// absolute one for the quadrature.
double LossModel::es_scale_hint(double alpha) const { return std::fabs(quantile(alpha)) + 1.0; }

Eigen::VectorXd LossModel::sample(RngStream& rng, long n) const {
  Eigen::VectorXd out(n);
  for (long i = 0; i < n; ++i) out[i] = quantile(rng.uniform());
  return out;
}

double model_quantile(const LossModel& model, double u) { return model.quantile(u); }
double model_es(const LossModel& model, double alpha) { return model.es(alpha); }

double approx_es(const LossModel& model, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("approx_es: alpha must lie in (0,1)");
  return 0.25 * (model.quantile(alpha) + model.quantile(0.75 * alpha + 0.25) +
                 model.quantile(0.5 * alpha + 0.5) + model.quantile(0.25 * alpha + 0.75));
}

Eigen::VectorXd model_sample(const LossModel& model, RngStream& rng, long n) {
  return model.sample(rng, n);
}

}  // namespace esback
