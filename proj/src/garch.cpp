#include "esback/garch.hpp"

#include <cmath>

#include "esback/errors.hpp"
#include "esback/nelder_mead.hpp"
#include "esback/special.hpp"

namespace esback {

namespace {

constexpr double kLnSqrt2Pi = 0.9189385332046727;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// Unit-variance innovation quantile.
double innovation_quantile(double u, Innovation innovation, double nu) {
  if (innovation == Innovation::Normal) return std_normal_quantile(u);
  return student_t_quantile(u, nu) * std::sqrt((nu - 2.0) / nu);
}

double sample_variance(const Eigen::VectorXd& series) {
  double mean = series.mean();
  return (series.array() - mean).square().sum() / static_cast<double>(series.size());
}

// Negative conditional log-likelihood of the recursion with sigma^2_1 set to
// the sample variance of the series.
double negative_loglik(const Eigen::VectorXd& series, const GarchParams& p, VolSpec spec) {
  const long n = series.size();
  double var0 = sample_variance(series);
  double sigma2 = var0;
  double nll = 0.0;
  if (p.innovation == Innovation::Normal) {
    for (long t = 0; t < n; ++t) {
      if (t > 0) {
        double prev = series[t - 1] * series[t - 1];
        sigma2 = p.alpha0 + p.alpha1 * prev + (spec == VolSpec::Garch11 ? p.beta1 * sigma2 : 0.0);
      }
      double z = series[t] * series[t] / sigma2;
      nll += 0.5 * std::log(sigma2) + 0.5 * z + kLnSqrt2Pi;
    }
  } else {
    double k = std::sqrt((p.nu - 2.0) / p.nu);
    double ln_c = std::lgamma(0.5 * (p.nu + 1.0)) - std::lgamma(0.5 * p.nu) -
                  0.5 * std::log(p.nu * M_PI) - std::log(k);
    for (long t = 0; t < n; ++t) {
      if (t > 0) {
        double prev = series[t - 1] * series[t - 1];
        sigma2 = p.alpha0 + p.alpha1 * prev + (spec == VolSpec::Garch11 ? p.beta1 * sigma2 : 0.0);
      }
      double x = series[t] / (std::sqrt(sigma2) * k);
      nll += 0.5 * std::log(sigma2) - ln_c + 0.5 * (p.nu + 1.0) * std::log1p(x * x / p.nu);
    }
  }
  return nll;
}

}  // namespace

void GarchParams::validate() const {
  if (alpha0 <= 0.0) throw DomainError("GarchParams: alpha0 must be positive");
  if (alpha1 < 0.0 || beta1 < 0.0) throw DomainError("GarchParams: negative ARCH/GARCH weight");
  if (alpha1 + beta1 >= 1.0) throw DomainError("GarchParams: alpha1 + beta1 must be < 1");
  if (innovation == Innovation::StudentT && nu <= 2.0) {
    throw DomainError("GarchParams: Student t innovations require nu > 2");
  }
}

GarchPath garch_simulate(const GarchParams& params, long n, long burn_in, RngStream& rng) {
  params.validate();
  if (n < 1) throw DomainError("garch_simulate: n must be >= 1");
  GarchPath path;
  path.losses.resize(n);
  path.sigma.resize(n);
  double sigma2 = params.stationary_variance();
  double prev_loss = 0.0;
  bool first = true;
  for (long t = -burn_in; t < n; ++t) {
    if (!first) {
      sigma2 = params.alpha0 + params.alpha1 * prev_loss * prev_loss + params.beta1 * sigma2;
    }
    first = false;
    double z = innovation_quantile(rng.uniform(), params.innovation, params.nu);
    double loss = std::sqrt(sigma2) * z;
    if (t >= 0) {
      path.sigma[t] = std::sqrt(sigma2);
      path.losses[t] = loss;
    }
    prev_loss = loss;
  }
  return path;
}

GarchFilter garch_filter(const Eigen::VectorXd& series, const GarchParams& params) {
  params.validate();
  if (series.size() < 1) throw DomainError("garch_filter: empty series");
  GarchFilter out;
  out.sigma.resize(series.size());
  double sigma2 = sample_variance(series);
  if (sigma2 <= 0.0) throw DegenerateError("garch_filter: constant series");
  for (long t = 0; t < series.size(); ++t) {
    if (t > 0) {
      sigma2 = params.alpha0 + params.alpha1 * series[t - 1] * series[t - 1] +
               params.beta1 * sigma2;
    }
    out.sigma[t] = std::sqrt(sigma2);
  }
  sigma2 = params.alpha0 + params.alpha1 * series[series.size() - 1] * series[series.size() - 1] +
           params.beta1 * sigma2;
  out.sigma_next = std::sqrt(sigma2);
  return out;
}

GarchFit garch_fit(const Eigen::VectorXd& series, Innovation innovation, VolSpec spec,
                   const GarchFit* warm_start) {
  if (series.size() < 250) throw DomainError("garch_fit: need at least 250 observations");
  double var0 = sample_variance(series);
  if (var0 <= 0.0) throw DegenerateError("garch_fit: constant series");

  const bool is_garch = spec == VolSpec::Garch11;
  const bool is_t = innovation == Innovation::StudentT;
  // Coordinates: log alpha0, logit persistence, [logit ARCH share], [log(nu-2)].
  auto decode = [&](const std::vector<double>& x) {
    GarchParams p;
    p.innovation = innovation;
    p.alpha0 = std::exp(std::clamp(x[0], -690.0, 690.0));
    double persistence = logistic(x[1]) * 0.999999;
    if (is_garch) {
      double share = logistic(x[2]);
      p.alpha1 = persistence * share;
      p.beta1 = persistence * (1.0 - share);
    } else {
      p.alpha1 = persistence;
      p.beta1 = 0.0;
    }
    p.nu = is_t ? 2.0 + std::exp(x[is_garch ? 3 : 2]) : 0.0;
    return p;
  };

  auto objective = [&](const std::vector<double>& x) {
    GarchParams p = decode(x);
    if (p.nu > 200.0) return 1e100;  // keep nu away from the normal limit
    return negative_loglik(series, p, spec);
  };

  std::vector<double> start;
  if (warm_start != nullptr && warm_start->converged) {
    const GarchParams& w = warm_start->params;
    double pers = std::clamp(w.alpha1 + w.beta1, 1e-6, 0.999);
    start = {std::log(std::max(w.alpha0, 1e-300)), logit(pers)};
    if (is_garch) start.push_back(logit(std::clamp(w.alpha1 / std::max(pers, 1e-12), 1e-4, 1.0 - 1e-4)));
    if (is_t) start.push_back(std::log(std::max(w.nu - 2.0, 1e-3)));
  } else {
    double pers = is_garch ? 0.9 : 0.3;
    start = {std::log(var0 * (1.0 - pers)), logit(pers)};
    if (is_garch) start.push_back(logit(0.1));
    if (is_t) start.push_back(std::log(6.0));
  }

  auto run = nelder_mead(objective, start, 0.5, 1e-9, 1e-7, 800);
  auto rerun = nelder_mead(objective, run.x, 0.05, 1e-9, 1e-7, 800);
  if (rerun.fmin < run.fmin) run = rerun;

  GarchFit fit;
  fit.params = decode(run.x);
  fit.loglik = -run.fmin;
  fit.converged = run.converged || rerun.converged ||
                  run.f_spread <= 1e-7 * (1.0 + std::fabs(run.fmin));
  fit.boundary = fit.params.persistence() > 0.999;
  if (!fit.converged) {
    throw ConvergenceError("garch_fit: simplex failed to converge");
  }
  return fit;
}

}  // namespace esback
