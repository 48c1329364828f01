#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "esback/rng.hpp"

namespace esback {

enum class Family { Normal, StudentT, SkewedT };

// Parametric loss distribution standardized to mean 0 and variance 1.
// StudentT carries nu > 2 degrees of freedom; SkewedT additionally carries a
// skewness parameter gamma > 0 (gamma = 1 recovers the symmetric case).
class LossModel {
 public:
  static LossModel normal();
  static LossModel student_t(double nu);
  static LossModel skewed_t(double nu, double gamma);

  Family family() const { return family_; }
  double nu() const { return nu_; }
  double gamma() const { return gamma_; }

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;

  // Expected shortfall E[L | L > VaR_alpha]; closed form for the normal and
  // Student t families, adaptive quadrature of the quantile function for the
  // skewed t.
  double es(double alpha) const;

  // One draw by inverse transform of a uniform from the stream.
  double sample(RngStream& rng) const { return quantile(rng.uniform()); }
  Eigen::VectorXd sample(RngStream& rng, long n) const;

 private:
  LossModel(Family f, double nu, double gamma);

  Family family_;
  double nu_ = 0.0;
  double gamma_ = 1.0;
  // Affine standardization of the underlying construction: X = (Y - loc) / scale.
  double loc_ = 0.0;
  double scale_ = 1.0;

  double raw_pdf(double y) const;
  double raw_cdf(double y) const;
  double raw_quantile(double u) const;
  double es_scale_hint(double alpha) const;
};

double model_quantile(const LossModel& model, double u);
double model_es(const LossModel& model, double alpha);

// Four-quantile approximation of expected shortfall:
// (1/4)[q(a) + q(0.75a+0.25) + q(0.5a+0.5) + q(0.25a+0.75)].
double approx_es(const LossModel& model, double alpha);

Eigen::VectorXd model_sample(const LossModel& model, RngStream& rng, long n);

}  // namespace esback
