#pragma once

#include <Eigen/Dense>

#include "esback/rng.hpp"

namespace esback {

enum class Innovation { Normal, StudentT };
enum class VolSpec { Garch11, Arch1 };

// GARCH(1,1) parameters for losses L_t = sigma_t Z_t with unit-variance
// innovations: sigma^2_t = alpha0 + alpha1 L^2_{t-1} + beta1 sigma^2_{t-1}.
struct GarchParams {
  double alpha0 = 2.18e-6;
  double alpha1 = 0.109;
  double beta1 = 0.890;
  double nu = 5.06;  // Student t innovation dof; ignored for normal innovations
  Innovation innovation = Innovation::StudentT;

  double persistence() const { return alpha1 + beta1; }
  double stationary_variance() const { return alpha0 / (1.0 - alpha1 - beta1); }
  void validate() const;
};

struct GarchPath {
  Eigen::VectorXd losses;
  Eigen::VectorXd sigma;  // conditional volatility aligned with losses
};

// Simulate from the recursion started at the stationary variance; the first
// burn_in steps are discarded.
GarchPath garch_simulate(const GarchParams& params, long n, long burn_in, RngStream& rng);

// Conditional volatility path implied by a series under fixed parameters.
// sigma[t] is the volatility of losses[t]; sigma_next is the one-step-ahead
// forecast after the last observation.
struct GarchFilter {
  Eigen::VectorXd sigma;
  double sigma_next = 0.0;
};

GarchFilter garch_filter(const Eigen::VectorXd& series, const GarchParams& params);

struct GarchFit {
  GarchParams params;
  double loglik = 0.0;
  bool converged = false;
  bool boundary = false;  // persistence pinned near 1
};

// Quasi-maximum-likelihood fit of a GARCH(1,1) or ARCH(1) model with zero
// conditional mean. For Student t innovations nu is estimated jointly.
// A previous fit may be passed as a warm start.
GarchFit garch_fit(const Eigen::VectorXd& series, Innovation innovation, VolSpec spec,
                   const GarchFit* warm_start = nullptr);

}  // namespace esback
