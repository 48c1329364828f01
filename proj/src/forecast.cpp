#include "esback/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "esback/errors.hpp"
#include "esback/nelder_mead.hpp"
#include "esback/special.hpp"

namespace esback {

namespace {

constexpr double kLnSqrt2Pi = 0.9189385332046727;

// Negative log-likelihood of a centered location-scale standardized-t sample.
double neg_loglik_t(const Eigen::VectorXd& x, double mu, double sigma, double nu) {
  double k = std::sqrt((nu - 2.0) / nu);
  double ln_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                0.5 * std::log(nu * M_PI) - std::log(k) - std::log(sigma);
  double nll = 0.0;
  for (long i = 0; i < x.size(); ++i) {
    double z = (x[i] - mu) / (sigma * k);
    nll += -ln_c + 0.5 * (nu + 1.0) * std::log1p(z * z / nu);
  }
  return nll;
}

double abs_t_mean(double nu) {
  return 2.0 * std::sqrt(nu) * std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
         (std::sqrt(M_PI) * (nu - 1.0));
}

// Negative log-likelihood for the standardized skewed-t location-scale model.
double neg_loglik_skt(const Eigen::VectorXd& x, double mu, double sigma, double nu, double gamma) {
  double m1 = abs_t_mean(nu) * (gamma - 1.0 / gamma);
  double g3 = gamma * gamma * gamma;
  double m2 = (g3 + 1.0 / g3) / (gamma + 1.0 / gamma) * nu / (nu - 2.0);
  double sd = std::sqrt(m2 - m1 * m1);
  double c = 2.0 / (gamma + 1.0 / gamma);
  double ln_t_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                  0.5 * std::log(nu * M_PI);
  double ln_front = std::log(c) + std::log(sd) - std::log(sigma) + ln_t_c;
  double nll = 0.0;
  for (long i = 0; i < x.size(); ++i) {
    double y = m1 + sd * (x[i] - mu) / sigma;  // raw Fernandez-Steel coordinate
    double v = y >= 0.0 ? y / gamma : gamma * y;
    nll += -ln_front + 0.5 * (nu + 1.0) * std::log1p(v * v / nu);
  }
  return nll;
}

}  // namespace

std::string to_string(ForecastMethod method) {
  switch (method) {
    case ForecastMethod::Oracle: return "oracle";
    case ForecastMethod::Good: return "good";
    case ForecastMethod::Poor: return "poor";
    case ForecastMethod::Industry: return "industry";
    case ForecastMethod::GarchT: return "garch.t";
    case ForecastMethod::GarchHS: return "garch.hs";
    case ForecastMethod::GarchNorm: return "garch.norm";
    case ForecastMethod::ArchT: return "arch.t";
    case ForecastMethod::ArchNorm: return "arch.norm";
    case ForecastMethod::HS: return "hs";
  }
  return "unknown";
}

std::optional<ForecastMethod> parse_forecast_method(const std::string& name) {
  static const std::pair<const char*, ForecastMethod> table[] = {
      {"oracle", ForecastMethod::Oracle},     {"good", ForecastMethod::Good},
      {"poor", ForecastMethod::Poor},         {"industry", ForecastMethod::Industry},
      {"garch.t", ForecastMethod::GarchT},    {"garch.hs", ForecastMethod::GarchHS},
      {"garch.norm", ForecastMethod::GarchNorm}, {"arch.t", ForecastMethod::ArchT},
      {"arch.norm", ForecastMethod::ArchNorm}, {"hs", ForecastMethod::HS},
  };
  for (const auto& [key, value] : table) {
    if (name == key) return value;
  }
  return std::nullopt;
}

double empirical_quantile(const Eigen::VectorXd& window, double u) {
  const long m = window.size();
  if (m < 1) throw DomainError("empirical_quantile: empty window");
  if (!(u > 0.0 && u < 1.0)) throw DomainError("empirical_quantile: u must lie in (0,1)");
  std::vector<double> sorted(window.data(), window.data() + m);
  std::sort(sorted.begin(), sorted.end());
  long k = static_cast<long>(std::ceil(u * static_cast<double>(m)));
  k = std::clamp(k, 1L, m);
  return sorted[static_cast<std::size_t>(k - 1)];
}

double StaticFit::quantile(double u) const {
  switch (family) {
    case Family::Normal:
      return mu + sigma * std_normal_quantile(u);
    case Family::StudentT:
      return mu + sigma * LossModel::student_t(nu).quantile(u);
    case Family::SkewedT:
      return mu + sigma * LossModel::skewed_t(nu, gamma).quantile(u);
  }
  return 0.0;
}

Eigen::RowVectorXd StaticFit::quantile_row(const LevelGrid& grid) const {
  Eigen::RowVectorXd row(grid.n_levels);
  for (int j = 0; j < grid.n_levels; ++j) {
    row[j] = quantile(grid.levels[static_cast<std::size_t>(j)]);
  }
  return row;
}

StaticFit fit_static_model(Family family, const Eigen::VectorXd& window,
                           const StaticFit* warm_start) {
  const long m = window.size();
  if (m < 2) throw DomainError("fit_static_model: window too short");
  double mean = window.mean();
  double var = (window.array() - mean).square().sum() / static_cast<double>(m);
  if (var <= 0.0) throw DegenerateError("fit_static_model: constant window");

  StaticFit fit;
  fit.family = family;
  fit.mu = mean;
  if (family == Family::Normal) {
    fit.sigma = std::sqrt(var);
    return fit;
  }

  const bool skewed = family == Family::SkewedT;
  auto objective = [&](const std::vector<double>& x) {
    double sigma = std::exp(x[0]);
    double nu = 2.0 + std::exp(x[1]);
    if (nu > 200.0) return 1e100;
    if (skewed) {
      double gamma = std::exp(x[2]);
      if (gamma < 0.05 || gamma > 20.0) return 1e100;
      return neg_loglik_skt(window, mean, sigma, nu, gamma);
    }
    return neg_loglik_t(window, mean, sigma, nu);
  };

  std::vector<double> start;
  if (warm_start != nullptr && warm_start->family == family && warm_start->nu > 2.0) {
    start = {std::log(warm_start->sigma), std::log(warm_start->nu - 2.0)};
    if (skewed) start.push_back(std::log(std::max(warm_start->gamma, 0.05)));
  } else {
    start = {0.5 * std::log(var), std::log(6.0)};
    if (skewed) start.push_back(0.0);
  }

  auto run = nelder_mead(objective, start, 0.3, 1e-9, 1e-7, 600);
  auto rerun = nelder_mead(objective, run.x, 0.03, 1e-9, 1e-7, 600);
  if (rerun.fmin < run.fmin) run = rerun;
  bool flat = run.f_spread <= 1e-7 * (1.0 + std::fabs(run.fmin));
  if (!run.converged && !rerun.converged && !flat) {
    throw ConvergenceError("fit_static_model: simplex failed to converge");
  }

  fit.sigma = std::exp(run.x[0]);
  fit.nu = 2.0 + std::exp(run.x[1]);
  fit.gamma = skewed ? std::exp(run.x[2]) : 1.0;
  return fit;
}

Eigen::RowVectorXd forecast_quantiles(ForecastMethod method, const Eigen::VectorXd& window,
                                      const LevelGrid& grid, const LossModel& truth) {
  Eigen::RowVectorXd row(grid.n_levels);
  switch (method) {
    case ForecastMethod::Oracle: {
      for (int j = 0; j < grid.n_levels; ++j) {
        row[j] = truth.quantile(grid.levels[static_cast<std::size_t>(j)]);
      }
      return row;
    }
    case ForecastMethod::Good: {
      StaticFit fit = fit_static_model(truth.family(), window);
      return fit.quantile_row(grid);
    }
    case ForecastMethod::Poor: {
      StaticFit fit = fit_static_model(Family::Normal, window);
      return fit.quantile_row(grid);
    }
    case ForecastMethod::Industry:
    case ForecastMethod::HS: {
      if (window.size() < grid.n_levels + 1) {
        throw DomainError("forecast_quantiles: window too short for empirical quantiles");
      }
      for (int j = 0; j < grid.n_levels; ++j) {
        row[j] = empirical_quantile(window, grid.levels[static_cast<std::size_t>(j)]);
      }
      return row;
    }
    default:
      throw DomainError("forecast_quantiles: " + to_string(method) +
                        " requires the dynamic backtest driver");
  }
}

}  // namespace esback
