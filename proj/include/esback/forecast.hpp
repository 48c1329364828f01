#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "esback/distributions.hpp"
#include "esback/levels.hpp"

namespace esback {

// Forecasting methods of the backtesting experiments. The first four belong
// to the static study; the rest are conditional (time-series) forecasters.
enum class ForecastMethod {
  Oracle,
  Good,
  Poor,
  Industry,
  GarchT,
  GarchHS,
  GarchNorm,
  ArchT,
  ArchNorm,
  HS,
};

std::string to_string(ForecastMethod method);
std::optional<ForecastMethod> parse_forecast_method(const std::string& name);

// u-quantile of a window of m points as the ceil(m*u)-th order statistic.
double empirical_quantile(const Eigen::VectorXd& window, double u);

// Location-scale fit of a parametric family to a window: Normal by moment
// matching, t and skewed t by ML over the shape parameters after centering.
struct StaticFit {
  Family family = Family::Normal;
  double mu = 0.0;
  double sigma = 1.0;
  double nu = 0.0;
  double gamma = 1.0;

  double quantile(double u) const;
  Eigen::RowVectorXd quantile_row(const LevelGrid& grid) const;
};

StaticFit fit_static_model(Family family, const Eigen::VectorXd& window,
                           const StaticFit* warm_start = nullptr);

// VaR forecast row for the static-study methods. `truth` is consulted by the
// oracle only; Good fits truth's family, Poor always fits a normal.
Eigen::RowVectorXd forecast_quantiles(ForecastMethod method, const Eigen::VectorXd& window,
                                      const LevelGrid& grid, const LossModel& truth);

}  // namespace esback
