#include "doctest.h"

#include <cmath>

#include "esback/distributions.hpp"
#include "esback/errors.hpp"
#include "esback/forecast.hpp"
#include "esback/levels.hpp"
#include "esback/rng.hpp"

using namespace esback;

TEST_CASE("forecast method names round trip") {
  for (ForecastMethod m : {ForecastMethod::Oracle, ForecastMethod::Good, ForecastMethod::Poor,
                           ForecastMethod::Industry, ForecastMethod::GarchT,
                           ForecastMethod::GarchHS, ForecastMethod::GarchNorm,
                           ForecastMethod::ArchT, ForecastMethod::ArchNorm, ForecastMethod::HS}) {
    auto parsed = parse_forecast_method(to_string(m));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == m);
  }
  CHECK(!parse_forecast_method("garch.evt").has_value());
}

TEST_CASE("empirical quantile order-statistic rule") {
  Eigen::VectorXd window(500);
  for (int i = 0; i < 500; ++i) window[i] = 500 - i;  // unsorted on purpose
  // ceil(500 * 0.99) = 495 -> the 495th order statistic of 1..500.
  CHECK(empirical_quantile(window, 0.99) == doctest::Approx(495.0));
  CHECK(empirical_quantile(window, 0.002) == doctest::Approx(1.0));
  CHECK(empirical_quantile(window, 0.9999) == doctest::Approx(500.0));
  CHECK_THROWS_AS(empirical_quantile(Eigen::VectorXd(), 0.5), DomainError);
  CHECK_THROWS_AS(empirical_quantile(window, 0.0), DomainError);
  CHECK_THROWS_AS(empirical_quantile(window, 1.0), DomainError);
}

TEST_CASE("oracle forecasts are the true quantiles") {
  LevelGrid grid = level_grid(0.975, 4);
  LossModel truth = LossModel::normal();
  Eigen::VectorXd window = Eigen::VectorXd::Zero(10);  // ignored by the oracle
  Eigen::RowVectorXd row = forecast_quantiles(ForecastMethod::Oracle, window, grid, truth);
  CHECK(row[0] == doctest::Approx(1.959964).epsilon(1e-6));
  for (int j = 0; j < 4; ++j) {
    CHECK(row[j] == doctest::Approx(truth.quantile(grid.levels[static_cast<std::size_t>(j)]))
                        .epsilon(1e-12));
  }
}

TEST_CASE("normal fit is moment matching") {
  RngStream rng(19, 0);
  Eigen::VectorXd window = model_sample(LossModel::normal(), rng, 500);
  StaticFit fit = fit_static_model(Family::Normal, window);
  double mean = window.mean();
  double sd = std::sqrt((window.array() - mean).square().sum() / 500.0);
  CHECK(fit.mu == doctest::Approx(mean).epsilon(1e-12));
  CHECK(fit.sigma == doctest::Approx(sd).epsilon(1e-12));

  Eigen::VectorXd constant = Eigen::VectorXd::Constant(100, 1.0);
  CHECK_THROWS_AS(fit_static_model(Family::Normal, constant), DegenerateError);
}

TEST_CASE("t fit recovers shape on a large sample") {
  RngStream rng(19, 1);
  Eigen::VectorXd window = model_sample(LossModel::student_t(5.0), rng, 20000);
  StaticFit fit = fit_static_model(Family::StudentT, window);
  CHECK(std::fabs(fit.mu) < 0.05);
  CHECK(fit.sigma == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fit.nu == doctest::Approx(5.0).epsilon(0.25));
}

TEST_CASE("skewed t fit recovers skewness direction") {
  RngStream rng(19, 2);
  Eigen::VectorXd window = model_sample(LossModel::skewed_t(3.0, 1.2), rng, 20000);
  StaticFit fit = fit_static_model(Family::SkewedT, window);
  CHECK(fit.gamma > 1.05);
  CHECK(fit.gamma < 1.4);
  CHECK(fit.nu > 2.4);
  CHECK(fit.nu < 4.0);
}

TEST_CASE("forecast rows are monotone across levels") {
  LevelGrid grid = level_grid(0.975, 8);
  RngStream rng(19, 3);
  Eigen::VectorXd window = model_sample(LossModel::student_t(3.0), rng, 500);
  LossModel truth = LossModel::student_t(3.0);
  for (ForecastMethod m : {ForecastMethod::Oracle, ForecastMethod::Good, ForecastMethod::Poor,
                           ForecastMethod::Industry}) {
    Eigen::RowVectorXd row = forecast_quantiles(m, window, grid, truth);
    for (int j = 1; j < 8; ++j) CHECK(row[j] >= row[j - 1]);
  }
}

TEST_CASE("industry forecaster equals window empirical quantiles") {
  LevelGrid grid = level_grid(0.975, 4);
  RngStream rng(19, 4);
  Eigen::VectorXd window = model_sample(LossModel::normal(), rng, 250);
  Eigen::RowVectorXd row =
      forecast_quantiles(ForecastMethod::Industry, window, grid, LossModel::normal());
  for (int j = 0; j < 4; ++j) {
    CHECK(row[j] ==
          doctest::Approx(empirical_quantile(window, grid.levels[static_cast<std::size_t>(j)]))
              .epsilon(1e-12));
  }
  // The conditional forecasters need the dynamic driver.
  CHECK_THROWS_AS(forecast_quantiles(ForecastMethod::GarchT, window, grid, LossModel::normal()),
                  DomainError);
}
