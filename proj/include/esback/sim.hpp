#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esback/distributions.hpp"
#include "esback/forecast.hpp"
#include "esback/garch.hpp"
#include "esback/mtest.hpp"

namespace esback {

// ---------------------------------------------------------------------------
// Experiment configurations
// ---------------------------------------------------------------------------

// Size/power study: draw iid samples from G, count cells against the fixed
// quantiles of the reference model F, run each requested test at level kappa.
struct SizePowerConfig {
  LossModel true_model = LossModel::normal();
  std::string true_label = "normal";
  LossModel reference_model = LossModel::normal();
  std::string reference_label = "normal";
  double alpha = 0.975;
  std::vector<int> level_counts{1, 2, 4, 8};
  std::vector<long> sample_sizes{250, 500, 1000, 2000};
  long replications = 10000;
  double kappa = 0.05;
  std::vector<TestMethod> tests{TestMethod::Pearson, TestMethod::Nass,
                                TestMethod::MultinomialLrt};
  std::uint64_t master_seed = 1;
  int threads = 1;
};

// Static rolling backtest: iid losses from G, forecasters refit on a rolling
// window every `stride` steps, tests applied to the n out-of-sample days.
struct StaticBacktestConfig {
  LossModel model = LossModel::normal();
  std::string model_label = "normal";
  long n = 1000;
  long window = 500;
  long stride = 10;
  double alpha = 0.975;
  std::vector<int> level_counts{1, 2, 4, 8};
  std::vector<ForecastMethod> forecasters{ForecastMethod::Oracle, ForecastMethod::Good,
                                          ForecastMethod::Poor, ForecastMethod::Industry};
  long replications = 1000;
  double kappa = 0.05;
  std::vector<TestMethod> tests{TestMethod::Pearson, TestMethod::Nass,
                                TestMethod::MultinomialLrt};
  std::uint64_t master_seed = 1;
  int threads = 1;
};

// Dynamic backtest: losses follow a GARCH data-generating process and the
// forecasters are conditional (time-series) models refit every `stride` steps.
struct DynamicBacktestConfig {
  GarchParams dgp;
  long n = 1000;
  long window = 500;
  long stride = 10;
  long burn_in = 1000;
  double alpha = 0.975;
  std::vector<int> level_counts{1, 2, 4, 8};
  std::vector<ForecastMethod> forecasters{ForecastMethod::Oracle, ForecastMethod::GarchT,
                                          ForecastMethod::GarchHS, ForecastMethod::GarchNorm,
                                          ForecastMethod::ArchT, ForecastMethod::ArchNorm,
                                          ForecastMethod::HS};
  long replications = 500;
  double kappa = 0.05;
  std::vector<TestMethod> tests{TestMethod::Pearson, TestMethod::Nass,
                                TestMethod::MultinomialLrt};
  std::uint64_t master_seed = 1;
  int threads = 1;
};

// ---------------------------------------------------------------------------
// Experiment reports
// ---------------------------------------------------------------------------

// One cell of the rejection-rate tables: a (model-or-forecaster, test, N)
// combination at a given sample size / window.
struct ReportRow {
  std::string model;
  std::string test;
  int n_levels = 0;  // 0 marks the continuous (Berkowitz) limit
  long n = 0;        // sample size (size/power) or backtest length
  long window = 0;   // rolling-window length; 0 for the size/power study
  long replications = 0;
  long failures = 0;  // dropped or errored replications, excluded from the rate
  double rejection_pct = 0.0;
  bool is_size = false;        // the null/oracle row of its table
  bool not_applicable = false; // e.g. the poor modeller when the truth is normal
};

struct ExperimentReport {
  std::string kind;  // size_power | static | dynamic
  std::uint64_t master_seed = 0;
  double kappa = 0.05;
  double wall_clock_seconds = 0.0;  // summary only; never written to CSV
  std::vector<ReportRow> rows;
};

// Deterministic CSV rendering: fixed column order, fixed formatting, no
// timing information, so identical configurations give identical bytes.
std::string report_csv(const ExperimentReport& report);

// Human-readable summary with the green/red classification (size <= 6 green,
// >= 9 red; power >= 70 green, <= 30 red).
std::string report_summary(const ExperimentReport& report);

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

ExperimentReport run_size_power(const SizePowerConfig& config);
ExperimentReport run_static_backtest(const StaticBacktestConfig& config);
ExperimentReport run_dynamic_backtest(const DynamicBacktestConfig& config);

}  // namespace esback
