#include "esback/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "esback/errors.hpp"
#include "esback/rng.hpp"
#include "esback/special.hpp"

namespace esback {

namespace {

bool is_multinomial_method(TestMethod m) {
  return m == TestMethod::Pearson || m == TestMethod::Nass || m == TestMethod::MultinomialLrt;
}

bool is_binomial_method(TestMethod m) {
  return m == TestMethod::BinomialScore || m == TestMethod::BinomialWald ||
         m == TestMethod::BinomialLrt;
}

// A (test, N) cell of the rejection table. Binomial tests are recorded at
// N = 1, the Berkowitz test at N = 0 (the continuous limit).
struct CellSpec {
  TestMethod test;
  int n_levels;
};

std::vector<CellSpec> build_cells(const std::vector<TestMethod>& tests,
                                  const std::vector<int>& level_counts, bool allow_berkowitz) {
  if (level_counts.empty()) throw DomainError("experiment config: empty level list");
  for (int n_levels : level_counts) {
    if (n_levels < 1) throw DomainError("experiment config: levels must be >= 1");
  }
  std::vector<CellSpec> cells;
  for (TestMethod test : tests) {
    if (is_multinomial_method(test)) {
      for (int n_levels : level_counts) cells.push_back({test, n_levels});
    } else if (is_binomial_method(test)) {
      cells.push_back({test, 1});
    } else if (test == TestMethod::Berkowitz) {
      if (!allow_berkowitz) {
        throw DomainError("experiment config: the Berkowitz test is only available in the "
                          "size/power study");
      }
      cells.push_back({test, 0});
    }
  }
  if (cells.empty()) throw DomainError("experiment config: empty test list");
  return cells;
}

// Per-thread tally of rejections and failures per cell; merged by addition.
struct Tally {
  std::vector<long> reject;
  std::vector<long> fail;

  explicit Tally(std::size_t cells) : reject(cells, 0), fail(cells, 0) {}

  void merge(const Tally& other) {
    for (std::size_t i = 0; i < reject.size(); ++i) {
      reject[i] += other.reject[i];
      fail[i] += other.fail[i];
    }
  }
};

bool same_model(const LossModel& a, const LossModel& b) {
  return a.family() == b.family() && a.nu() == b.nu() && a.gamma() == b.gamma();
}

double run_test_reject(const CellSpec& cell, const std::vector<std::vector<long>>& counts_by_grid,
                       const std::vector<LevelGrid>& grids, long b_count, long n, double alpha,
                       const std::vector<double>* pit, double kappa, bool& failed) {
  failed = false;
  try {
    TestResult res;
    if (is_multinomial_method(cell.test)) {
      std::size_t g = 0;
      while (grids[g].n_levels != cell.n_levels) ++g;
      CellCounts counts;
      counts.counts = counts_by_grid[g];
      counts.n = n;
      res = run_multinomial_test(cell.test, counts, grids[g]);
    } else if (cell.test == TestMethod::BinomialScore) {
      res = binomial_score_test(b_count, n, alpha, Sided::TwoSided);
    } else if (cell.test == TestMethod::BinomialWald) {
      res = binomial_wald_test(b_count, n, alpha, Sided::TwoSided);
    } else if (cell.test == TestMethod::BinomialLrt) {
      res = binomial_lrt(b_count, n, alpha, Sided::TwoSided);
    } else {
      res = berkowitz_lrt(*pit, alpha);
    }
    return res.p_value < kappa ? 1.0 : 0.0;
  } catch (const std::exception&) {
    failed = true;
    return 0.0;
  }
}

std::string format_pct(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", pct);
  return buf;
}

// Sorted-window empirical quantile: the ceil(m*u)-th order statistic.
double sorted_quantile(const std::vector<double>& sorted, double u) {
  long m = static_cast<long>(sorted.size());
  long k = std::clamp(static_cast<long>(std::ceil(u * static_cast<double>(m))), 1L, m);
  return sorted[static_cast<std::size_t>(k - 1)];
}

double standardized_innovation_quantile(double u, Innovation innovation, double nu) {
  if (innovation == Innovation::Normal) return std_normal_quantile(u);
  return student_t_quantile(u, nu) * std::sqrt((nu - 2.0) / nu);
}

}  // namespace

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "kind,model,test,n_levels,n,window,replications,failures,rejection_pct\n";
  for (const ReportRow& row : report.rows) {
    out << report.kind << ',' << row.model << ',' << row.test << ',' << row.n_levels << ','
        << row.n << ',' << row.window << ',' << row.replications << ',' << row.failures << ','
        << (row.not_applicable ? std::string("NA") : format_pct(row.rejection_pct)) << '\n';
  }
  return out.str();
}

std::string report_summary(const ExperimentReport& report) {
  std::ostringstream out;
  out << "experiment: " << report.kind << "\nseed: " << report.master_seed
      << "\nkappa: " << format_pct(100.0 * report.kappa) << "%\nwall clock: "
      << format_pct(report.wall_clock_seconds) << " s\n\n";
  out << "model            test        N     n  window  reject%  class\n";
  for (const ReportRow& row : report.rows) {
    std::string cls;
    if (row.not_applicable) {
      cls = "na";
    } else if (row.is_size) {
      cls = row.rejection_pct <= 6.0 ? "green" : (row.rejection_pct >= 9.0 ? "red" : "amber");
    } else {
      cls = row.rejection_pct >= 70.0 ? "green" : (row.rejection_pct <= 30.0 ? "red" : "amber");
    }
    char line[160];
    std::snprintf(line, sizeof(line), "%-16s %-10s %2d %5ld %7ld  %7s  %s\n", row.model.c_str(),
                  row.test.c_str(), row.n_levels, row.n, row.window,
                  row.not_applicable ? "NA" : format_pct(row.rejection_pct).c_str(), cls.c_str());
    out << line;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Size/power study
// ---------------------------------------------------------------------------

ExperimentReport run_size_power(const SizePowerConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  if (config.replications < 1) throw DomainError("size_power: replications must be >= 1");
  if (config.sample_sizes.empty()) throw DomainError("size_power: empty sample-size list");
  std::vector<CellSpec> cells = build_cells(config.tests, config.level_counts, true);

  const LossModel& g_model = config.true_model;
  const LossModel& f_model = config.reference_model;
  const bool null_case = same_model(g_model, f_model);

  std::vector<LevelGrid> grids;
  for (int n_levels : config.level_counts) grids.push_back(level_grid(config.alpha, n_levels));

  // Comparing the sampling uniform u with theta_j = G(F^-1(alpha_j)) is
  // identical to comparing the drawn loss G^-1(u) with F's alpha_j quantile.
  std::vector<std::vector<double>> thresholds(grids.size());
  for (std::size_t g = 0; g < grids.size(); ++g) {
    for (double a : grids[g].levels) {
      thresholds[g].push_back(null_case ? a : g_model.cdf(f_model.quantile(a)));
    }
  }
  bool need_pit = false;
  for (const CellSpec& cell : cells) need_pit |= cell.test == TestMethod::Berkowitz;

  ExperimentReport report;
  report.kind = "size_power";
  report.master_seed = config.master_seed;
  report.kappa = config.kappa;

  for (std::size_t ni = 0; ni < config.sample_sizes.size(); ++ni) {
    const long n = config.sample_sizes[ni];
    if (n < 1) throw DomainError("size_power: sample size must be >= 1");

    const int t = std::max(1, config.threads);
    std::vector<Tally> tallies(static_cast<std::size_t>(t), Tally(cells.size()));

    auto body = [&](long rep, Tally& tally) {
      RngStream rng(config.master_seed,
                    static_cast<std::uint64_t>(ni) * static_cast<std::uint64_t>(config.replications) +
                        static_cast<std::uint64_t>(rep));
      std::vector<std::vector<long>> counts(grids.size());
      for (std::size_t g = 0; g < grids.size(); ++g) {
        counts[g].assign(static_cast<std::size_t>(grids[g].n_levels) + 1, 0);
      }
      long b_count = 0;
      std::vector<double> pit;
      if (need_pit) pit.reserve(static_cast<std::size_t>(n));
      for (long i = 0; i < n; ++i) {
        double u = rng.uniform();
        for (std::size_t g = 0; g < grids.size(); ++g) {
          int depth = 0;
          for (double th : thresholds[g]) {
            if (u > th) ++depth; else break;
          }
          ++counts[g][static_cast<std::size_t>(depth)];
        }
        if (u > thresholds[0][0]) ++b_count;  // alpha_1 == alpha on every grid
        if (need_pit) pit.push_back(null_case ? u : f_model.cdf(g_model.quantile(u)));
      }
      for (std::size_t c = 0; c < cells.size(); ++c) {
        bool failed = false;
        double rejected = run_test_reject(cells[c], counts, grids, b_count, n, config.alpha,
                                          need_pit ? &pit : nullptr, config.kappa, failed);
        if (failed) ++tally.fail[c];
        else if (rejected > 0.5) ++tally.reject[c];
      }
    };

    if (t == 1) {
      for (long rep = 0; rep < config.replications; ++rep) body(rep, tallies[0]);
    } else {
      std::vector<std::thread> pool;
      for (int k = 0; k < t; ++k) {
        pool.emplace_back([&, k] {
          for (long rep = k; rep < config.replications; rep += t) {
            body(rep, tallies[static_cast<std::size_t>(k)]);
          }
        });
      }
      for (auto& th : pool) th.join();
    }
    for (int k = 1; k < t; ++k) tallies[0].merge(tallies[static_cast<std::size_t>(k)]);

    for (std::size_t c = 0; c < cells.size(); ++c) {
      ReportRow row;
      row.model = config.true_label;
      row.test = to_string(cells[c].test);
      row.n_levels = cells[c].n_levels;
      row.n = n;
      row.window = 0;
      row.replications = config.replications;
      row.failures = tallies[0].fail[c];
      long valid = config.replications - row.failures;
      row.rejection_pct =
          valid > 0 ? 100.0 * static_cast<double>(tallies[0].reject[c]) / static_cast<double>(valid)
                    : 0.0;
      row.is_size = null_case;
      report.rows.push_back(row);
    }
  }

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// ---------------------------------------------------------------------------
// Static rolling backtest
// ---------------------------------------------------------------------------

namespace {

// Per-forecaster quantile rows for the current refit block of a static run.
struct StaticForecasterState {
  bool dropped = false;
  bool have_fit = false;
  StaticFit fit;
  std::vector<std::vector<double>> rows;  // one row per grid
};

}  // namespace

ExperimentReport run_static_backtest(const StaticBacktestConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  if (config.replications < 1) throw DomainError("static backtest: replications must be >= 1");
  if (config.window < 50) throw DomainError("static backtest: window must be >= 50");
  if (config.stride < 1) throw DomainError("static backtest: stride must be >= 1");
  if (config.n < 1) throw DomainError("static backtest: n must be >= 1");
  if (config.forecasters.empty()) throw DomainError("static backtest: empty forecaster list");
  for (ForecastMethod f : config.forecasters) {
    if (f != ForecastMethod::Oracle && f != ForecastMethod::Good && f != ForecastMethod::Poor &&
        f != ForecastMethod::Industry) {
      throw DomainError("static backtest: forecaster " + to_string(f) +
                        " belongs to the dynamic study");
    }
  }
  std::vector<CellSpec> cells = build_cells(config.tests, config.level_counts, false);

  std::vector<LevelGrid> grids;
  for (int n_levels : config.level_counts) grids.push_back(level_grid(config.alpha, n_levels));

  const std::size_t n_forecasters = config.forecasters.size();
  const std::size_t cells_per_f = cells.size();
  const bool truth_is_normal = config.model.family() == Family::Normal;

  const int t = std::max(1, config.threads);
  std::vector<Tally> tallies(static_cast<std::size_t>(t),
                             Tally(n_forecasters * cells_per_f));
  // Dropped replications are per forecaster, shared by all its cells.
  std::vector<std::vector<long>> drops(static_cast<std::size_t>(t),
                                       std::vector<long>(n_forecasters, 0));

  auto body = [&](long rep, Tally& tally, std::vector<long>& drop) {
    RngStream rng(config.master_seed, static_cast<std::uint64_t>(rep));
    Eigen::VectorXd series = config.model.sample(rng, config.window + config.n);

    std::vector<StaticForecasterState> state(n_forecasters);
    std::vector<std::vector<std::vector<long>>> counts(n_forecasters);
    for (auto& per_f : counts) {
      per_f.resize(grids.size());
      for (std::size_t g = 0; g < grids.size(); ++g) {
        per_f[g].assign(static_cast<std::size_t>(grids[g].n_levels) + 1, 0);
      }
    }

    for (long d = 0; d < config.n; ++d) {
      if (d % config.stride == 0) {
        Eigen::VectorXd window = series.segment(d, config.window);
        std::vector<double> sorted_window;
        for (std::size_t fi = 0; fi < n_forecasters; ++fi) {
          StaticForecasterState& st = state[fi];
          if (st.dropped) continue;
          ForecastMethod method = config.forecasters[fi];
          if (method == ForecastMethod::Poor && truth_is_normal) continue;  // NA row
          st.rows.assign(grids.size(), {});
          if (method == ForecastMethod::Oracle) {
            for (std::size_t g = 0; g < grids.size(); ++g) {
              for (double a : grids[g].levels) st.rows[g].push_back(config.model.quantile(a));
            }
            continue;
          }
          if (method == ForecastMethod::Industry) {
            if (sorted_window.empty()) {
              sorted_window.assign(window.data(), window.data() + window.size());
              std::sort(sorted_window.begin(), sorted_window.end());
            }
            for (std::size_t g = 0; g < grids.size(); ++g) {
              for (double a : grids[g].levels) {
                st.rows[g].push_back(sorted_quantile(sorted_window, a));
              }
            }
            continue;
          }
          Family family = method == ForecastMethod::Poor ? Family::Normal : config.model.family();
          try {
            st.fit = fit_static_model(family, window, st.have_fit ? &st.fit : nullptr);
            st.have_fit = true;
          } catch (const std::exception&) {
            if (!st.have_fit) {
              st.dropped = true;
              continue;
            }
            // keep the previous fit, as a practitioner would
          }
          for (std::size_t g = 0; g < grids.size(); ++g) {
            for (double a : grids[g].levels) st.rows[g].push_back(st.fit.quantile(a));
          }
        }
      }

      double loss = series[config.window + d];
      for (std::size_t fi = 0; fi < n_forecasters; ++fi) {
        StaticForecasterState& st = state[fi];
        if (st.dropped || st.rows.empty()) continue;
        for (std::size_t g = 0; g < grids.size(); ++g) {
          int depth = 0;
          for (double q : st.rows[g]) {
            if (loss > q) ++depth; else break;
          }
          ++counts[fi][g][static_cast<std::size_t>(depth)];
        }
      }
    }

    for (std::size_t fi = 0; fi < n_forecasters; ++fi) {
      if (config.forecasters[fi] == ForecastMethod::Poor && truth_is_normal) continue;
      if (state[fi].dropped) {
        ++drop[fi];
        continue;
      }
      long b_count = config.n - counts[fi][0][0];
      for (std::size_t c = 0; c < cells_per_f; ++c) {
        bool failed = false;
        double rejected = run_test_reject(cells[c], counts[fi], grids, b_count, config.n,
                                          config.alpha, nullptr, config.kappa, failed);
        std::size_t idx = fi * cells_per_f + c;
        if (failed) ++tally.fail[idx];
        else if (rejected > 0.5) ++tally.reject[idx];
      }
    }
  };

  if (t == 1) {
    for (long rep = 0; rep < config.replications; ++rep) body(rep, tallies[0], drops[0]);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < t; ++k) {
      pool.emplace_back([&, k] {
        for (long rep = k; rep < config.replications; rep += t) {
          body(rep, tallies[static_cast<std::size_t>(k)], drops[static_cast<std::size_t>(k)]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (int k = 1; k < t; ++k) {
    tallies[0].merge(tallies[static_cast<std::size_t>(k)]);
    for (std::size_t fi = 0; fi < n_forecasters; ++fi) {
      drops[0][fi] += drops[static_cast<std::size_t>(k)][fi];
    }
  }

  ExperimentReport report;
  report.kind = "static";
  report.master_seed = config.master_seed;
  report.kappa = config.kappa;
  for (std::size_t fi = 0; fi < n_forecasters; ++fi) {
    for (std::size_t c = 0; c < cells_per_f; ++c) {
      std::size_t idx = fi * cells_per_f + c;
      ReportRow row;
      row.model = to_string(config.forecasters[fi]);
      row.test = to_string(cells[c].test);
      row.n_levels = cells[c].n_levels;
      row.n = config.n;
      row.window = config.window;
      row.replications = config.replications;
      row.failures = drops[0][fi] + tallies[0].fail[idx];
      row.is_size = config.forecasters[fi] == ForecastMethod::Oracle;
      row.not_applicable = config.forecasters[fi] == ForecastMethod::Poor && truth_is_normal;
      long valid = config.replications - row.failures;
      row.rejection_pct = (!row.not_applicable && valid > 0)
                              ? 100.0 * static_cast<double>(tallies[0].reject[idx]) /
                                    static_cast<double>(valid)
                              : 0.0;
      report.rows.push_back(row);
    }
  }
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// ---------------------------------------------------------------------------
// Dynamic backtest
// ---------------------------------------------------------------------------

namespace {

struct DynamicForecasterState {
  bool dropped = false;
  bool have_fit = false;
  GarchFit fit;
  double sigma2_next = 0.0;
  // Per-grid rows of standardized quantiles; multiplied by the volatility
  // forecast each day for the conditional methods. HS rows are absolute.
  std::vector<std::vector<double>> z_rows;
  bool absolute_rows = false;
};

bool needs_garch_norm(ForecastMethod m) {
  return m == ForecastMethod::GarchNorm || m == ForecastMethod::GarchHS;
}

}  // namespace

ExperimentReport run_dynamic_backtest(const DynamicBacktestConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  config.dgp.validate();
  if (config.replications < 1) throw DomainError("dynamic backtest: replications must be >= 1");
  if (config.window < 250) throw DomainError("dynamic backtest: window must be >= 250");
  if (config.stride < 1) throw DomainError("dynamic backtest: stride must be >= 1");
  if (config.n < 1) throw DomainError("dynamic backtest: n must be >= 1");
  if (config.forecasters.empty()) throw DomainError("dynamic backtest: empty forecaster list");
  for (ForecastMethod f : config.forecasters) {
    if (f == ForecastMethod::Good || f == ForecastMethod::Poor ||
        f == ForecastMethod::Industry) {
      throw DomainError("dynamic backtest: forecaster " + to_string(f) +
                        " belongs to the static study");
    }
  }
  std::vector<CellSpec> cells = build_cells(config.tests, config.level_counts, false);

  std::vector<LevelGrid> grids;
  for (int n_levels : config.level_counts) grids.push_back(level_grid(config.alpha, n_levels));

  const std::size_t n_forecasters = config.forecasters.size();
  const std::size_t cells_per_f = cells.size();

  // True standardized innovation quantiles for the oracle.
  std::vector<std::vector<double>> oracle_z(grids.size());
  for (std::size_t g = 0; g < grids.size(); ++g) {
    for (double a : grids[g].levels) {
      oracle_z[g].push_back(
          standardized_innovation_quantile(a, config.dgp.innovation, config.dgp.nu));
    }
  }

  const int t = std::max(1, config.threads);
  std::vector<Tally> tallies(static_cast<std::size_t>(t),
                             Tally(n_forecasters * cells_per_f));
  std::vector<std::vector<long>> drops(static_cast<std::size_t>(t),
                                       std::vector<long>(n_forecasters, 0));

  auto body = [&](long rep, Tally& tally, std::vector<long>& drop) {
    RngStream rng(config.master_seed, static_cast<std::uint64_t>(rep));
    GarchPath path = garch_simulate(config.dgp, config.window + config.n, config.burn_in, rng);

    std::vector<DynamicForecasterState> state(n_forecasters);
    std::vector<std::vector<std::vector<long>>> counts(n_forecasters);
    for (auto& per_f : counts) {
      per_f.resize(grids.size());
      for (std::size_t g = 0; g < grids.size(); ++g) {
        per_f[g].assign(static_cast<std::size_t>(grids[g].n_levels) + 1, 0);
      }
    }

    for (long d = 0; d < config.n; ++d) {
      if (d % config.stride == 0) {
        Eigen::VectorXd window = path.losses.segment(d, config.window);
        std::vector<double> sorted_window;
        // The GARCH-normal QML fit is shared by garch.norm and garch.hs.
        GarchFit shared_norm_fit;
        bool have_shared_norm = false;

        for (std::size_t fi = 0; fi < n_forecasters; ++fi) {
          DynamicForecasterState& st = state[fi];
          if (st.dropped) continue;
          ForecastMethod method = config.forecasters[fi];

          if (method == ForecastMethod::Oracle) {
            st.z_rows = oracle_z;
            continue;
          }
          if (method == ForecastMethod::HS) {
            if (sorted_window.empty()) {
              sorted_window.assign(window.data(), window.data() + window.size());
              std::sort(sorted_window.begin(), sorted_window.end());
            }
            st.z_rows.assign(grids.size(), {});
            st.absolute_rows = true;
            for (std::size_t g = 0; g < grids.size(); ++g) {
              for (double a : grids[g].levels) {
                st.z_rows[g].push_back(sorted_quantile(sorted_window, a));
              }
            }
            continue;
          }

          Innovation innovation =
              (method == ForecastMethod::GarchT || method == ForecastMethod::ArchT)
                  ? Innovation::StudentT
                  : Innovation::Normal;
          VolSpec spec = (method == ForecastMethod::ArchT || method == ForecastMethod::ArchNorm)
                             ? VolSpec::Arch1
                             : VolSpec::Garch11;
          try {
            if (needs_garch_norm(method)) {
              if (!have_shared_norm) {
                const GarchFit* warm = st.have_fit ? &st.fit : nullptr;
                shared_norm_fit = garch_fit(window, Innovation::Normal, VolSpec::Garch11, warm);
                have_shared_norm = true;
              }
              st.fit = shared_norm_fit;
            } else {
              st.fit = garch_fit(window, innovation, spec, st.have_fit ? &st.fit : nullptr);
            }
            st.have_fit = true;

            GarchFilter filter = garch_filter(window, st.fit.params);
            st.sigma2_next = filter.sigma_next * filter.sigma_next;
            st.z_rows.assign(grids.size(), {});
            st.absolute_rows = false;
            if (method == ForecastMethod::GarchHS) {
              std::vector<double> residuals(static_cast<std::size_t>(window.size()));
              for (long i = 0; i < window.size(); ++i) {
                residuals[static_cast<std::size_t>(i)] = window[i] / filter.sigma[i];
              }
              std::sort(residuals.begin(), residuals.end());
              for (std::size_t g = 0; g < grids.size(); ++g) {
                for (double a : grids[g].levels) {
                  st.z_rows[g].push_back(sorted_quantile(residuals, a));
                }
              }
            } else {
              for (std::size_t g = 0; g < grids.size(); ++g) {
                for (double a : grids[g].levels) {
                  st.z_rows[g].push_back(standardized_innovation_quantile(
                      a, st.fit.params.innovation, st.fit.params.nu));
                }
              }
            }
          } catch (const std::exception&) {
            // Keep the previous block's forecasts, as a practitioner would;
            // drop the replication if even the first fit fails.
            if (st.z_rows.empty()) st.dropped = true;
          }
        }
      }

      double loss = path.losses[config.window + d];
      for (std::size_t fi = 0; fi < n_forecasters; ++fi) {
        DynamicForecasterState& st = state[fi];
        if (st.dropped) continue;
        ForecastMethod method = config.forecasters[fi];
        double scale = 1.0;
        if (method == ForecastMethod::Oracle) {
          scale = path.sigma[config.window + d];
        } else if (!st.absolute_rows) {
          scale = std::sqrt(st.sigma2_next);
        }
        for (std::size_t g = 0; g < grids.size(); ++g) {
          int depth = 0;
          for (double z : st.z_rows[g]) {
            if (loss > scale * z) ++depth; else break;
          }
          ++counts[fi][g][static_cast<std::size_t>(depth)];
        }
        // Between refits the parameters stay fixed but the conditional
        // variance is updated daily with the newly observed loss, so every
        // forecast is a genuine one-step-ahead forecast.
        if (method != ForecastMethod::Oracle && method != ForecastMethod::HS) {
          const GarchParams& p = st.fit.params;
          st.sigma2_next = p.alpha0 + p.alpha1 * loss * loss + p.beta1 * st.sigma2_next;
        }
      }
    }

    for (std::size_t fi = 0; fi < n_forecasters; ++fi) {
      if (state[fi].dropped) {
        ++drop[fi];
        continue;
      }
      long b_count = config.n - counts[fi][0][0];
      for (std::size_t c = 0; c < cells_per_f; ++c) {
        bool failed = false;
        double rejected = run_test_reject(cells[c], counts[fi], grids, b_count, config.n,
                                          config.alpha, nullptr, config.kappa, failed);
        std::size_t idx = fi * cells_per_f + c;
        if (failed) ++tally.fail[idx];
        else if (rejected > 0.5) ++tally.reject[idx];
      }
    }
  };

  if (t == 1) {
    for (long rep = 0; rep < config.replications; ++rep) body(rep, tallies[0], drops[0]);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < t; ++k) {
      pool.emplace_back([&, k] {
        for (long rep = k; rep < config.replications; rep += t) {
          body(rep, tallies[static_cast<std::size_t>(k)], drops[static_cast<std::size_t>(k)]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (int k = 1; k < t; ++k) {
    tallies[0].merge(tallies[static_cast<std::size_t>(k)]);
    for (std::size_t fi = 0; fi < n_forecasters; ++fi) {
      drops[0][fi] += drops[static_cast<std::size_t>(k)][fi];
    }
  }

  ExperimentReport report;
  report.kind = "dynamic";
  report.master_seed = config.master_seed;
  report.kappa = config.kappa;
  for (std::size_t fi = 0; fi < n_forecasters; ++fi) {
    for (std::size_t c = 0; c < cells_per_f; ++c) {
      std::size_t idx = fi * cells_per_f + c;
      ReportRow row;
      row.model = to_string(config.forecasters[fi]);
      row.test = to_string(cells[c].test);
      row.n_levels = cells[c].n_levels;
      row.n = config.n;
      row.window = config.window;
      row.replications = config.replications;
      row.failures = drops[0][fi] + tallies[0].fail[idx];
      row.is_size = config.forecasters[fi] == ForecastMethod::Oracle;
      long valid = config.replications - row.failures;
      row.rejection_pct =
          valid > 0 ? 100.0 * static_cast<double>(tallies[0].reject[idx]) / static_cast<double>(valid)
                    : 0.0;
      report.rows.push_back(row);
    }
  }
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace esback
