#include "esback/mtest.hpp"

#include <algorithm>
#include <cmath>

#include "esback/errors.hpp"
#include "esback/nelder_mead.hpp"
#include "esback/special.hpp"

namespace esback {

namespace {

void check_inputs(const CellCounts& counts, const LevelGrid& grid) {
  if (counts.n < 1) throw DomainError("multinomial test: need at least one observation");
  if (counts.n_levels() != grid.n_levels) {
    throw LengthMismatch("multinomial test: counts have N=" +
                         std::to_string(counts.n_levels()) + " but grid has N=" +
                         std::to_string(grid.n_levels));
  }
}

double pearson_statistic(const CellCounts& counts, const LevelGrid& grid) {
  auto probs = expected_cell_probs(grid);
  double stat = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] <= 0.0) throw DomainError("pearson_test: zero expected cell probability");
    double expected = static_cast<double>(counts.n) * probs[j];
    double diff = static_cast<double>(counts.counts[j]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

}  // namespace

std::string to_string(TestMethod method) {
  switch (method) {
    case TestMethod::Pearson: return "pearson";
    case TestMethod::Nass: return "nass";
    case TestMethod::MultinomialLrt: return "lrt";
    case TestMethod::BinomialScore: return "binomial_score";
    case TestMethod::BinomialWald: return "binomial_wald";
    case TestMethod::BinomialLrt: return "binomial_lrt";
    case TestMethod::Berkowitz: return "berkowitz";
  }
  return "unknown";
}

TestResult pearson_test(const CellCounts& counts, const LevelGrid& grid) {
  check_inputs(counts, grid);
  TestResult res;
  res.method = TestMethod::Pearson;
  res.statistic = pearson_statistic(counts, grid);
  res.df = grid.n_levels;
  res.p_value = 1.0 - chi2_cdf(res.statistic, res.df);
  return res;
}

TestResult nass_test(const CellCounts& counts, const LevelGrid& grid) {
  check_inputs(counts, grid);
  auto probs = expected_cell_probs(grid);
  double n = static_cast<double>(counts.n);
  double nn = static_cast<double>(grid.n_levels);
  double inv_sum = 0.0;
  for (double p : probs) inv_sum += 1.0 / p;
  double var = 2.0 * nn - (nn * nn + 4.0 * nn + 1.0) / n + inv_sum / n;
  if (var <= 0.0) throw DegenerateError("nass_test: nonpositive variance of S_N");
  double c = 2.0 * nn / var;
  TestResult res;
  res.method = TestMethod::Nass;
  res.statistic = c * pearson_statistic(counts, grid);
  res.df = c * nn;
  res.p_value = 1.0 - chi2_cdf(res.statistic, res.df);
  return res;
}

double mu_sigma_loglik(const std::vector<double>& counts, const LevelGrid& grid, double mu,
                       double sigma) {
  double ll = 0.0;
  double prev_theta = 0.0;
  for (int j = 0; j <= grid.n_levels; ++j) {
    double theta_next =
        j == grid.n_levels
            ? 1.0
            : std_normal_cdf((std_normal_quantile(grid.levels[static_cast<std::size_t>(j)]) - mu) /
                             sigma);
    double cell = theta_next - prev_theta;
    double o = counts[static_cast<std::size_t>(j)];
    if (o > 0.0) ll += o * safe_log(cell);
    prev_theta = theta_next;
  }
  return ll;
}

MuSigmaFit fit_mu_sigma(const std::vector<double>& counts, const LevelGrid& grid,
                        const MleSettings& settings) {
  if (grid.n_levels < 2) throw DomainError("fit_mu_sigma: requires N >= 2");
  if (static_cast<int>(counts.size()) != grid.n_levels + 1) {
    throw LengthMismatch("fit_mu_sigma: counts/grid size mismatch");
  }
  double total = 0.0;
  for (double o : counts) {
    if (o < 0.0) throw DomainError("fit_mu_sigma: negative count");
    total += o;
  }
  if (total <= 0.0) throw DomainError("fit_mu_sigma: empty counts");

  const double lo = std::log(settings.sigma_min);
  const double hi = std::log(settings.sigma_max);
  auto objective = [&](const std::vector<double>& x) {
    double mu = x[0];
    double ls = std::clamp(x[1], lo, hi);
    double penalty = 0.0;
    if (x[1] < lo) penalty = (lo - x[1]) * total;
    if (x[1] > hi) penalty = (x[1] - hi) * total;
    return -mu_sigma_loglik(counts, grid, mu, std::exp(ls)) + penalty;
  };

  auto run = nelder_mead(objective, {settings.mu_init, std::log(settings.sigma_init)}, 0.2,
                         settings.loglik_tol, 1e-9, settings.max_iter);
  // One restart from the incumbent with a fresh simplex.
  auto rerun = nelder_mead(objective, run.x, 0.02, settings.loglik_tol, 1e-9, settings.max_iter);
  if (rerun.fmin < run.fmin) run = rerun;
  // A settled objective with a wide simplex means a flat (weakly identified)
  // direction, e.g. all counts in one extreme cell; the likelihood value is
  // still reliable, so flag it instead of failing.
  bool flat = run.f_spread <= 1e-7 * (1.0 + std::fabs(run.fmin));
  if (!run.converged && !rerun.converged && !flat) {
    throw ConvergenceError("fit_mu_sigma: simplex failed to converge");
  }

  MuSigmaFit fit;
  fit.mu = run.x[0];
  double ls = std::clamp(run.x[1], lo, hi);
  fit.sigma = std::exp(ls);
  fit.loglik = -objective({fit.mu, ls});
  // All mass in an extreme cell means the optimum sits on the boundary of the
  // parameter space (mu -> +/-inf); the fit is reported but flagged.
  bool boundary_cell = counts.front() >= total || counts.back() >= total;
  fit.degenerate = (ls <= lo + 1e-6) || (ls >= hi - 1e-6) || boundary_cell ||
                   (!run.converged && !rerun.converged);
  return fit;
}

TestResult multinomial_lrt(const CellCounts& counts, const LevelGrid& grid,
                           const MleSettings& settings) {
  check_inputs(counts, grid);
  if (grid.n_levels == 1) {
    return binomial_lrt(counts.counts[1], counts.n, grid.alpha, Sided::TwoSided);
  }
  std::vector<double> real_counts(counts.counts.begin(), counts.counts.end());
  MuSigmaFit fit = fit_mu_sigma(real_counts, grid, settings);
  double ll0 = mu_sigma_loglik(real_counts, grid, 0.0, 1.0);
  double stat = 2.0 * (fit.loglik - ll0);
  if (stat < 0.0 && stat > -1e-9) stat = 0.0;

  TestResult res;
  res.method = TestMethod::MultinomialLrt;
  res.statistic = stat;
  res.df = 2.0;
  res.p_value = 1.0 - chi2_cdf(std::max(stat, 0.0), 2.0);
  res.fitted = FittedParams{fit.mu, fit.sigma};
  res.degenerate_fit = fit.degenerate;
  return res;
}

TestResult binomial_score_test(long o1, long n, double alpha, Sided sided) {
  if (n < 1) throw DomainError("binomial_score_test: n must be >= 1");
  if (o1 < 0 || o1 > n) throw DomainError("binomial_score_test: O1 outside [0,n]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("binomial_score_test: bad alpha");
  double z = (static_cast<double>(o1) - n * (1.0 - alpha)) / std::sqrt(n * alpha * (1.0 - alpha));
  TestResult res;
  res.method = TestMethod::BinomialScore;
  res.sided = sided;
  res.statistic = z;
  res.df = 1.0;
  res.p_value = sided == Sided::TwoSided ? 2.0 * (1.0 - std_normal_cdf(std::fabs(z)))
                                         : 1.0 - std_normal_cdf(z);
  res.p_value = std::min(res.p_value, 1.0);
  return res;
}

TestResult binomial_wald_test(long o1, long n, double alpha, Sided sided) {
  if (n < 1) throw DomainError("binomial_wald_test: n must be >= 1");
  if (o1 <= 0 || o1 >= n) {
    throw DegenerateError("binomial_wald_test: estimated variance vanishes at O1 in {0,n}");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("binomial_wald_test: bad alpha");
  double theta_hat = 1.0 - static_cast<double>(o1) / n;
  double z = (static_cast<double>(o1) - n * (1.0 - alpha)) /
             std::sqrt(n * theta_hat * (1.0 - theta_hat));
  TestResult res;
  res.method = TestMethod::BinomialWald;
  res.sided = sided;
  res.statistic = z;
  res.df = 1.0;
  res.p_value = sided == Sided::TwoSided ? 2.0 * (1.0 - std_normal_cdf(std::fabs(z)))
                                         : 1.0 - std_normal_cdf(z);
  res.p_value = std::min(res.p_value, 1.0);
  return res;
}

TestResult binomial_lrt(long o1, long n, double alpha, Sided sided) {
  if (n < 1) throw DomainError("binomial_lrt: n must be >= 1");
  if (o1 < 0 || o1 > n) throw DomainError("binomial_lrt: O1 outside [0,n]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("binomial_lrt: bad alpha");
  TestResult res;
  res.method = TestMethod::BinomialLrt;
  res.sided = sided;
  if (sided == Sided::OneSided) {
    // Exact binomial tail; the test behind the Basel count rule.
    res.statistic = static_cast<double>(o1);
    res.df = 1.0;
    res.p_value = binomial_tail_geq(o1, n, 1.0 - alpha);
    return res;
  }
  double p_exc = 1.0 - alpha;
  double theta_hat = static_cast<double>(o1) / n;
  double stat = 0.0;
  if (o1 > 0) stat += o1 * std::log(theta_hat / p_exc);
  if (o1 < n) stat += (n - o1) * std::log((1.0 - theta_hat) / alpha);
  stat *= 2.0;
  res.statistic = std::max(stat, 0.0);
  res.df = 1.0;
  res.p_value = 1.0 - chi2_cdf(res.statistic, 1.0);
  return res;
}

TestResult berkowitz_lrt(const std::vector<double>& pit_values, double alpha,
                         const MleSettings& settings) {
  if (pit_values.empty()) throw DomainError("berkowitz_lrt: empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("berkowitz_lrt: bad alpha");
  const double z_alpha = std_normal_quantile(alpha);

  long n_tail = 0;
  std::vector<double> tail_z;
  for (double u : pit_values) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("berkowitz_lrt: PIT value outside (0,1)");
    if (u > alpha) {
      tail_z.push_back(std_normal_quantile(u));
      ++n_tail;
    }
  }
  long n_censored = static_cast<long>(pit_values.size()) - n_tail;

  auto loglik = [&](double mu, double sigma) {
    double ll = 0.0;
    if (n_censored > 0) {
      ll += n_censored * safe_log(std_normal_cdf((z_alpha - mu) / sigma));
    }
    for (double z : tail_z) {
      double s = (z - mu) / sigma;
      ll += -std::log(sigma) - 0.5 * s * s - 0.9189385332046727;  // ln sqrt(2 pi)
    }
    return ll;
  };

  const double lo = std::log(settings.sigma_min);
  const double hi = std::log(settings.sigma_max);
  auto objective = [&](const std::vector<double>& x) {
    double ls = std::clamp(x[1], lo, hi);
    double penalty = std::fabs(x[1] - ls) * static_cast<double>(pit_values.size());
    return -loglik(x[0], std::exp(ls)) + penalty;
  };

  auto run = nelder_mead(objective, {settings.mu_init, std::log(settings.sigma_init)}, 0.2,
                         settings.loglik_tol, 1e-9, settings.max_iter);
  auto rerun = nelder_mead(objective, run.x, 0.02, settings.loglik_tol, 1e-9, settings.max_iter);
  if (rerun.fmin < run.fmin) run = rerun;
  bool flat = run.f_spread <= 1e-7 * (1.0 + std::fabs(run.fmin));
  if (!run.converged && !rerun.converged && !flat) {
    throw ConvergenceError("berkowitz_lrt: simplex failed to converge");
  }

  double ls = std::clamp(run.x[1], lo, hi);
  double mu_hat = run.x[0];
  double sigma_hat = std::exp(ls);
  double stat = 2.0 * (loglik(mu_hat, sigma_hat) - loglik(0.0, 1.0));
  if (stat < 0.0 && stat > -1e-9) stat = 0.0;

  TestResult res;
  res.method = TestMethod::Berkowitz;
  res.statistic = stat;
  res.df = 2.0;
  res.p_value = 1.0 - chi2_cdf(std::max(stat, 0.0), 2.0);
  res.fitted = FittedParams{mu_hat, sigma_hat};
  res.degenerate_fit = (n_tail == 0) || (ls <= lo + 1e-6) || (ls >= hi - 1e-6);
  return res;
}

TestResult run_multinomial_test(TestMethod method, const CellCounts& counts,
                                const LevelGrid& grid) {
  switch (method) {
    case TestMethod::Pearson: return pearson_test(counts, grid);
    case TestMethod::Nass: return nass_test(counts, grid);
    case TestMethod::MultinomialLrt: return multinomial_lrt(counts, grid);
    default:
      throw DomainError("run_multinomial_test: not a multinomial test: " + to_string(method));
  }
}

}  // namespace esback
