#include "doctest.h"

#include <cmath>
#include <vector>

#include "esback/errors.hpp"
#include "esback/levels.hpp"
#include "esback/mtest.hpp"
#include "esback/rng.hpp"
#include "esback/special.hpp"

using namespace esback;

namespace {

CellCounts make_counts(std::vector<long> counts) {
  CellCounts c;
  c.counts = std::move(counts);
  c.n = 0;
  for (long v : c.counts) c.n += v;
  return c;
}

// Expected (real-valued) cell counts under the null.
std::vector<double> expected_counts(const LevelGrid& grid, double n) {
  std::vector<double> out;
  for (double p : expected_cell_probs(grid)) out.push_back(n * p);
  return out;
}

}  // namespace

TEST_CASE("pearson statistic") {
  LevelGrid grid = level_grid(0.975, 1);
  // n = 400 makes the expected counts integral: (390, 10).
  TestResult perfect = pearson_test(make_counts({390, 10}), grid);
  CHECK(perfect.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(perfect.p_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(perfect.df == 1.0);

  // Hand-evaluated example: n=250, O=(244,6).
  TestResult hand = pearson_test(make_counts({244, 6}), grid);
  CHECK(hand.statistic == doctest::Approx(0.01025641).epsilon(1e-6));
  CHECK(hand.p_value == doctest::Approx(0.9193).epsilon(2e-4));
}

TEST_CASE("pearson equals squared binomial score at one level") {
  for (long n : {50L, 250L, 1000L}) {
    LevelGrid grid = level_grid(0.975, 1);
    for (long o1 = 0; o1 <= n; ++o1) {
      TestResult p = pearson_test(make_counts({n - o1, o1}), grid);
      TestResult s = binomial_score_test(o1, n, 0.975, Sided::TwoSided);
      CHECK(std::fabs(p.statistic - s.statistic * s.statistic) <
            1e-12 * std::max(1.0, s.statistic * s.statistic));
      // Two-sided p-values agree: chi2_1 tail of Z^2 equals the two-sided
      // normal tail of Z.
      CHECK(std::fabs(p.p_value - s.p_value) < 1e-12);
    }
  }
}

TEST_CASE("pearson tail-cell monotonicity") {
  LevelGrid grid = level_grid(0.975, 2);
  // With the top cell already above its expectation, moving an observation
  // from the bottom cell into the top cell increases the statistic.
  for (long extra = 4; extra < 30; ++extra) {
    CellCounts a = make_counts({975 - extra, 13, 12 + extra});
    CellCounts b = make_counts({974 - extra, 13, 13 + extra});
    double sa = pearson_test(a, grid).statistic;
    double sb = pearson_test(b, grid).statistic;
    CHECK(sb > sa);
  }
}

TEST_CASE("nass correction factors") {
  LevelGrid grid = level_grid(0.975, 1);
  TestResult r = nass_test(make_counts({244, 6}), grid);
  // c = 2E(S)/var(S) with var(S) = 2 - 6/250 + (1/250)(1/0.975 + 1/0.025).
  CHECK(r.df == doctest::Approx(0.9345346).epsilon(1e-6 / 0.9345346));
  double c = r.df / grid.n_levels;
  CHECK(c == doctest::Approx(0.9345346).epsilon(1e-6 / 0.9345346));
  double pearson = pearson_test(make_counts({244, 6}), grid).statistic;
  CHECK(r.statistic == doctest::Approx(c * pearson).epsilon(1e-12));

  TestResult perfect = nass_test(make_counts({390, 10}), grid);
  CHECK(perfect.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(perfect.p_value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nass approaches pearson for large samples") {
  LevelGrid grid = level_grid(0.975, 4);
  {
    // c -> 1 as n grows with the grid fixed.
    long n = 100000;
    std::vector<double> exp_counts = expected_counts(grid, static_cast<double>(n));
    CellCounts c = make_counts({static_cast<long>(exp_counts[0]), static_cast<long>(exp_counts[1]),
                                static_cast<long>(exp_counts[2]), static_cast<long>(exp_counts[3]),
                                static_cast<long>(exp_counts[4])});
    c.n = n;
    TestResult r = nass_test(c, grid);
    CHECK(std::fabs(r.df / 4.0 - 1.0) < 0.01);
  }
  {
    // At n = 1e9 the Nass and Pearson p-values agree to 1e-4 on
    // perturbed-null counts.
    long n = 1000000000;
    CellCounts c = make_counts({975000000L - 40000, 6250000L + 10000, 6250000L + 12000,
                                6250000L + 9000, 6250000L + 9000});
    REQUIRE(c.n == n);
    TestResult nass = nass_test(c, grid);
    TestResult pear = pearson_test(c, grid);
    CHECK(std::fabs(nass.p_value - pear.p_value) < 1e-4);
  }
}

TEST_CASE("cell-model MLE on exact expected counts") {
  for (int levels : {2, 4, 8, 16}) {
    for (double n : {250.0, 2000.0}) {
      LevelGrid grid = level_grid(0.975, levels);
      MuSigmaFit fit = fit_mu_sigma(expected_counts(grid, n), grid);
      CHECK(std::fabs(fit.mu) < 1e-4);
      CHECK(std::fabs(fit.sigma - 1.0) < 1e-4);
    }
  }
}

TEST_CASE("cell-model MLE against a grid-search oracle") {
  RngStream rng(31, 0);
  for (int trial = 0; trial < 5; ++trial) {
    int levels = trial % 2 == 0 ? 4 : 8;
    LevelGrid grid = level_grid(0.975, levels);
    // Random counts concentrated near the null but perturbed.
    std::vector<double> probs = expected_cell_probs(grid);
    std::vector<double> counts;
    long n = 1000;
    for (double p : probs) {
      counts.push_back(std::max(0.0, std::floor(n * p + (rng.uniform() - 0.3) * 6.0)));
    }
    if (counts[0] < 1.0) counts[0] = 1.0;
    MuSigmaFit fit = fit_mu_sigma(counts, grid);

    double best = -1e300;
    for (int i = 0; i < 200; ++i) {
      double mu = -1.0 + 2.0 * i / 199.0;
      for (int j = 0; j < 200; ++j) {
        double sigma = std::exp(-1.0 + 2.0 * j / 199.0);
        best = std::max(best, mu_sigma_loglik(counts, grid, mu, sigma));
      }
    }
    CHECK(fit.loglik >= best - 1e-6);
  }
}

TEST_CASE("cell-model MLE sign and boundary behaviour") {
  LevelGrid grid = level_grid(0.975, 4);
  // Mass shifted one cell up relative to the null pushes mu upward.
  std::vector<double> shifted{960.0, 15.0, 7.0, 9.0, 9.0};
  MuSigmaFit fit = fit_mu_sigma(shifted, grid);
  CHECK(fit.mu > 0.0);

  // All mass in the bottom cell: a boundary optimum, flagged, not fatal.
  std::vector<double> allzero{1000.0, 0.0, 0.0, 0.0, 0.0};
  MuSigmaFit degen = fit_mu_sigma(allzero, grid);
  CHECK(degen.degenerate);

  CHECK_THROWS_AS(fit_mu_sigma({100.0, 5.0}, level_grid(0.975, 1)), DomainError);
}

TEST_CASE("multinomial likelihood-ratio test") {
  LevelGrid grid = level_grid(0.975, 4);
  std::vector<double> exp_counts = expected_counts(grid, 1600.0);
  CellCounts perfect = make_counts({std::lround(exp_counts[0]), std::lround(exp_counts[1]),
                                    std::lround(exp_counts[2]), std::lround(exp_counts[3]),
                                    std::lround(exp_counts[4])});
  TestResult r = multinomial_lrt(perfect, grid);
  CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(r.p_value > 0.99);
  CHECK(r.df == 2.0);
  REQUIRE(r.fitted.has_value());

  // Nonnegativity on random counts: the optimizer at least matches the null.
  RngStream rng(17, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<long> counts(5, 0);
    long n = 500;
    long left = n;
    for (std::size_t j = 1; j < 5; ++j) {
      long v = static_cast<long>(rng.uniform() * 12);
      counts[j] = v;
      left -= v;
    }
    counts[0] = left;
    TestResult rr = multinomial_lrt(make_counts(counts), grid);
    CHECK(rr.statistic >= -1e-9);
  }

  // Determinism: identical inputs give bit-identical statistics.
  CellCounts c = make_counts({962, 12, 9, 8, 9});
  TestResult a = multinomial_lrt(c, grid);
  TestResult b = multinomial_lrt(c, grid);
  CHECK(a.statistic == b.statistic);
  CHECK(a.p_value == b.p_value);
}

TEST_CASE("one-level LRT dispatches to the binomial test") {
  LevelGrid grid = level_grid(0.975, 1);
  TestResult lrt = multinomial_lrt(make_counts({244, 6}), grid);
  TestResult direct = binomial_lrt(6, 250, 0.975, Sided::TwoSided);
  CHECK(lrt.method == TestMethod::BinomialLrt);
  CHECK(lrt.statistic == direct.statistic);
  CHECK(lrt.p_value == direct.p_value);
  CHECK(lrt.df == 1.0);
}

TEST_CASE("binomial score test") {
  // O1 exactly at expectation.
  TestResult zero = binomial_score_test(10, 400, 0.975, Sided::TwoSided);
  CHECK(zero.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(zero.p_value == doctest::Approx(1.0).epsilon(1e-12));

  // Hand example: n=250, alpha=0.99, O1=5: Z = 2.5 / sqrt(250 * 0.99 * 0.01).
  TestResult r = binomial_score_test(5, 250, 0.99, Sided::OneSided);
  CHECK(r.statistic == doctest::Approx(2.5 / std::sqrt(2.475)).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.0562).epsilon(2e-3));

  CHECK_THROWS_AS(binomial_score_test(-1, 250, 0.99, Sided::TwoSided), DomainError);
  CHECK_THROWS_AS(binomial_score_test(251, 250, 0.99, Sided::TwoSided), DomainError);
}

TEST_CASE("binomial wald test") {
  // At O1 = n(1-alpha) the estimated and nominal variances coincide.
  TestResult score = binomial_score_test(10, 400, 0.975, Sided::TwoSided);
  TestResult wald = binomial_wald_test(10, 400, 0.975, Sided::TwoSided);
  CHECK(wald.statistic == doctest::Approx(score.statistic).epsilon(1e-12));

  TestResult r = binomial_wald_test(5, 250, 0.99, Sided::OneSided);
  CHECK(r.statistic == doctest::Approx(2.5 / std::sqrt(4.9)).epsilon(1e-6));

  CHECK_THROWS_AS(binomial_wald_test(0, 250, 0.99, Sided::TwoSided), DegenerateError);
  CHECK_THROWS_AS(binomial_wald_test(250, 250, 0.99, Sided::TwoSided), DegenerateError);
}

TEST_CASE("binomial likelihood-ratio test") {
  TestResult zero = binomial_lrt(10, 400, 0.975, Sided::TwoSided);
  CHECK(zero.statistic == doctest::Approx(0.0).epsilon(1e-12));

  // One-sided is the exact binomial tail; independent summation oracle.
  TestResult exact = binomial_lrt(5, 250, 0.99, Sided::OneSided);
  double tail = 0.0;
  for (long k = 5; k <= 250; ++k) {
    tail += std::exp(std::lgamma(251.0) - std::lgamma(k + 1.0) - std::lgamma(251.0 - k) +
                     k * std::log(0.01) + (250.0 - k) * std::log(0.99));
  }
  CHECK(exact.p_value == doctest::Approx(tail).epsilon(1e-10));
  CHECK(exact.p_value == doctest::Approx(0.1078).epsilon(2e-3));
  CHECK(exact.p_value > 0.05);  // 5 exceptions alone do not reject at 5%

  TestResult none = binomial_lrt(0, 250, 0.99, Sided::OneSided);
  CHECK(none.p_value == doctest::Approx(1.0).epsilon(1e-12));

  // Zero cells are handled by the 0*log(0) := 0 convention.
  TestResult allzero = binomial_lrt(0, 250, 0.99, Sided::TwoSided);
  CHECK(std::isfinite(allzero.statistic));
  TestResult allone = binomial_lrt(250, 250, 0.99, Sided::TwoSided);
  CHECK(std::isfinite(allone.statistic));
}

TEST_CASE("berkowitz censored-normal test") {
  // Perfectly calibrated PIT values: statistic near zero.
  std::vector<double> pit;
  for (int i = 1; i <= 2000; ++i) pit.push_back(i / 2001.0);
  TestResult r = berkowitz_lrt(pit, 0.975);
  CHECK(r.statistic < 1.0);
  CHECK(r.p_value > 0.5);

  // No tail data: degenerate flag rather than a throw.
  std::vector<double> body;
  for (int i = 1; i <= 100; ++i) body.push_back(0.9 * i / 101.0);
  TestResult degen = berkowitz_lrt(body, 0.975);
  CHECK(degen.degenerate_fit);

  CHECK_THROWS_AS(berkowitz_lrt({}, 0.975), DomainError);
  CHECK_THROWS_AS(berkowitz_lrt({0.5, 1.5}, 0.975), DomainError);

  // Null calibration smoke test at modest scale (the acceptance gate runs the
  // full-scale version): rejection at 5% within a wide band.
  RngStream rng(23, 0);
  int reject = 0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<double> u(500);
    for (double& v : u) v = rng.uniform();
    if (berkowitz_lrt(u, 0.975).p_value < 0.05) ++reject;
  }
  CHECK(reject >= 2);
  CHECK(reject <= 25);
}

TEST_CASE("discrete cell probabilities approach the censored-model bands") {
  // With a very fine grid the cell probabilities of the discrete model at
  // (mu, sigma) match the continuous band probabilities computed by
  // numerically integrating the transformed normal density.
  const double mu = 0.3, sigma = 1.2;
  LevelGrid grid = level_grid(0.975, 1024);
  double max_diff = 0.0;
  for (int j = 1; j < grid.n_levels; ++j) {
    double a_lo = grid.level_with_sentinels(j);
    double a_hi = grid.level_with_sentinels(j + 1);
    double theta_lo = std_normal_cdf((std_normal_quantile(a_lo) - mu) / sigma);
    double theta_hi = std_normal_cdf((std_normal_quantile(a_hi) - mu) / sigma);
    double cell = theta_hi - theta_lo;

    // Band probability by Simpson integration of the density of
    // Phi((Phi^-1(U) - mu)/sigma)'s underlying variable over the band.
    const int steps = 16;
    double lo = std_normal_quantile(a_lo), hi = std_normal_quantile(a_hi);
    double h = (hi - lo) / steps;
    double integral = 0.0;
    for (int s = 0; s < steps; ++s) {
      double x0 = lo + s * h, x1 = x0 + h, xm = x0 + 0.5 * h;
      auto dens = [&](double x) { return std_normal_pdf((x - mu) / sigma) / sigma; };
      integral += h / 6.0 * (dens(x0) + 4.0 * dens(xm) + dens(x1));
    }
    max_diff = std::max(max_diff, std::fabs(cell - integral));
  }
  CHECK(max_diff < 1e-3);
}

TEST_CASE("test method names") {
  CHECK(to_string(TestMethod::Pearson) == "pearson");
  CHECK(to_string(TestMethod::Nass) == "nass");
  CHECK(to_string(TestMethod::MultinomialLrt) == "lrt");
  CHECK(to_string(TestMethod::Berkowitz) == "berkowitz");
}
