#include "doctest.h"

#include <algorithm>
#include <vector>

#include "esback/errors.hpp"
#include "esback/levels.hpp"
#include "esback/rng.hpp"

using namespace esback;

TEST_CASE("level grid construction") {
  LevelGrid g = level_grid(0.975, 4);
  REQUIRE(g.n_levels == 4);
  CHECK(g.levels[0] == doctest::Approx(0.975).epsilon(1e-15));
  CHECK(g.levels[1] == doctest::Approx(0.98125).epsilon(1e-15));
  CHECK(g.levels[2] == doctest::Approx(0.9875).epsilon(1e-15));
  CHECK(g.levels[3] == doctest::Approx(0.99375).epsilon(1e-15));

  LevelGrid g1 = level_grid(0.975, 1);
  REQUIRE(g1.n_levels == 1);
  CHECK(g1.levels[0] == doctest::Approx(0.975).epsilon(1e-15));

  LevelGrid g2 = level_grid(0.99, 2);
  REQUIRE(g2.n_levels == 2);
  CHECK(g2.levels[0] == doctest::Approx(0.99).epsilon(1e-15));
  CHECK(g2.levels[1] == doctest::Approx(0.995).epsilon(1e-15));

  // Sentinels.
  CHECK(g.level_with_sentinels(0) == 0.0);
  CHECK(g.level_with_sentinels(5) == 1.0);
  CHECK(g.level_with_sentinels(1) == doctest::Approx(0.975));

  CHECK_THROWS_AS(level_grid(0.0, 2), DomainError);
  CHECK_THROWS_AS(level_grid(1.0, 2), DomainError);
  CHECK_THROWS_AS(level_grid(0.975, 0), DomainError);
}

TEST_CASE("exceedance depths") {
  Eigen::MatrixXd var(2, 2);
  var << 1.0, 2.0, 1.0, 2.0;
  VarForecastPanel panel = make_panel(var);
  Eigen::VectorXd losses(2);
  losses << 3.0, 1.5;
  ExceptionSeries x = exceedance_depths(losses, panel);
  REQUIRE(x.size() == 2);
  CHECK(x[0] == 2);
  CHECK(x[1] == 1);

  // A tie with the forecast does not count (strict inequality).
  Eigen::VectorXd tie(2);
  tie << 2.0, 1.0;
  ExceptionSeries xt = exceedance_depths(tie, panel);
  CHECK(xt[0] == 1);
  CHECK(xt[1] == 0);

  Eigen::VectorXd wrong(3);
  wrong << 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(exceedance_depths(wrong, panel), LengthMismatch);

  // Non-monotone forecast rows are rejected, not repaired.
  Eigen::MatrixXd bad(1, 2);
  bad << 2.0, 1.0;
  CHECK_THROWS_AS(make_panel(bad), DomainError);
}

TEST_CASE("cell counting") {
  ExceptionSeries x{0, 0, 2, 1};
  CellCounts c = cell_counts(x, 2);
  REQUIRE(c.counts.size() == 3);
  CHECK(c.counts[0] == 2);
  CHECK(c.counts[1] == 1);
  CHECK(c.counts[2] == 1);
  CHECK(c.n == 4);

  CellCounts empty = cell_counts({}, 3);
  CHECK(empty.n == 0);
  for (long v : empty.counts) CHECK(v == 0);

  ExceptionSeries all3{3, 3, 3, 3, 3};
  CellCounts top = cell_counts(all3, 3);
  CHECK(top.counts[3] == 5);
  CHECK(top.counts[0] + top.counts[1] + top.counts[2] == 0);

  CHECK_THROWS_AS(cell_counts(ExceptionSeries{4}, 3), RangeError);
  CHECK_THROWS_AS(cell_counts(ExceptionSeries{-1}, 3), RangeError);
}

TEST_CASE("expected cell probabilities") {
  std::vector<double> p1 = expected_cell_probs(level_grid(0.975, 1));
  REQUIRE(p1.size() == 2);
  CHECK(p1[0] == doctest::Approx(0.975).epsilon(1e-15));
  CHECK(p1[1] == doctest::Approx(0.025).epsilon(1e-15));

  std::vector<double> p2 = expected_cell_probs(level_grid(0.975, 2));
  REQUIRE(p2.size() == 3);
  CHECK(p2[1] == doctest::Approx(0.0125).epsilon(1e-13));
  CHECK(p2[2] == doctest::Approx(0.0125).epsilon(1e-13));

  std::vector<double> p4 = expected_cell_probs(level_grid(0.975, 4));
  REQUIRE(p4.size() == 5);
  for (int j = 1; j <= 4; ++j) CHECK(p4[j] == doctest::Approx(0.00625).epsilon(1e-12));

  for (int n : {1, 2, 4, 8, 16}) {
    std::vector<double> p = expected_cell_probs(level_grid(0.975, n));
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(std::fabs(sum - 1.0) < 1e-15);
  }
}

TEST_CASE("depths agree with a brute-force band count") {
  RngStream rng(7, 0);
  for (int trial = 0; trial < 50; ++trial) {
    long n = 5 + static_cast<long>(rng.uniform() * 45);
    int levels = 1 + static_cast<int>(rng.uniform() * 5);
    Eigen::MatrixXd var(n, levels);
    Eigen::VectorXd losses(n);
    for (long t = 0; t < n; ++t) {
      std::vector<double> row(static_cast<std::size_t>(levels));
      for (double& v : row) v = rng.uniform() * 4.0 - 2.0;
      std::sort(row.begin(), row.end());
      for (int j = 0; j < levels; ++j) var(t, j) = row[static_cast<std::size_t>(j)];
      losses[t] = rng.uniform() * 6.0 - 3.0;
    }
    VarForecastPanel panel = make_panel(var);
    ExceptionSeries x = exceedance_depths(losses, panel);
    CellCounts counts = cell_counts(x, levels);

    // Count losses falling into each half-open band (VaR_j, VaR_{j+1}]
    // directly, with VaR_0 = -inf and VaR_{N+1} = +inf.
    std::vector<long> brute(static_cast<std::size_t>(levels) + 1, 0);
    for (long t = 0; t < n; ++t) {
      int band = 0;
      while (band < levels && losses[t] > var(t, band)) ++band;
      ++brute[static_cast<std::size_t>(band)];
    }
    for (int j = 0; j <= levels; ++j) {
      CHECK(counts.counts[static_cast<std::size_t>(j)] == brute[static_cast<std::size_t>(j)]);
    }
    long total = 0;
    for (long v : counts.counts) total += v;
    CHECK(total == n);
  }
}
