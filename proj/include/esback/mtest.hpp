#pragma once

#include <optional>
#include <string>
#include <vector>

#include "esback/levels.hpp"

namespace esback {

enum class TestMethod {
  Pearson,
  Nass,
  MultinomialLrt,
  BinomialScore,
  BinomialWald,
  BinomialLrt,
  Berkowitz,
};

enum class Sided { OneSided, TwoSided };

std::string to_string(TestMethod method);

struct FittedParams {
  double mu = 0.0;
  double sigma = 1.0;
};

struct TestResult {
  double statistic = 0.0;
  double df = 0.0;  // real-valued for the Nass test
  double p_value = 1.0;
  std::optional<FittedParams> fitted;
  TestMethod method = TestMethod::Pearson;
  Sided sided = Sided::TwoSided;
  bool degenerate_fit = false;
};

struct MleSettings {
  double mu_init = 0.0;
  double sigma_init = 1.0;  // sigma is optimized on the log scale
  double loglik_tol = 1e-10;
  int max_iter = 500;
  double sigma_min = 1e-6;
  double sigma_max = 1e6;
};

// Pearson chi-squared statistic against the multinomial null; df = N.
TestResult pearson_test(const CellCounts& counts, const LevelGrid& grid);

// Nass small-cell correction: c * S_N against chi-squared with real df.
TestResult nass_test(const CellCounts& counts, const LevelGrid& grid);

struct MuSigmaFit {
  double mu = 0.0;
  double sigma = 1.0;
  double loglik = 0.0;
  bool degenerate = false;  // optimum pinned at a sigma bound
};

// MLE of (mu, sigma) in the normal-reparametrized cell-probability model.
// Accepts real-valued counts so expected counts can be fitted directly.
MuSigmaFit fit_mu_sigma(const std::vector<double>& counts, const LevelGrid& grid,
                        const MleSettings& settings = MleSettings{});

// Multinomial cell log-likelihood at (mu, sigma) for the given counts.
double mu_sigma_loglik(const std::vector<double>& counts, const LevelGrid& grid, double mu,
                       double sigma);

// Likelihood-ratio test of mu = 0, sigma = 1; df = 2. N = 1 dispatches to the
// two-sided binomial LRT.
TestResult multinomial_lrt(const CellCounts& counts, const LevelGrid& grid,
                           const MleSettings& settings = MleSettings{});

// Binomial tests of the exception count O1 out of n at level alpha.
TestResult binomial_score_test(long o1, long n, double alpha, Sided sided);
TestResult binomial_wald_test(long o1, long n, double alpha, Sided sided);
// Two-sided: asymptotic LRT against chi-squared(1). One-sided: exact binomial
// tail P(Bin(n, 1-alpha) >= O1), the Basel count test.
TestResult binomial_lrt(long o1, long n, double alpha, Sided sided);

// Censored-normal likelihood-ratio test on PIT values, the continuous limit
// of the multinomial LRT.
TestResult berkowitz_lrt(const std::vector<double>& pit_values, double alpha,
                         const MleSettings& settings = MleSettings{});

// Dispatch helper for the three multinomial tests.
TestResult run_multinomial_test(TestMethod method, const CellCounts& counts,
                                const LevelGrid& grid);

}  // namespace esback
