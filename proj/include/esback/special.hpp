#pragma once

// Scalar special functions used throughout the test library: the standard
// normal cdf/quantile pair, regularized incomplete gamma and beta functions,
// chi-squared with real-valued degrees of freedom, Student t, and exact
// binomial tail probabilities.

namespace esback {

struct SpecialFnTolerances {
  double abs_tol = 1e-12;   // normal cdf/quantile
  double rel_tol = 1e-10;   // incomplete gamma/beta
  int max_iter = 200;
};

double std_normal_pdf(double x);
double std_normal_cdf(double x);
// Inverse of std_normal_cdf on (0,1). Throws DomainError outside (0,1).
double std_normal_quantile(double p);

// Regularized lower incomplete gamma P(a,x), a > 0, x >= 0.
double gamma_p(double a, double x);
// Regularized incomplete beta I_x(a,b).
double incomplete_beta(double a, double b, double x);

// Chi-squared cdf/quantile with real-valued degrees of freedom df > 0.
double chi2_cdf(double x, double df);
double chi2_quantile(double p, double df);

// Student t with nu > 0 degrees of freedom (unscaled, variance nu/(nu-2)).
double student_t_pdf(double x, double nu);
double student_t_cdf(double x, double nu);
double student_t_quantile(double p, double nu);

// Binomial(n, p) probabilities, exact via the incomplete beta function.
double binomial_log_pmf(long k, long n, double p);
double binomial_cdf(long k, long n, double p);       // P(X <= k)
double binomial_tail_geq(long k, long n, double p);  // P(X >= k)

}  // namespace esback
