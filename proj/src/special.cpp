#include "esback/special.hpp"

#include <cmath>
#include <limits>

#include "esback/errors.hpp"

namespace esback {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Acklam's rational approximation to the normal quantile, |error| < 1.15e-9,
// refined below by one Halley step to near machine precision.
double norm_quantile_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Continued fraction for the upper incomplete gamma Q(a,x), modified Lentz.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  const double eps = 1e-15;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Series expansion for P(a,x), convergent for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for the incomplete beta function, modified Lentz.
double beta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double eps = 1e-15;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) {
  if (!std::isfinite(x)) {
    if (std::isnan(x)) throw DomainError("std_normal_cdf: NaN input");
    return x > 0 ? 1.0 : 0.0;
  }
  return 0.5 * std::erfc(-x / kSqrt2);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("std_normal_quantile: p must lie in (0,1)");
  double x = norm_quantile_approx(p);
  // One Halley step against the cdf.
  double e = std_normal_cdf(x) - p;
  double u = e / std_normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double gamma_p(double a, double x) {
  if (a <= 0.0) throw DomainError("gamma_p: a must be positive");
  if (x < 0.0) throw DomainError("gamma_p: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw DomainError("incomplete_beta: a, b must be positive");
  if (x < 0.0 || x > 1.0) throw DomainError("incomplete_beta: x must lie in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double chi2_cdf(double x, double df) {
  if (df <= 0.0) throw DomainError("chi2_cdf: df must be positive");
  if (x < 0.0) throw DomainError("chi2_cdf: x must be nonnegative");
  return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_quantile(double p, double df) {
  if (df <= 0.0) throw DomainError("chi2_quantile: df must be positive");
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("chi2_quantile: p must lie in [0,1)");
  if (p == 0.0) return 0.0;
  // Bracketed Newton on the cdf; the Wilson-Hilferty start is refined to the
  // relative tolerance of the incomplete gamma evaluation.
  double z = std_normal_quantile(p);
  double t = 1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df));
  double x = df * t * t * t;
  if (x <= 0.0) x = 0.5 * df;
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    double f = chi2_cdf(x, df) - p;
    if (f > 0.0) hi = x; else lo = x;
    double dens = std::exp((0.5 * df - 1.0) * std::log(x) - 0.5 * x -
                           std::lgamma(0.5 * df) - 0.5 * df * std::log(2.0) * 1.0);
    double step = dens > 0.0 ? f / dens : 0.0;
    double xn = x - step;
    if (!(xn > lo && (xn < hi || !std::isfinite(hi)))) {
      xn = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * x + 1.0;
    }
    if (std::fabs(xn - x) <= 1e-12 * (1.0 + std::fabs(x))) { x = xn; break; }
    x = xn;
  }
  return x;
}

double student_t_pdf(double x, double nu) {
  if (nu <= 0.0) throw DomainError("student_t_pdf: nu must be positive");
  double ln = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
              0.5 * std::log(nu * M_PI) -
              0.5 * (nu + 1.0) * std::log1p(x * x / nu);
  return std::exp(ln);
}

double student_t_cdf(double x, double nu) {
  if (nu <= 0.0) throw DomainError("student_t_cdf: nu must be positive");
  if (x == 0.0) return 0.5;
  double w = incomplete_beta(0.5 * nu, 0.5, nu / (nu + x * x));
  return x > 0.0 ? 1.0 - 0.5 * w : 0.5 * w;
}

double student_t_quantile(double p, double nu) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("student_t_quantile: p must lie in (0,1)");
  if (nu <= 0.0) throw DomainError("student_t_quantile: nu must be positive");
  if (p == 0.5) return 0.0;
  // Cornish-Fisher start from the normal quantile, then bracketed Newton.
  double z = std_normal_quantile(p);
  double g1 = (z * z * z + z) / (4.0 * nu);
  double g2 = (5.0 * z * z * z * z * z + 16.0 * z * z * z + 3.0 * z) / (96.0 * nu * nu);
  double x = z + g1 + g2;
  // Establish a bracket around the root.
  double lo, hi;
  if (student_t_cdf(x, nu) < p) {
    lo = x;
    hi = std::fabs(x) + 1.0;
    while (student_t_cdf(hi, nu) < p) hi *= 2.0;
  } else {
    hi = x;
    lo = -(std::fabs(x) + 1.0);
    while (student_t_cdf(lo, nu) > p) lo *= 2.0;
  }
  for (int it = 0; it < 100; ++it) {
    double f = student_t_cdf(x, nu) - p;
    if (f > 0.0) hi = x; else lo = x;
    double dens = student_t_pdf(x, nu);
    double xn = dens > 0.0 ? x - f / dens : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::fabs(xn - x) <= 1e-13 * (1.0 + std::fabs(x))) { x = xn; break; }
    x = xn;
  }
  return x;
}

double binomial_log_pmf(long k, long n, double p) {
  if (k < 0 || n < 0 || k > n) throw DomainError("binomial_log_pmf: need 0 <= k <= n");
  if (p < 0.0 || p > 1.0) throw DomainError("binomial_log_pmf: p must lie in [0,1]");
  if (p == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (p == 1.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
         k * std::log(p) + (n - k) * std::log1p(-p);
}

double binomial_cdf(long k, long n, double p) {
  if (n < 0) throw DomainError("binomial_cdf: n must be nonnegative");
  if (p < 0.0 || p > 1.0) throw DomainError("binomial_cdf: p must lie in [0,1]");
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  // P(X <= k) = I_{1-p}(n-k, k+1)
  return incomplete_beta(static_cast<double>(n - k), static_cast<double>(k + 1), 1.0 - p);
}

double binomial_tail_geq(long k, long n, double p) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  return 1.0 - binomial_cdf(k - 1, n, p);
}

}  // namespace esback
