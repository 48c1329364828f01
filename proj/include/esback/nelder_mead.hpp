#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace esback {

struct NelderMeadResult {
  std::vector<double> x;
  double fmin = 0.0;
  int iterations = 0;
  bool converged = false;
  // Final simplex diagnostics: function spread and diameter. A small spread
  // with a large diameter signals a flat (poorly identified) direction.
  double f_spread = 0.0;
  double x_diameter = 0.0;
};

// Classic Nelder-Mead simplex minimizer for low-dimensional smooth problems.
// Terminates when the function spread across the simplex falls below f_tol
// and the simplex diameter falls below x_tol.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> start, double step = 0.1,
                                    double f_tol = 1e-10, double x_tol = 1e-8,
                                    int max_iter = 500) {
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  const std::size_t dim = start.size();

  std::vector<std::vector<double>> pts(dim + 1, start);
  for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] += step;
  std::vector<double> fv(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) fv[i] = f(pts[i]);

  NelderMeadResult res;
  int iter = 0;
  std::vector<std::size_t> order(dim + 1);
  for (; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });

    double fspread = fv[order[dim]] - fv[order[0]];
    double diam = 0.0;
    for (std::size_t k = 1; k <= dim; ++k) {
      for (std::size_t i = 0; i < dim; ++i) {
        diam = std::max(diam, std::fabs(pts[order[k]][i] - pts[order[0]][i]));
      }
    }
    res.f_spread = fspread;
    res.x_diameter = diam;
    if (fspread < f_tol && diam < x_tol) {
      res.converged = true;
      break;
    }

    // Centroid of all but the worst vertex.
    std::vector<double> cen(dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k) {
      for (std::size_t i = 0; i < dim; ++i) cen[i] += pts[order[k]][i];
    }
    for (std::size_t i = 0; i < dim; ++i) cen[i] /= static_cast<double>(dim);

    std::size_t worst = order[dim];
    auto blend = [&](double t) {
      std::vector<double> p(dim);
      for (std::size_t i = 0; i < dim; ++i) p[i] = cen[i] + t * (cen[i] - pts[worst][i]);
      return p;
    };

    std::vector<double> xr = blend(alpha);
    double fr = f(xr);
    if (fr < fv[order[0]]) {
      std::vector<double> xe = blend(gamma);
      double fe = f(xe);
      if (fe < fr) { pts[worst] = std::move(xe); fv[worst] = fe; }
      else { pts[worst] = std::move(xr); fv[worst] = fr; }
    } else if (fr < fv[order[dim - 1]]) {
      pts[worst] = std::move(xr);
      fv[worst] = fr;
    } else {
      std::vector<double> xc = blend(fr < fv[worst] ? rho : -rho);
      double fc = f(xc);
      if (fc < std::min(fr, fv[worst])) {
        pts[worst] = std::move(xc);
        fv[worst] = fc;
      } else {
        // Shrink towards the best vertex.
        for (std::size_t k = 1; k <= dim; ++k) {
          std::size_t j = order[k];
          for (std::size_t i = 0; i < dim; ++i) {
            pts[j][i] = pts[order[0]][i] + sigma * (pts[j][i] - pts[order[0]][i]);
          }
          fv[j] = f(pts[j]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= dim; ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  res.x = pts[best];
  res.fmin = fv[best];
  res.iterations = iter;
  return res;
}

}  // namespace esback
