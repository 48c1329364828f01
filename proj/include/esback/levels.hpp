#pragma once

#include <Eigen/Dense>
#include <vector>

namespace esback {

// Ordered VaR probability levels alpha_1..alpha_N with the implicit
// sentinels alpha_0 = 0 and alpha_{N+1} = 1.
struct LevelGrid {
  double alpha = 0.0;
  int n_levels = 0;
  std::vector<double> levels;

  // alpha_j for j in 0..N+1 including the sentinels.
  double level_with_sentinels(int j) const {
    if (j <= 0) return 0.0;
    if (j > n_levels) return 1.0;
    return levels[static_cast<std::size_t>(j - 1)];
  }
};

// alpha_j = alpha + ((j-1)/N)(1-alpha), j = 1..N.
LevelGrid level_grid(double alpha, int n_levels);

// One row per time point, one column per level; rows must be nondecreasing
// across columns (quantile monotonicity). Non-monotone rows are rejected.
struct VarForecastPanel {
  Eigen::MatrixXd var;  // n x N

  long n() const { return var.rows(); }
  int n_levels() const { return static_cast<int>(var.cols()); }
};

VarForecastPanel make_panel(Eigen::MatrixXd var);

// Per-time exceedance depth X_t in {0..N}: the number of levels whose VaR
// forecast is strictly exceeded by the loss.
using ExceptionSeries = std::vector<int>;

ExceptionSeries exceedance_depths(const Eigen::VectorXd& losses, const VarForecastPanel& panel);

struct CellCounts {
  std::vector<long> counts;  // O_0..O_N
  long n = 0;

  int n_levels() const { return static_cast<int>(counts.size()) - 1; }
};

CellCounts cell_counts(const ExceptionSeries& series, int n_levels);

// p_j = alpha_{j+1} - alpha_j for j = 0..N; sums to 1.
std::vector<double> expected_cell_probs(const LevelGrid& grid);

}  // namespace esback
