#include "esback/levels.hpp"

#include "esback/errors.hpp"

namespace esback {

LevelGrid level_grid(double alpha, int n_levels) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("level_grid: alpha must lie in (0,1)");
  if (n_levels < 1) throw DomainError("level_grid: N must be >= 1");
  LevelGrid grid;
  grid.alpha = alpha;
  grid.n_levels = n_levels;
  grid.levels.resize(static_cast<std::size_t>(n_levels));
  for (int j = 1; j <= n_levels; ++j) {
    grid.levels[static_cast<std::size_t>(j - 1)] =
        alpha + (static_cast<double>(j - 1) / n_levels) * (1.0 - alpha);
  }
  if (grid.levels.back() >= 1.0) throw DomainError("level_grid: top level must stay below 1");
  return grid;
}

VarForecastPanel make_panel(Eigen::MatrixXd var) {
  if (var.rows() < 1) throw DomainError("make_panel: need at least one row");
  for (long t = 0; t < var.rows(); ++t) {
    for (long j = 1; j < var.cols(); ++j) {
      if (var(t, j) < var(t, j - 1)) {
        throw DomainError("make_panel: forecast row " + std::to_string(t) +
                          " is not nondecreasing across levels");
      }
    }
  }
  return VarForecastPanel{std::move(var)};
}

ExceptionSeries exceedance_depths(const Eigen::VectorXd& losses, const VarForecastPanel& panel) {
  if (losses.size() != panel.n()) {
    throw LengthMismatch("exceedance_depths: losses length " + std::to_string(losses.size()) +
                         " != panel rows " + std::to_string(panel.n()));
  }
  ExceptionSeries depths(static_cast<std::size_t>(losses.size()), 0);
  for (long t = 0; t < losses.size(); ++t) {
    int depth = 0;
    // Rows are nondecreasing, so count levels strictly below the loss.
    for (long j = 0; j < panel.var.cols(); ++j) {
      if (losses[t] > panel.var(t, j)) ++depth;
      else break;
    }
    depths[static_cast<std::size_t>(t)] = depth;
  }
  return depths;
}

CellCounts cell_counts(const ExceptionSeries& series, int n_levels) {
  CellCounts out;
  out.counts.assign(static_cast<std::size_t>(n_levels) + 1, 0);
  for (int x : series) {
    if (x < 0 || x > n_levels) {
      throw RangeError("cell_counts: depth " + std::to_string(x) + " outside [0," +
                       std::to_string(n_levels) + "]");
    }
    ++out.counts[static_cast<std::size_t>(x)];
  }
  out.n = static_cast<long>(series.size());
  return out;
}

std::vector<double> expected_cell_probs(const LevelGrid& grid) {
  std::vector<double> probs(static_cast<std::size_t>(grid.n_levels) + 1);
  for (int j = 0; j <= grid.n_levels; ++j) {
    probs[static_cast<std::size_t>(j)] =
        grid.level_with_sentinels(j + 1) - grid.level_with_sentinels(j);
  }
  return probs;
}

}  // namespace esback
