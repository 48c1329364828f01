#include "esback/traffic.hpp"

#include <sstream>

#include "esback/errors.hpp"
#include "esback/special.hpp"

namespace esback {

std::string to_string(Colour colour) {
  switch (colour) {
    case Colour::Green: return "green";
    case Colour::Yellow: return "yellow";
    case Colour::Red: return "red";
  }
  return "unknown";
}

TrafficLight light_from_cdf(double cdf_value, TrafficThresholds thresholds) {
  if (!(cdf_value >= 0.0 && cdf_value <= 1.0)) {
    throw DomainError("light_from_cdf: cdf value outside [0,1]");
  }
  TrafficLight light;
  light.cdf_value = cdf_value;
  light.thresholds = thresholds;
  if (cdf_value >= thresholds.red) light.colour = Colour::Red;
  else if (cdf_value >= thresholds.yellow) light.colour = Colour::Yellow;
  else light.colour = Colour::Green;
  return light;
}

TrafficLight light_from_statistic(double statistic, double df, TrafficThresholds thresholds) {
  if (statistic < 0.0) throw DomainError("light_from_statistic: negative statistic");
  if (df <= 0.0) throw DomainError("light_from_statistic: df must be positive");
  return light_from_cdf(chi2_cdf(statistic, df), thresholds);
}

TrafficLight basel_light(long exceptions, long n, double level, TrafficThresholds thresholds) {
  if (exceptions < 0 || exceptions > n) throw DomainError("basel_light: B outside [0,n]");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("basel_light: bad level");
  return light_from_cdf(binomial_cdf(exceptions, n, 1.0 - level), thresholds);
}

std::vector<TrinomialGridCell> trinomial_light_grid(long n, double alpha, TestMethod test) {
  if (n < 1) throw DomainError("trinomial_light_grid: n must be >= 1");
  LevelGrid grid = level_grid(alpha, 2);
  std::vector<TrinomialGridCell> cells;
  for (long o1 = 0; o1 <= n; ++o1) {
    for (long o2 = 0; o1 + o2 <= n; ++o2) {
      CellCounts counts;
      counts.counts = {n - o1 - o2, o1, o2};
      counts.n = n;
      TestResult res = run_multinomial_test(test, counts, grid);
      TrinomialGridCell cell;
      cell.o1 = o1;
      cell.o2 = o2;
      cell.colour = light_from_cdf(1.0 - res.p_value).colour;
      cells.push_back(cell);
    }
  }
  return cells;
}

std::string trinomial_grid_csv(const std::vector<TrinomialGridCell>& grid) {
  std::ostringstream out;
  out << "O1,O2,colour\n";
  for (const auto& cell : grid) {
    out << cell.o1 << ',' << cell.o2 << ',' << to_string(cell.colour) << '\n';
  }
  return out.str();
}

}  // namespace esback
