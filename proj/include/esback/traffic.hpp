#pragma once

#include <string>
#include <vector>

#include "esback/mtest.hpp"

namespace esback {

enum class Colour { Green, Yellow, Red };

std::string to_string(Colour colour);

struct TrafficThresholds {
  double yellow = 0.95;
  double red = 0.9999;
};

struct TrafficLight {
  Colour colour = Colour::Green;
  double cdf_value = 0.0;
  TrafficThresholds thresholds;
};

// Green below 0.95, yellow on [0.95, 0.9999), red at and above 0.9999.
TrafficLight light_from_cdf(double cdf_value, TrafficThresholds thresholds = {});

// Colour from the chi-squared cdf of a multinomial test statistic.
TrafficLight light_from_statistic(double statistic, double df, TrafficThresholds thresholds = {});

// Basel count rule: exact binomial cdf of B exceptions of the 99% VaR over a
// 250-day year, against the same thresholds.
TrafficLight basel_light(long exceptions, long n = 250, double level = 0.99,
                         TrafficThresholds thresholds = {});

struct TrinomialGridCell {
  long o1 = 0;
  long o2 = 0;
  Colour colour = Colour::Green;
};

// Colour of the chosen test over all feasible (O1, O2) with O1 + O2 <= n at
// levels {alpha, (1+alpha)/2}.
std::vector<TrinomialGridCell> trinomial_light_grid(long n, double alpha,
                                                    TestMethod test = TestMethod::Nass);

// CSV export (columns O1, O2, colour) for plotting.
std::string trinomial_grid_csv(const std::vector<TrinomialGridCell>& grid);

}  // namespace esback
