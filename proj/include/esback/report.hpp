#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "esback/levels.hpp"
#include "esback/mtest.hpp"
#include "esback/traffic.hpp"

namespace esback {

// A loss series read from CSV. Dates, when present, are opaque labels whose
// first four characters are taken as the calendar year for period splitting.
struct LossSeries {
  Eigen::VectorXd losses;
  std::vector<std::string> dates;
  bool has_dates = false;

  long n() const { return losses.size(); }
};

// Parses a CSV with a required header row and either one numeric column of
// losses or a leading date column followed by the losses. With `negate` the
// column holds returns and is sign-flipped into losses.
LossSeries parse_loss_csv(const std::string& text, bool negate = false);

// Parses a CSV of VaR forecasts: a required header row, then one numeric
// column per level in ascending level order. A leading non-numeric column is
// treated as a date label and skipped.
Eigen::MatrixXd parse_var_csv(const std::string& text);

// One backtested sub-period of a report.
struct PeriodRow {
  std::string label;
  long n = 0;
  long b = 0;                     // exceptions of the base VaR level
  double binomial_p = 1.0;        // one-sided exact binomial tail probability
  std::vector<long> cell_counts;  // O_0..O_N
  double multinomial_p = 1.0;
  Colour colour = Colour::Green;

  bool operator==(const PeriodRow&) const = default;
};

struct ReportDocument {
  double alpha = 0.975;
  int n_levels = 0;
  std::string test;  // multinomial test used for the p-value and colour
  std::vector<PeriodRow> rows;

  bool operator==(const ReportDocument&) const = default;
};

// Splits the series into contiguous periods (blocks of four calendar years
// when dates are present, otherwise blocks of `rows_per_period` rows), runs
// the multinomial test per period and attaches a traffic-light colour.
ReportDocument build_report(const LossSeries& series, const VarForecastPanel& panel,
                            const LevelGrid& grid, TestMethod test,
                            long rows_per_period = 1000);

// Lossless CSV round trip: parse_report_csv(report_csv(doc)) == doc.
std::string report_document_csv(const ReportDocument& doc);
ReportDocument parse_report_csv(const std::string& text);

// Human-readable table.
std::string report_document_table(const ReportDocument& doc);

}  // namespace esback
