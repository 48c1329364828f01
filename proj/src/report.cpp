#include "esback/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "esback/errors.hpp"

namespace esback {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) lines.push_back(current);
  return lines;
}

bool parse_double(const std::string& field, double& out) {
  if (field.empty()) return false;
  char* end = nullptr;
  out = std::strtod(field.c_str(), &end);
  return end != nullptr && *end == '\0';
}

bool parse_long(const std::string& field, long& out) {
  if (field.empty()) return false;
  char* end = nullptr;
  out = std::strtol(field.c_str(), &end, 10);
  return end != nullptr && *end == '\0';
}

// Shortest-round-trip double formatting so report CSVs re-parse exactly.
std::string format_double(double x) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

int date_year(const std::string& date, long line_no) {
  if (date.size() < 4) throw ParseError("date label too short for a year", line_no);
  int year = 0;
  for (int i = 0; i < 4; ++i) {
    char c = date[static_cast<std::size_t>(i)];
    if (c < '0' || c > '9') throw ParseError("date label must start with a 4-digit year", line_no);
    year = year * 10 + (c - '0');
  }
  return year;
}

}  // namespace

LossSeries parse_loss_csv(const std::string& text, bool negate) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw ParseError("empty file", 1);

  LossSeries series;
  std::vector<double> values;
  std::size_t n_fields = split_fields(lines[0]).size();
  if (n_fields != 1 && n_fields != 2) {
    throw ParseError("expected 1 (loss) or 2 (date,loss) columns", 1);
  }
  series.has_dates = n_fields == 2;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    long line_no = static_cast<long>(i) + 1;
    std::vector<std::string> fields = split_fields(lines[i]);
    if (fields.size() != n_fields) {
      throw ParseError("row has " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(n_fields),
                       line_no);
    }
    double value = 0.0;
    if (!parse_double(fields.back(), value)) {
      throw ParseError("cannot parse loss value '" + fields.back() + "'", line_no);
    }
    if (series.has_dates) series.dates.push_back(fields[0]);
    values.push_back(negate ? -value : value);
  }
  if (values.empty()) throw ParseError("no data rows", static_cast<long>(lines.size()));
  series.losses = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<long>(values.size()));
  return series;
}

Eigen::MatrixXd parse_var_csv(const std::string& text) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw ParseError("empty file", 1);

  std::vector<std::string> header = split_fields(lines[0]);
  std::size_t n_fields = header.size();
  if (n_fields < 1) throw ParseError("empty header", 1);

  // A leading date column is detected from the first data row.
  std::size_t first_col = 0;
  bool checked = false;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    long line_no = static_cast<long>(i) + 1;
    std::vector<std::string> fields = split_fields(lines[i]);
    if (fields.size() != n_fields) {
      throw ParseError("row has " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(n_fields),
                       line_no);
    }
    if (!checked) {
      double probe = 0.0;
      first_col = parse_double(fields[0], probe) ? 0 : 1;
      if (first_col == 1 && n_fields < 2) throw ParseError("no numeric columns", line_no);
      checked = true;
    }
    std::vector<double> row;
    for (std::size_t j = first_col; j < n_fields; ++j) {
      double value = 0.0;
      if (!parse_double(fields[j], value)) {
        throw ParseError("cannot parse VaR value '" + fields[j] + "'", line_no);
      }
      row.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no data rows", static_cast<long>(lines.size()));

  Eigen::MatrixXd var(static_cast<long>(rows.size()), static_cast<long>(rows[0].size()));
  for (long i = 0; i < var.rows(); ++i) {
    for (long j = 0; j < var.cols(); ++j) {
      var(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return var;
}

ReportDocument build_report(const LossSeries& series, const VarForecastPanel& panel,
                            const LevelGrid& grid, TestMethod test, long rows_per_period) {
  if (series.n() != panel.n()) {
    throw LengthMismatch("build_report: losses and VaR panel have different lengths");
  }
  if (panel.n_levels() != grid.n_levels) {
    throw LengthMismatch("build_report: VaR panel and level grid disagree on N");
  }
  if (rows_per_period < 1) throw DomainError("build_report: period length must be >= 1");

  // Period boundaries: blocks of four calendar years when dates are present,
  // otherwise fixed-size blocks of rows.
  struct Block {
    long begin, end;
    std::string label;
  };
  std::vector<Block> blocks;
  const long n_total = series.n();
  if (series.has_dates) {
    long begin = 0;
    int first_year = date_year(series.dates[0], 2);
    for (long i = 1; i <= n_total; ++i) {
      int year = i < n_total ? date_year(series.dates[static_cast<std::size_t>(i)], i + 2)
                             : first_year + 4;
      if (year - first_year >= 4) {
        int last_year = date_year(series.dates[static_cast<std::size_t>(i - 1)], i + 1);
        blocks.push_back({begin, i,
                          std::to_string(first_year) + "-" + std::to_string(last_year)});
        begin = i;
        if (i < n_total) first_year = year;
      }
    }
  } else {
    for (long begin = 0; begin < n_total; begin += rows_per_period) {
      long end = std::min(begin + rows_per_period, n_total);
      blocks.push_back({begin, end,
                        "rows " + std::to_string(begin + 1) + "-" + std::to_string(end)});
    }
  }

  ReportDocument doc;
  doc.alpha = grid.alpha;
  doc.n_levels = grid.n_levels;
  doc.test = to_string(test);
  for (const Block& block : blocks) {
    long len = block.end - block.begin;
    Eigen::VectorXd losses = series.losses.segment(block.begin, len);
    VarForecastPanel sub;
    sub.var = panel.var.middleRows(block.begin, len);
    ExceptionSeries depths = exceedance_depths(losses, sub);
    CellCounts counts = cell_counts(depths, grid.n_levels);

    PeriodRow row;
    row.label = block.label;
    row.n = len;
    row.b = len - counts.counts[0];
    row.binomial_p = binomial_lrt(row.b, len, grid.alpha, Sided::OneSided).p_value;
    row.cell_counts = counts.counts;
    TestResult res = run_multinomial_test(test, counts, grid);
    row.multinomial_p = res.p_value;
    row.colour = light_from_cdf(1.0 - res.p_value).colour;
    doc.rows.push_back(std::move(row));
  }
  return doc;
}

std::string report_document_csv(const ReportDocument& doc) {
  std::ostringstream out;
  out << "period,n,B,binomial_p";
  for (int j = 0; j <= doc.n_levels; ++j) out << ",O_" << j;
  out << ",multinomial_p,colour\n";
  out << "# alpha=" << format_double(doc.alpha) << " levels=" << doc.n_levels
      << " test=" << doc.test << '\n';
  for (const PeriodRow& row : doc.rows) {
    out << row.label << ',' << row.n << ',' << row.b << ',' << format_double(row.binomial_p);
    for (long c : row.cell_counts) out << ',' << c;
    out << ',' << format_double(row.multinomial_p) << ',' << to_string(row.colour) << '\n';
  }
  return out.str();
}

ReportDocument parse_report_csv(const std::string& text) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.size() < 2) throw ParseError("report CSV needs a header and a metadata line", 1);

  std::vector<std::string> header = split_fields(lines[0]);
  if (header.size() < 7 || header[0] != "period") throw ParseError("bad report header", 1);
  int n_levels = static_cast<int>(header.size()) - 7;  // period,n,B,binomial_p + O_j + p,colour

  ReportDocument doc;
  doc.n_levels = n_levels;
  std::istringstream meta(lines[1]);
  std::string hash, alpha_kv, levels_kv, test_kv;
  meta >> hash >> alpha_kv >> levels_kv >> test_kv;
  if (hash != "#" || alpha_kv.rfind("alpha=", 0) != 0 || test_kv.rfind("test=", 0) != 0) {
    throw ParseError("bad report metadata line", 2);
  }
  if (!parse_double(alpha_kv.substr(6), doc.alpha)) throw ParseError("bad alpha", 2);
  doc.test = test_kv.substr(5);

  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    long line_no = static_cast<long>(i) + 1;
    std::vector<std::string> fields = split_fields(lines[i]);
    if (fields.size() != header.size()) throw ParseError("wrong field count", line_no);
    PeriodRow row;
    row.label = fields[0];
    if (!parse_long(fields[1], row.n) || !parse_long(fields[2], row.b) ||
        !parse_double(fields[3], row.binomial_p)) {
      throw ParseError("bad numeric field", line_no);
    }
    for (int j = 0; j <= n_levels; ++j) {
      long c = 0;
      if (!parse_long(fields[static_cast<std::size_t>(4 + j)], c)) {
        throw ParseError("bad cell count", line_no);
      }
      row.cell_counts.push_back(c);
    }
    if (!parse_double(fields[fields.size() - 2], row.multinomial_p)) {
      throw ParseError("bad p-value", line_no);
    }
    const std::string& colour = fields.back();
    if (colour == "green") row.colour = Colour::Green;
    else if (colour == "yellow") row.colour = Colour::Yellow;
    else if (colour == "red") row.colour = Colour::Red;
    else throw ParseError("unknown colour '" + colour + "'", line_no);
    doc.rows.push_back(std::move(row));
  }
  return doc;
}

std::string report_document_table(const ReportDocument& doc) {
  std::ostringstream out;
  out << "alpha = " << format_double(doc.alpha) << ", N = " << doc.n_levels
      << ", test = " << doc.test << '\n';
  out << "period           n     B  binom_p   cells O_0..O_N";
  out << std::string(doc.n_levels >= 4 ? (doc.n_levels - 3) * 5 : 1, ' ')
      << "multinom_p  light\n";
  for (const PeriodRow& row : doc.rows) {
    char head[64];
    std::snprintf(head, sizeof(head), "%-14s %5ld %5ld  %7.4f   ", row.label.c_str(), row.n,
                  row.b, row.binomial_p);
    out << head;
    for (long c : row.cell_counts) {
      char cell[16];
      std::snprintf(cell, sizeof(cell), "%4ld ", c);
      out << cell;
    }
    char tail[48];
    std::snprintf(tail, sizeof(tail), "  %8.5f  %s\n", row.multinomial_p,
                  to_string(row.colour).c_str());
    out << tail;
  }
  return out.str();
}

}  // namespace esback
