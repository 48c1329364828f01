// esback: multi-level VaR exception backtesting from the command line.
//
// Exit codes: 0 success, 2 input/parse failure, 3 domain/contract violation,
// 4 convergence failure of an iterative fit.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "esback/config.hpp"
#include "esback/errors.hpp"
#include "esback/report.hpp"
#include "esback/sim.hpp"
#include "esback/traffic.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitDomain = 3;
constexpr int kExitConvergence = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw esback::ParseError("cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw esback::ParseError("cannot write file '" + path + "'");
  out << content;
}

struct TestOptions {
  std::string losses_path;
  std::string var_path;
  double alpha = 0.975;
  std::string test = "nass";
  bool returns = false;
  long period_rows = 1000;
  double kappa = 0.05;
  std::string csv_out;
};

int cmd_test(const TestOptions& opt) {
  auto method = esback::parse_test_method(opt.test);
  if (!method || (*method != esback::TestMethod::Pearson &&
                  *method != esback::TestMethod::Nass &&
                  *method != esback::TestMethod::MultinomialLrt)) {
    throw esback::ParseError("--test must be one of pearson, nass, lrt");
  }
  esback::LossSeries series = esback::parse_loss_csv(read_file(opt.losses_path), opt.returns);
  esback::VarForecastPanel panel =
      esback::make_panel(esback::parse_var_csv(read_file(opt.var_path)));
  esback::LevelGrid grid = esback::level_grid(opt.alpha, panel.n_levels());

  esback::ReportDocument doc =
      esback::build_report(series, panel, grid, *method, opt.period_rows);
  std::cout << esback::report_document_table(doc);
  if (!opt.csv_out.empty()) {
    write_file(opt.csv_out, esback::report_document_csv(doc));
    std::cout << "report CSV written to " << opt.csv_out << "\n";
  }
  return 0;
}

struct SimulateOptions {
  std::string config_path;
  std::string out_prefix;
  long seed_override = -1;
  int threads_override = 0;
};

int cmd_simulate(const SimulateOptions& opt) {
  esback::ExperimentConfig config = esback::parse_experiment_config(read_file(opt.config_path));
  std::visit(
      [&](auto& c) {
        if (opt.seed_override >= 0) c.master_seed = static_cast<std::uint64_t>(opt.seed_override);
        if (opt.threads_override > 0) c.threads = opt.threads_override;
      },
      config);
  esback::ExperimentReport report = esback::run_experiment(config);
  std::string csv = esback::report_csv(report);
  std::string summary = esback::report_summary(report);
  if (opt.out_prefix.empty()) {
    std::cout << csv << "\n" << summary;
  } else {
    write_file(opt.out_prefix + ".csv", csv);
    write_file(opt.out_prefix + ".txt", summary);
    std::cout << "wrote " << opt.out_prefix << ".csv and " << opt.out_prefix << ".txt\n";
  }
  return 0;
}

struct TrafficOptions {
  long b = -1;
  long n = 250;
  double level = 0.99;
  double statistic = -1.0;
  double df = 0.0;
};

int cmd_traffic(const TrafficOptions& opt) {
  esback::TrafficLight light;
  if (opt.b >= 0) {
    light = esback::basel_light(opt.b, opt.n, opt.level);
    std::cout << "binomial cdf of B=" << opt.b << " out of n=" << opt.n
              << " at level " << opt.level << ": " << light.cdf_value << "\n";
  } else if (opt.statistic >= 0.0) {
    light = esback::light_from_statistic(opt.statistic, opt.df);
    std::cout << "chi-squared cdf of statistic " << opt.statistic << " with df=" << opt.df
              << ": " << light.cdf_value << "\n";
  } else {
    throw esback::ParseError("traffic needs either --b or --statistic");
  }
  std::cout << "thresholds: yellow >= " << light.thresholds.yellow
            << ", red >= " << light.thresholds.red << "\n"
            << "light: " << esback::to_string(light.colour) << "\n";
  return 0;
}

struct GridOptions {
  long n = 250;
  double alpha = 0.975;
  std::string test = "nass";
  std::string out;
};

int cmd_grid(const GridOptions& opt) {
  auto method = esback::parse_test_method(opt.test);
  if (!method) throw esback::ParseError("--test must name a known test");
  auto cells = esback::trinomial_light_grid(opt.n, opt.alpha, *method);
  std::string csv = esback::trinomial_grid_csv(cells);
  if (opt.out.empty()) {
    std::cout << csv;
  } else {
    write_file(opt.out, csv);
    std::cout << "wrote " << opt.out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-level VaR exception backtesting for trading-book risk models"};
  app.require_subcommand(1);

  TestOptions test_opt;
  CLI::App* test = app.add_subcommand("test", "Backtest a loss series against VaR forecasts");
  test->add_option("--losses", test_opt.losses_path, "CSV of losses (optionally date,loss)")
      ->required();
  test->add_option("--var", test_opt.var_path, "CSV of VaR forecasts, one column per level")
      ->required();
  test->add_option("--alpha", test_opt.alpha, "Base VaR level (default 0.975)");
  test->add_option("--tests", test_opt.test, "Multinomial test: pearson, nass or lrt");
  test->add_flag("--returns", test_opt.returns, "Input column holds returns; negate into losses");
  test->add_option("--period-rows", test_opt.period_rows,
                   "Rows per report period when no dates are present (default 1000)");
  test->add_option("--kappa", test_opt.kappa, "Test level (default 0.05)");
  test->add_option("--csv", test_opt.csv_out, "Also write the machine-readable report CSV here");

  SimulateOptions sim_opt;
  CLI::App* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
  simulate->add_option("--config", sim_opt.config_path, "Experiment configuration file")
      ->required();
  simulate->add_option("--out", sim_opt.out_prefix, "Output prefix for .csv and .txt reports");
  simulate->add_option("--seed", sim_opt.seed_override, "Override the master seed");
  simulate->add_option("--threads", sim_opt.threads_override,
                       "Worker threads (never changes the results)");

  TrafficOptions traffic_opt;
  CLI::App* traffic = app.add_subcommand("traffic", "Traffic-light classification");
  traffic->add_option("--b", traffic_opt.b, "Exception count for the binomial light");
  traffic->add_option("--n", traffic_opt.n, "Sample size (default 250)");
  traffic->add_option("--level", traffic_opt.level, "VaR level for the binomial light");
  traffic->add_option("--statistic", traffic_opt.statistic, "Chi-squared statistic");
  traffic->add_option("--df", traffic_opt.df, "Degrees of freedom for --statistic");

  GridOptions grid_opt;
  CLI::App* grid = app.add_subcommand("grid", "Trinomial (N=2) traffic-light grid as CSV");
  grid->add_option("--n", grid_opt.n, "Sample size (default 250)");
  grid->add_option("--alpha", grid_opt.alpha, "Base VaR level (default 0.975)");
  grid->add_option("--tests", grid_opt.test, "Test used for the colour (default nass)");
  grid->add_option("--out", grid_opt.out, "Write the grid CSV to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (test->parsed()) return cmd_test(test_opt);
    if (simulate->parsed()) return cmd_simulate(sim_opt);
    if (traffic->parsed()) return cmd_traffic(traffic_opt);
    return cmd_grid(grid_opt);
  } catch (const esback::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const esback::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}
