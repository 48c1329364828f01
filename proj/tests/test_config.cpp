#include "doctest.h"

#include <string>
#include <variant>

#include "esback/config.hpp"
#include "esback/errors.hpp"

using namespace esback;

TEST_CASE("size-power config parsing") {
  ExperimentConfig cfg = parse_experiment_config(
      "# comment line\n"
      "kind = size_power\n"
      "model = t3\n"
      "reference = normal\n"
      "levels = 1, 2, 4\n"
      "sample_sizes = 250, 1000\n"
      "tests = pearson, nass, lrt, berkowitz\n"
      "replications = 123\n"
      "kappa = 0.05\n"
      "seed = 9\n"
      "threads = 2\n");
  const auto* sp = std::get_if<SizePowerConfig>(&cfg);
  REQUIRE(sp != nullptr);
  CHECK(sp->true_label == "t3");
  CHECK(sp->true_model.family() == Family::StudentT);
  CHECK(sp->true_model.nu() == doctest::Approx(3.0));
  CHECK(sp->level_counts == std::vector<int>{1, 2, 4});
  CHECK(sp->sample_sizes == std::vector<long>{250, 1000});
  CHECK(sp->replications == 123);
  CHECK(sp->master_seed == 9);
  CHECK(sp->threads == 2);
  REQUIRE(sp->tests.size() == 4);
  CHECK(sp->tests[3] == TestMethod::Berkowitz);
}

TEST_CASE("static config parsing with defaults") {
  ExperimentConfig cfg = parse_experiment_config(
      "kind = static\n"
      "model = st3\n"
      "replications = 7\n");
  const auto* st = std::get_if<StaticBacktestConfig>(&cfg);
  REQUIRE(st != nullptr);
  CHECK(st->model.family() == Family::SkewedT);
  CHECK(st->model.gamma() == doctest::Approx(1.2));  // default skewness
  CHECK(st->n == 1000);
  CHECK(st->window == 500);
  CHECK(st->stride == 10);
  CHECK(st->replications == 7);
  CHECK(st->forecasters.size() == 4);
}

TEST_CASE("dynamic config parsing") {
  ExperimentConfig cfg = parse_experiment_config(
      "kind = dynamic\n"
      "alpha1 = 0.05\n"
      "beta1 = 0.9\n"
      "nu = 6\n"
      "window = 1000\n"
      "forecasters = oracle, garch.t, hs\n"
      "replications = 3\n");
  const auto* dy = std::get_if<DynamicBacktestConfig>(&cfg);
  REQUIRE(dy != nullptr);
  CHECK(dy->dgp.alpha1 == doctest::Approx(0.05));
  CHECK(dy->dgp.nu == doctest::Approx(6.0));
  CHECK(dy->window == 1000);
  REQUIRE(dy->forecasters.size() == 3);
  CHECK(dy->forecasters[1] == ForecastMethod::GarchT);
}

TEST_CASE("config errors name the offending field") {
  CHECK_THROWS_AS(parse_experiment_config("model = t3\n"), ParseError);  // kind missing
  CHECK_THROWS_AS(parse_experiment_config("kind = banana\n"), ParseError);

  try {
    parse_experiment_config("kind = size_power\nmodel = t1.5\n");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("model") != std::string::npos);
  }

  try {
    parse_experiment_config("kind = static\nforecasters = oracle, clairvoyant\n");
    CHECK(false);
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("clairvoyant") != std::string::npos);
    // The error lists the valid names.
    CHECK(msg.find("oracle") != std::string::npos);
    CHECK(msg.find("industry") != std::string::npos);
  }

  try {
    parse_experiment_config("kind = size_power\nbogus_key = 1\n");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }

  // Duplicate keys are rejected with a line number.
  try {
    parse_experiment_config("kind = size_power\nseed = 1\nseed = 2\n");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line_number == 3);
  }

  CHECK_THROWS_AS(parse_experiment_config("kind = size_power\nreplications = 0\n"), ParseError);
  CHECK_THROWS_AS(parse_experiment_config("kind = size_power\nnot a key value line\n"),
                  ParseError);
}

TEST_CASE("model name parsing") {
  CHECK(parse_model("normal").family() == Family::Normal);
  LossModel t5 = parse_model("t5");
  CHECK(t5.family() == Family::StudentT);
  CHECK(t5.nu() == doctest::Approx(5.0));
  LossModel t = parse_model("t5.06");
  CHECK(t.nu() == doctest::Approx(5.06));
  LossModel st = parse_model("st3");
  CHECK(st.family() == Family::SkewedT);
  CHECK(st.gamma() == doctest::Approx(1.2));
  LossModel st2 = parse_model("st4:0.8");
  CHECK(st2.nu() == doctest::Approx(4.0));
  CHECK(st2.gamma() == doctest::Approx(0.8));
  CHECK_THROWS_AS(parse_model("cauchy"), ParseError);
  CHECK_THROWS_AS(parse_model("t2"), ParseError);  // needs nu > 2
}

TEST_CASE("test name parsing") {
  CHECK(parse_test_method("pearson") == TestMethod::Pearson);
  CHECK(parse_test_method("nass") == TestMethod::Nass);
  CHECK(parse_test_method("lrt") == TestMethod::MultinomialLrt);
  CHECK(parse_test_method("binomial_score") == TestMethod::BinomialScore);
  CHECK(parse_test_method("binomial_wald") == TestMethod::BinomialWald);
  CHECK(parse_test_method("binomial_lrt") == TestMethod::BinomialLrt);
  CHECK(parse_test_method("berkowitz") == TestMethod::Berkowitz);
  CHECK(!parse_test_method("anderson").has_value());
}

TEST_CASE("run_experiment dispatches on the config kind") {
  ExperimentConfig cfg = parse_experiment_config(
      "kind = size_power\n"
      "levels = 1\n"
      "sample_sizes = 250\n"
      "tests = pearson\n"
      "replications = 10\n");
  ExperimentReport report = run_experiment(cfg);
  CHECK(report.kind == "size_power");
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].replications == 10);
}
