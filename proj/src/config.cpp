#include "esback/config.hpp"

#include <cstdlib>
#include <map>
#include <sstream>

#include "esback/errors.hpp"

namespace esback {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string current;
  for (char c : value) {
    if (c == ',') {
      items.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  items.push_back(trim(current));
  return items;
}

// Key/value store remembering the line of each key for error messages.
struct KeyValues {
  std::map<std::string, std::pair<std::string, long>> entries;
  std::map<std::string, bool> used;

  bool has(const std::string& key) const { return entries.count(key) > 0; }

  const std::pair<std::string, long>& get(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) throw ParseError("missing required field '" + key + "'", 0);
    used[key] = true;
    return it->second;
  }

  double get_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& [value, line] = get(key);
    char* end = nullptr;
    double x = std::strtod(value.c_str(), &end);
    if (end == nullptr || *end != '\0') {
      throw ParseError("field '" + key + "': cannot parse number '" + value + "'", line);
    }
    return x;
  }

  long get_long(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    const auto& [value, line] = get(key);
    char* end = nullptr;
    long x = std::strtol(value.c_str(), &end, 10);
    if (end == nullptr || *end != '\0') {
      throw ParseError("field '" + key + "': cannot parse integer '" + value + "'", line);
    }
    return x;
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    return get(key).first;
  }

  void check_all_used() const {
    for (const auto& [key, entry] : entries) {
      if (used.count(key) == 0) {
        throw ParseError("unknown field '" + key + "'", entry.second);
      }
    }
  }
};

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected 'key = value', got '" + stripped + "'", line_no);
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (kv.entries.count(key) > 0) throw ParseError("duplicate field '" + key + "'", line_no);
    kv.entries[key] = {value, line_no};
  }
  return kv;
}

std::vector<int> get_levels(KeyValues& kv, std::vector<int> fallback) {
  if (!kv.has("levels")) return fallback;
  const auto& [value, line] = kv.get("levels");
  std::vector<int> levels;
  for (const std::string& item : split_list(value)) {
    char* end = nullptr;
    long n = std::strtol(item.c_str(), &end, 10);
    if (end == nullptr || *end != '\0' || n < 1) {
      throw ParseError("field 'levels': bad level count '" + item + "'", line);
    }
    levels.push_back(static_cast<int>(n));
  }
  return levels;
}

std::vector<TestMethod> get_tests(KeyValues& kv, std::vector<TestMethod> fallback) {
  if (!kv.has("tests")) return fallback;
  const auto& [value, line] = kv.get("tests");
  std::vector<TestMethod> tests;
  for (const std::string& item : split_list(value)) {
    auto parsed = parse_test_method(item);
    if (!parsed) {
      throw ParseError("field 'tests': unknown test '" + item +
                           "' (valid: pearson, nass, lrt, binomial_score, binomial_wald, "
                           "binomial_lrt, berkowitz)",
                       line);
    }
    tests.push_back(*parsed);
  }
  return tests;
}

void fill_common(KeyValues& kv, double& alpha, long& replications, double& kappa,
                 std::uint64_t& seed, int& threads) {
  alpha = kv.get_double("alpha", alpha);
  replications = kv.get_long("replications", replications);
  kappa = kv.get_double("kappa", kappa);
  seed = static_cast<std::uint64_t>(kv.get_long("seed", static_cast<long>(seed)));
  threads = static_cast<int>(kv.get_long("threads", threads));
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParseError("field 'alpha': must lie in (0,1)", 0);
  if (!(kappa > 0.0 && kappa < 1.0)) throw ParseError("field 'kappa': must lie in (0,1)", 0);
  if (replications < 1) throw ParseError("field 'replications': must be >= 1", 0);
  if (threads < 1) throw ParseError("field 'threads': must be >= 1", 0);
}

}  // namespace

LossModel parse_model(const std::string& name) {
  if (name == "normal") return LossModel::normal();
  auto parse_nu = [&](const std::string& body, double& nu, double& gamma) {
    std::size_t colon = body.find(':');
    std::string nu_part = colon == std::string::npos ? body : body.substr(0, colon);
    char* end = nullptr;
    nu = std::strtod(nu_part.c_str(), &end);
    if (end == nullptr || *end != '\0' || nu <= 2.0) return false;
    if (colon != std::string::npos) {
      gamma = std::strtod(body.c_str() + colon + 1, &end);
      if (end == nullptr || *end != '\0' || gamma <= 0.0) return false;
    }
    return true;
  };
  double nu = 0.0;
  double gamma = 1.2;
  if (name.rfind("st", 0) == 0 && parse_nu(name.substr(2), nu, gamma)) {
    return LossModel::skewed_t(nu, gamma);
  }
  if (name.rfind("t", 0) == 0 && parse_nu(name.substr(1), nu, gamma)) {
    return LossModel::student_t(nu);
  }
  throw ParseError("unknown model '" + name +
                       "' (valid: normal, t<nu>, st<nu>, st<nu>:<gamma>)",
                   0);
}

std::optional<TestMethod> parse_test_method(const std::string& name) {
  static const std::pair<const char*, TestMethod> table[] = {
      {"pearson", TestMethod::Pearson},
      {"nass", TestMethod::Nass},
      {"lrt", TestMethod::MultinomialLrt},
      {"binomial_score", TestMethod::BinomialScore},
      {"binomial_wald", TestMethod::BinomialWald},
      {"binomial_lrt", TestMethod::BinomialLrt},
      {"berkowitz", TestMethod::Berkowitz},
  };
  for (const auto& [key, value] : table) {
    if (name == key) return value;
  }
  return std::nullopt;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  KeyValues kv = parse_key_values(text);
  const auto& [kind, kind_line] = kv.get("kind");

  if (kind == "size_power") {
    SizePowerConfig config;
    config.true_label = kv.get_string("model", "normal");
    config.true_model = parse_model(config.true_label);
    config.reference_label = kv.get_string("reference", "normal");
    config.reference_model = parse_model(config.reference_label);
    if (kv.has("sample_sizes")) {
      const auto& [value, line] = kv.get("sample_sizes");
      config.sample_sizes.clear();
      for (const std::string& item : split_list(value)) {
        char* end = nullptr;
        long n = std::strtol(item.c_str(), &end, 10);
        if (end == nullptr || *end != '\0' || n < 1) {
          throw ParseError("field 'sample_sizes': bad size '" + item + "'", line);
        }
        config.sample_sizes.push_back(n);
      }
    }
    config.level_counts = get_levels(kv, config.level_counts);
    config.tests = get_tests(kv, config.tests);
    fill_common(kv, config.alpha, config.replications, config.kappa, config.master_seed,
                config.threads);
    kv.check_all_used();
    return config;
  }

  if (kind == "static") {
    StaticBacktestConfig config;
    config.model_label = kv.get_string("model", "normal");
    config.model = parse_model(config.model_label);
    config.n = kv.get_long("n", config.n);
    config.window = kv.get_long("window", config.window);
    config.stride = kv.get_long("stride", config.stride);
    if (kv.has("forecasters")) {
      const auto& [value, line] = kv.get("forecasters");
      config.forecasters.clear();
      for (const std::string& item : split_list(value)) {
        auto parsed = parse_forecast_method(item);
        if (!parsed) {
          throw ParseError("field 'forecasters': unknown forecaster '" + item +
                               "' (valid: oracle, good, poor, industry)",
                           line);
        }
        config.forecasters.push_back(*parsed);
      }
    }
    config.level_counts = get_levels(kv, config.level_counts);
    config.tests = get_tests(kv, config.tests);
    fill_common(kv, config.alpha, config.replications, config.kappa, config.master_seed,
                config.threads);
    kv.check_all_used();
    return config;
  }

  if (kind == "dynamic") {
    DynamicBacktestConfig config;
    config.dgp.alpha0 = kv.get_double("alpha0", config.dgp.alpha0);
    config.dgp.alpha1 = kv.get_double("alpha1", config.dgp.alpha1);
    config.dgp.beta1 = kv.get_double("beta1", config.dgp.beta1);
    config.dgp.nu = kv.get_double("nu", config.dgp.nu);
    std::string innovation = kv.get_string("innovation", "t");
    if (innovation == "t") config.dgp.innovation = Innovation::StudentT;
    else if (innovation == "normal") config.dgp.innovation = Innovation::Normal;
    else throw ParseError("field 'innovation': expected 't' or 'normal'", 0);
    config.n = kv.get_long("n", config.n);
    config.window = kv.get_long("window", config.window);
    config.stride = kv.get_long("stride", config.stride);
    config.burn_in = kv.get_long("burn_in", config.burn_in);
    if (kv.has("forecasters")) {
      const auto& [value, line] = kv.get("forecasters");
      config.forecasters.clear();
      for (const std::string& item : split_list(value)) {
        auto parsed = parse_forecast_method(item);
        if (!parsed) {
          throw ParseError("field 'forecasters': unknown forecaster '" + item +
                               "' (valid: oracle, garch.t, garch.hs, garch.norm, arch.t, "
                               "arch.norm, hs)",
                           line);
        }
        config.forecasters.push_back(*parsed);
      }
    }
    config.level_counts = get_levels(kv, config.level_counts);
    config.tests = get_tests(kv, config.tests);
    fill_common(kv, config.alpha, config.replications, config.kappa, config.master_seed,
                config.threads);
    kv.check_all_used();
    return config;
  }

  throw ParseError("field 'kind': expected size_power, static or dynamic, got '" + kind + "'",
                   kind_line);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (const auto* sp = std::get_if<SizePowerConfig>(&config)) return run_size_power(*sp);
  if (const auto* st = std::get_if<StaticBacktestConfig>(&config)) {
    return run_static_backtest(*st);
  }
  return run_dynamic_backtest(std::get<DynamicBacktestConfig>(config));
}

}  // namespace esback
