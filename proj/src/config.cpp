#include "lrlf/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lrlf/errors.hpp"

namespace lrlf {

using json = nlohmann::ordered_json;

std::string to_string(Command c) {
  switch (c) {
    case Command::train: return "train";
    case Command::evaluate: return "evaluate";
    case Command::compare: return "compare";
    case Command::reproduce_paper: return "reproduce-paper";
  }
  return "?";
}

Command command_from_string(const std::string& s) {
  if (s == "train") return Command::train;
  if (s == "evaluate") return Command::evaluate;
  if (s == "compare") return Command::compare;
  if (s == "reproduce-paper") return Command::reproduce_paper;
  throw ConfigError("command must be one of train, evaluate, compare, reproduce-paper; got '" + s + "'");
}

namespace {

std::string optimizer_name(nn::OptimizerKind k) { return k == nn::OptimizerKind::adam ? "adam" : "sgd"; }

nn::OptimizerKind optimizer_from(const std::string& s, const std::string& key) {
  if (s == "adam") return nn::OptimizerKind::adam;
  if (s == "sgd") return nn::OptimizerKind::sgd;
  throw ConfigError("key '" + key + "' must be 'adam' or 'sgd'");
}

/// Reads one JSON object into typed fields, remembering which keys were consumed.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError("key '" + label() + "' must be an object");
  }

  template <typename T>
  void operator()(const char* key, T& field) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    read(*it, field, qualified(key));
  }

  void mark(const std::string& key) { seen_.insert(key); }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) throw ConfigError("unknown key '" + qualified(key) + "'");
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string label() const { return path_.empty() ? "<root>" : path_; }

  static void read(const json& v, double& f, const std::string& key) {
    if (!v.is_number()) throw ConfigError("key '" + key + "' must be a number");
    f = v.get<double>();
  }
  static void read(const json& v, bool& f, const std::string& key) {
    if (!v.is_boolean()) throw ConfigError("key '" + key + "' must be a boolean");
    f = v.get<bool>();
  }
  static void read(const json& v, std::string& f, const std::string& key) {
    if (!v.is_string()) throw ConfigError("key '" + key + "' must be a string");
    f = v.get<std::string>();
  }
  static void read(const json& v, int& f, const std::string& key) {
    if (!v.is_number_integer()) throw ConfigError("key '" + key + "' must be an integer");
    f = v.get<int>();
  }
  static void read(const json& v, long& f, const std::string& key) {
    if (!v.is_number_integer()) throw ConfigError("key '" + key + "' must be an integer");
    f = v.get<long>();
  }
  static void read(const json& v, std::uint64_t& f, const std::string& key) {
    if (!v.is_number_unsigned()) throw ConfigError("key '" + key + "' must be a nonnegative integer");
    f = v.get<std::uint64_t>();
  }
  static void read(const json& v, std::optional<double>& f, const std::string& key) {
    if (v.is_null()) {
      f.reset();
      return;
    }
    double d = 0;
    read(v, d, key);
    f = d;
  }
  template <typename T>
  static void read(const json& v, std::vector<T>& f, const std::string& key) {
    if (!v.is_array()) throw ConfigError("key '" + key + "' must be an array");
    f.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      T item{};
      read(v[i], item, key + "[" + std::to_string(i) + "]");
      f.push_back(item);
    }
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

class Writer {
 public:
  template <typename T>
  void operator()(const char* key, const T& field) {
    out[key] = field;
  }
  void operator()(const char* key, const std::optional<double>& field) {
    out[key] = field ? json(*field) : json(nullptr);
  }
  json out = json::object();
};

// Shared field lists keep parsing and serialisation in step.
template <typename V, typename T>
void train_fields(V& v, T& t) {
  v("gamma", t.gamma);
  v("tau", t.tau);
  v("actor_lr", t.actor_lr);
  v("critic_lr", t.critic_lr);
  v("lyapunov_lr", t.lyapunov_lr);
  v("lambda_lr", t.lambda_lr);
  v("beta", t.beta);
  v("delta_slack", t.delta_slack);
  v("alpha_init", t.alpha_init);
  v("alpha_autotune", t.alpha_autotune);
  v("target_entropy", t.target_entropy);
  v("lambda_init", t.lambda_init);
  v("batch_size", t.batch_size);
  v("horizon", t.horizon);
  v("capacity", t.capacity);
  v("total_steps", t.total_steps);
  v("warmup_steps", t.warmup_steps);
  v("action_bound", t.action_bound);
  v("initial_log_std", t.initial_log_std);
  v("divergence_stop", t.divergence_stop);
  v("actor_hidden", t.actor_hidden);
  v("critic_hidden", t.critic_hidden);
  v("critic_features", t.critic_features);
  v("critic_observation", t.critic_observation);
  v("snapshot_count", t.snapshot_count);
}

template <typename V, typename T>
void scenario_fields(V& v, T& s) {
  v("preset", s.preset);
  v("trials", s.trials);
  v("horizon", s.horizon);
  v("exponential_rate", s.exponential_rate);
}

template <typename V, typename T>
void evaluate_fields(V& v, T& e) {
  v("policy", e.policy);
  v("estimators", e.estimators);
  v("threads", e.threads);
}

template <typename V, typename T>
void reproduce_fields(V& v, T& r) {
  v("policies", r.policies);
  v("trials", r.trials);
  v("bearing_trials", r.bearing_trials);
  v("vehicle_steps", r.vehicle_steps);
  v("bearing_steps", r.bearing_steps);
  v("particles", r.particles);
  v("exponential_rate", r.exponential_rate);
  v("quick_factor", r.quick_factor);
}

}  // namespace

void RunConfig::validate() const {
  make_problem(system);
  train.validate();
  if (scenario.trials < 1) throw ConfigError("scenario.trials must be at least 1");
  if (scenario.horizon < 1) throw ConfigError("scenario.horizon must be at least 1");
  if (!(scenario.exponential_rate > 0.0)) throw ConfigError("scenario.exponential_rate must be positive");
  scenario_from_config(system, scenario).validate();
  if (evaluate.threads < 0) throw ConfigError("evaluate.threads must be nonnegative");
  if (evaluate.estimators.empty()) throw ConfigError("evaluate.estimators must not be empty");
  for (const auto& name : evaluate.estimators) {
    if (name != "LRLF") estimator_from_name(name);
  }
  if (reproduce.policies < 1) throw ConfigError("reproduce.policies must be at least 1");
  if (reproduce.trials < 1) throw ConfigError("reproduce.trials must be at least 1");
  if (reproduce.bearing_trials < 1) throw ConfigError("reproduce.bearing_trials must be at least 1");
  if (reproduce.vehicle_steps < 0) throw ConfigError("reproduce.vehicle_steps must be nonnegative");
  if (reproduce.bearing_steps < 0) throw ConfigError("reproduce.bearing_steps must be nonnegative");
  if (reproduce.particles.empty()) throw ConfigError("reproduce.particles must not be empty");
  for (int p : reproduce.particles)
    if (p < 1) throw ConfigError("reproduce.particles entries must be at least 1");
  if (!(reproduce.exponential_rate > 0.0)) throw ConfigError("reproduce.exponential_rate must be positive");
  if (reproduce.quick_factor < 1) throw ConfigError("reproduce.quick_factor must be at least 1");
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Reader r(root, "");
  std::string command = to_string(cfg.command), mode = to_string(cfg.train.observation_mode),
              optimizer = optimizer_name(cfg.train.optimizer);
  r("command", command);
  r("system", cfg.system);
  r("seed", cfg.seed);
  r("out", cfg.out);
  auto section = [&](const char* key, auto&& fields) {
    r.mark(key);
    const json empty = json::object();
    const auto it = root.find(key);
    Reader sub(it == root.end() ? empty : *it, key);
    fields(sub);
    sub.finish();
  };
  section("train", [&](Reader& s) {
    train_fields(s, cfg.train);
    s("observation_mode", mode);
    s("optimizer", optimizer);
  });
  section("scenario", [&](Reader& s) { scenario_fields(s, cfg.scenario); });
  section("evaluate", [&](Reader& s) { evaluate_fields(s, cfg.evaluate); });
  section("reproduce", [&](Reader& s) { reproduce_fields(s, cfg.reproduce); });
  r.finish();
  cfg.command = command_from_string(command);
  cfg.train.observation_mode = observation_mode_from_string(mode);
  cfg.train.optimizer = optimizer_from(optimizer, "train.optimizer");
  cfg.train.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_json(const RunConfig& cfg) {
  json root;
  root["command"] = to_string(cfg.command);
  root["system"] = cfg.system;
  root["seed"] = cfg.seed;
  root["out"] = cfg.out;
  Writer t;
  train_fields(t, cfg.train);
  t("observation_mode", to_string(cfg.train.observation_mode));
  t("optimizer", optimizer_name(cfg.train.optimizer));
  root["train"] = t.out;
  Writer s;
  scenario_fields(s, cfg.scenario);
  root["scenario"] = s.out;
  Writer e;
  evaluate_fields(e, cfg.evaluate);
  root["evaluate"] = e.out;
  Writer p;
  reproduce_fields(p, cfg.reproduce);
  root["reproduce"] = p.out;
  return root.dump(2) + "\n";
}

Scenario scenario_from_config(const std::string& system, const ScenarioConfig& sc) {
  Scenario s;
  if (sc.preset == "nominal") {
    s = nominal_scenario(system, sc.trials);
  } else {
    if (system != "pendulum") throw ConfigError("scenario.preset '" + sc.preset + "' is only defined for the pendulum");
    std::vector<Scenario> all = pendulum_robustness_scenarios(sc.trials);
    for (auto& n : noise_suite(sc.trials, sc.exponential_rate)) all.push_back(n);
    bool found = false;
    for (auto& c : all)
      if (c.name == "pendulum_" + sc.preset) {
        s = c;
        found = true;
      }
    if (!found)
      throw ConfigError("scenario.preset must be one of nominal, r0.1, missing0.5, truncated_gaussian, uniform, exponential");
  }
  s.horizon = sc.horizon;
  return s;
}

EstimatorSpec estimator_from_name(const std::string& name, std::shared_ptr<const LearnedEstimator> learned) {
  if (name == "KF") return EstimatorSpec::kf();
  if (name == "EKF") return EstimatorSpec::ekf();
  if (name == "UKF") return EstimatorSpec::ukf();
  if (name == "LRLF") return EstimatorSpec::lrlf(std::move(learned));
  if (name.size() > 2 && name.rfind("PF", 0) == 0) {
    const std::string digits = name.substr(2);
    if (digits.find_first_not_of("0123456789") == std::string::npos && digits.size() < 9)
      return EstimatorSpec::pf(std::stoi(digits));
  }
  throw ConfigError("unknown estimator '" + name + "' (expected KF, EKF, UKF, PF<particles> or LRLF)");
}

}  // namespace lrlf
