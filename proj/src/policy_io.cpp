#include "lrlf/policy_io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "lrlf/errors.hpp"
#include "lrlf/nn/checkpoint.hpp"
#include "lrlf/problem.hpp"

namespace lrlf {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void save_estimator(const std::string& path, const std::string& system_id, const LearnedEstimator& est) {
  const fs::path meta(path);
  const fs::path bin = fs::path(meta).replace_extension(".bin");
  if (meta.has_parent_path()) fs::create_directories(meta.parent_path());
  nn::save_checkpoint(bin.string(), est.policy, est.head.input);
  json j;
  j["system"] = system_id;
  j["observation_mode"] = to_string(est.mode);
  j["action_bound"] = std::vector<double>(est.head.action_bound.data(), est.head.action_bound.data() + est.head.action_bound.size());
  j["log_std_min"] = est.head.log_std_min;
  j["log_std_max"] = est.head.log_std_max;
  j["checkpoint"] = bin.filename().string();
  std::ofstream out(meta);
  if (!out) throw ConfigError("cannot write policy metadata '" + path + "'");
  out << j.dump(2) << '\n';
}

LearnedEstimator load_estimator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy metadata '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("policy metadata '" + path + "' is malformed: " + e.what());
  }
  try {
    LearnedEstimator est;
    const auto problem = make_problem(j.at("system").get<std::string>());
    est.system = problem.system;
    est.mode = observation_mode_from_string(j.at("observation_mode").get<std::string>());
    const auto bound = j.at("action_bound").get<std::vector<double>>();
    const auto cp = nn::load_checkpoint((fs::path(path).parent_path() / j.at("checkpoint").get<std::string>()).string());
    est.policy = cp.net;
    est.head.action_dim = est.action_dim();
    est.head.action_bound = Eigen::Map<const Eigen::VectorXd>(bound.data(), static_cast<Eigen::Index>(bound.size()));
    est.head.input = cp.input;
    est.head.log_std_min = j.at("log_std_min").get<double>();
    est.head.log_std_max = j.at("log_std_max").get<double>();
    est.head.validate(est.policy.spec());
    if (est.head.input.raw_dim() != est.observation_dim())
      throw ConfigError("policy '" + path + "' does not match the observation size of system '" + j.at("system").get<std::string>() + "'");
    return est;
  } catch (const json::exception& e) {
    throw ConfigError("policy metadata '" + path + "' is malformed: " + e.what());
  }
}

}  // namespace lrlf
