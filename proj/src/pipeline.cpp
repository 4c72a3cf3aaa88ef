#include "lrlf/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "lrlf/errors.hpp"
#include "lrlf/plot.hpp"
#include "lrlf/policy_io.hpp"

namespace lrlf {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

double covariance_trace(const EvalReport& report) {
  const auto& sd = report.all.sd;
  if (sd.rows() == 0) return std::numeric_limits<double>::infinity();
  return sd.array().square().rowwise().sum().mean();
}

std::size_t select_lowest_trace(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw ConfigError("policy selection needs at least one report");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i)
    if (covariance_trace(reports[i]) < covariance_trace(reports[best])) best = i;
  return best;
}

RunConfig quick_scaled(const RunConfig& cfg) {
  RunConfig q = cfg;
  const int f = cfg.reproduce.quick_factor;
  q.reproduce.policies = std::max(1, cfg.reproduce.policies / f);
  q.reproduce.trials = std::max(1, cfg.reproduce.trials / f);
  q.reproduce.bearing_trials = std::max(1, cfg.reproduce.bearing_trials / f);
  q.reproduce.vehicle_steps = cfg.reproduce.vehicle_steps / f;
  q.reproduce.bearing_steps = cfg.reproduce.bearing_steps / f;
  q.train.total_steps = cfg.train.total_steps / f;
  q.scenario.trials = std::max(1, cfg.scenario.trials / f);
  return q;
}

TrainResult train_policy(const std::string& system, const TrainConfig& train) { return lrlf::train(train, make_problem(system)); }

namespace {

int threads_for(const RunConfig& cfg) { return cfg.evaluate.threads > 0 ? cfg.evaluate.threads : default_thread_count(); }

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

template <typename F>
void write_file(const fs::path& path, F&& body) {
  std::ostringstream s;
  body(s);
  write_text(path, s.str());
}

std::string cell_name(const std::string& scenario, const std::string& estimator) { return scenario + "__" + estimator + ".csv"; }

/// One CSV per (scenario, estimator) in `dir` and `dir`_converged, a summary, and one SVG per scenario.
void write_comparison(const fs::path& root, const std::string& dir, const std::vector<ComparisonEntry>& entries,
                      std::uint64_t seed, const std::string& figure_prefix) {
  for (const auto& e : entries) {
    write_file(root / dir / cell_name(e.scenario, e.estimator),
               [&](std::ostream& o) { write_bands_csv(o, e.scenario, e.estimator, e.report.all); });
    write_file(root / (dir + "_converged") / cell_name(e.scenario, e.estimator),
               [&](std::ostream& o) { write_bands_csv(o, e.scenario, e.estimator, e.report.converged); });
  }
  write_text(root / dir / "summary.json", summary_json(entries, seed) + "\n");

  std::vector<std::string> scenarios;
  for (const auto& e : entries)
    if (std::find(scenarios.begin(), scenarios.end(), e.scenario) == scenarios.end()) scenarios.push_back(e.scenario);
  for (const auto& sc : scenarios) {
    std::vector<PlotPanel> panels;
    for (const auto& e : entries) {
      if (e.scenario != sc) continue;
      const auto& b = e.report.all;
      for (Eigen::Index i = 0; i < b.mean.cols(); ++i) {
        if (static_cast<std::size_t>(i) >= panels.size())
          panels.push_back({"error component " + std::to_string(i + 1), "k", "mean ± SD", {}});
        PlotSeries s;
        s.label = e.estimator;
        for (Eigen::Index k = 0; k < b.mean.rows(); ++k) {
          s.x.push_back(static_cast<double>(k + 1));
          s.y.push_back(b.mean(k, i));
          s.lower.push_back(b.mean(k, i) - b.sd(k, i));
          s.upper.push_back(b.mean(k, i) + b.sd(k, i));
        }
        panels[static_cast<std::size_t>(i)].series.push_back(std::move(s));
      }
    }
    write_file(root / "plots" / (figure_prefix + "_" + sc + ".svg"),
               [&](std::ostream& o) { write_svg(o, sc, panels, static_cast<int>(std::min<std::size_t>(panels.size(), 2))); });
  }
}

void write_lambda_plot(const fs::path& path, const std::vector<std::pair<std::string, const std::vector<UpdateRecord>*>>& runs) {
  PlotPanel p{"Lagrange multiplier during training", "update step", "lambda", {}};
  for (const auto& [label, rows] : runs) {
    PlotSeries s;
    s.label = label;
    const std::size_t stride = std::max<std::size_t>(1, rows->size() / 500);
    for (std::size_t i = 0; i < rows->size(); i += stride) {
      s.x.push_back(static_cast<double>((*rows)[i].step));
      s.y.push_back((*rows)[i].lambda);
    }
    p.series.push_back(std::move(s));
  }
  write_file(path, [&](std::ostream& o) { write_svg(o, "lambda", {p}); });
}

long diagnostics_stride(long steps) { return std::max<long>(1, steps / 3000); }

std::shared_ptr<const LearnedEstimator> load_policy(const RunConfig& cfg) {
  const std::string path = cfg.evaluate.policy.empty() ? (fs::path(cfg.out) / "policy.json").string() : cfg.evaluate.policy;
  auto est = std::make_shared<LearnedEstimator>(load_estimator(path));
  if (est->system.name != make_problem(cfg.system).system.name)
    throw ConfigError("policy '" + path + "' was trained for '" + est->system.name + "', not '" + cfg.system + "'");
  return est;
}

}  // namespace

void run_train(const RunConfig& cfg) {
  const fs::path out(cfg.out);
  write_text(out / "config.json", to_json(cfg));
  const auto r = train_policy(cfg.system, cfg.train);
  save_estimator((out / "policy.json").string(), cfg.system, r.estimator);
  write_file(out / "diagnostics.csv",
             [&](std::ostream& o) { write_diagnostics_csv(o, r.diagnostics, diagnostics_stride(cfg.train.total_steps)); });
  write_lambda_plot(out / "plots" / "lambda.svg", {{cfg.system, &r.diagnostics}});
}

void run_evaluate(const RunConfig& cfg) {
  const fs::path out(cfg.out);
  write_text(out / "config.json", to_json(cfg));
  const auto scenario = scenario_from_config(cfg.system, cfg.scenario);
  const auto entries = compare({scenario}, {EstimatorSpec::lrlf(load_policy(cfg))}, cfg.seed, threads_for(cfg));
  write_comparison(out, "evaluate", entries, cfg.seed, "evaluate");
}

void run_compare(const RunConfig& cfg) {
  const fs::path out(cfg.out);
  write_text(out / "config.json", to_json(cfg));
  std::shared_ptr<const LearnedEstimator> learned;
  if (std::find(cfg.evaluate.estimators.begin(), cfg.evaluate.estimators.end(), "LRLF") != cfg.evaluate.estimators.end())
    learned = load_policy(cfg);
  std::vector<EstimatorSpec> specs;
  for (const auto& name : cfg.evaluate.estimators) specs.push_back(estimator_from_name(name, learned));
  const auto entries = compare({scenario_from_config(cfg.system, cfg.scenario)}, specs, cfg.seed, threads_for(cfg));
  write_comparison(out, "compare", entries, cfg.seed, "compare");
}

void run_reproduce(const RunConfig& cfg) {
  const fs::path out(cfg.out);
  const auto& rp = cfg.reproduce;
  const int threads = threads_for(cfg);
  json manifest;
  manifest["seed"] = cfg.seed;
  manifest["complete"] = false;
  manifest["failed_stage"] = nullptr;
  manifest["stages"] = json::array();
  write_text(out / "config.json", to_json(cfg));

  std::vector<TrainResult> policies;
  std::shared_ptr<const LearnedEstimator> selected;
  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
      manifest["stages"].push_back(name);
    } catch (...) {
      manifest["failed_stage"] = name;
      write_text(out / "manifest.json", manifest.dump(2) + "\n");
      throw;
    }
  };

  stage("train", [&] {
    for (int i = 0; i < rp.policies; ++i) {
      TrainConfig t = cfg.train;
      t.seed = derive_seed(cfg.seed, 1, static_cast<std::uint64_t>(i));
      policies.push_back(train_policy("pendulum", t));
      const auto& r = policies.back();
      save_estimator((out / "policies" / ("policy_" + std::to_string(i) + ".json")).string(), "pendulum", r.estimator);
      write_file(out / "training" / ("diagnostics_" + std::to_string(i) + ".csv"),
                 [&](std::ostream& o) { write_diagnostics_csv(o, r.diagnostics, diagnostics_stride(t.total_steps)); });
    }
    std::vector<std::pair<std::string, const std::vector<UpdateRecord>*>> runs;
    for (std::size_t i = 0; i < policies.size(); ++i) runs.emplace_back("policy " + std::to_string(i), &policies[i].diagnostics);
    write_lambda_plot(out / "plots" / "lambda.svg", runs);
  });

  stage("select", [&] {
    const auto scenario = nominal_scenario("pendulum", rp.trials);
    std::vector<EvalReport> reports;
    for (const auto& p : policies)
      reports.push_back(evaluate(scenario, EstimatorSpec::lrlf(std::make_shared<LearnedEstimator>(p.estimator)),
                                 derive_seed(cfg.seed, 2), threads));
    const std::size_t best = select_lowest_trace(reports);
    selected = std::make_shared<LearnedEstimator>(policies[best].estimator);
    write_file(out / "selection.csv", [&](std::ostream& o) {
      o << "policy,covariance_trace,divergence_rate,steady_state_mse\n" << std::setprecision(10);
      for (std::size_t i = 0; i < reports.size(); ++i)
        o << i << ',' << covariance_trace(reports[i]) << ',' << reports[i].divergence_rate << ','
          << reports[i].steady_state_mse << '\n';
    });
    manifest["selected_policy"] = best;
    manifest["selection_metric"] = "mean over steps of the trace of the estimate-error covariance (nominal pendulum)";
    manifest["selection_value"] = covariance_trace(reports[best]);
  });

  stage("compare", [&] {
    std::vector<EstimatorSpec> specs{EstimatorSpec::ekf(), EstimatorSpec::ukf()};
    for (int n : rp.particles) specs.push_back(EstimatorSpec::pf(n));
    specs.push_back(EstimatorSpec::lrlf(selected));
    const auto entries = compare(pendulum_robustness_scenarios(rp.trials), specs, derive_seed(cfg.seed, 3), threads);
    write_comparison(out, "compare", entries, derive_seed(cfg.seed, 3), "robustness");
  });

  stage("noise", [&] {
    const std::vector<EstimatorSpec> specs{EstimatorSpec::ekf(), EstimatorSpec::ukf(), EstimatorSpec::pf(rp.particles.front()),
                                           EstimatorSpec::lrlf(selected)};
    const auto entries = compare(noise_suite(rp.trials, rp.exponential_rate), specs, derive_seed(cfg.seed, 4), threads);
    write_comparison(out, "noise", entries, derive_seed(cfg.seed, 4), "noise");
  });

  auto trained_case = [&](const std::string& system, long steps, int trials, std::vector<EstimatorSpec> baselines, std::uint64_t tag) {
    TrainConfig t = cfg.train;
    t.total_steps = steps;
    t.seed = derive_seed(cfg.seed, tag);
    const auto r = train_policy(system, t);
    save_estimator((out / system / "policy.json").string(), system, r.estimator);
    write_file(out / system / "diagnostics.csv",
               [&](std::ostream& o) { write_diagnostics_csv(o, r.diagnostics, diagnostics_stride(steps)); });
    baselines.push_back(EstimatorSpec::lrlf(std::make_shared<LearnedEstimator>(r.estimator)));
    const auto entries = compare({nominal_scenario(system, trials)}, baselines, derive_seed(cfg.seed, tag, 1), threads);
    write_comparison(out, system, entries, derive_seed(cfg.seed, tag, 1), system);
  };

  stage("vehicle", [&] {
    trained_case("vehicle", rp.vehicle_steps, rp.trials, {EstimatorSpec::kf(), EstimatorSpec::ekf(), EstimatorSpec::ukf()}, 5);
  });
  stage("bearing", [&] {
    trained_case("bearing", rp.bearing_steps, rp.bearing_trials,
                 {EstimatorSpec::ekf(), EstimatorSpec::ukf(), EstimatorSpec::pf(rp.particles.front())}, 6);
  });

  manifest["complete"] = true;
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
}

void run_command(RunConfig cfg, bool quick) {
  if (quick) cfg = quick_scaled(cfg);
  switch (cfg.command) {
    case Command::train: run_train(cfg); break;
    case Command::evaluate: run_evaluate(cfg); break;
    case Command::compare: run_compare(cfg); break;
    case Command::reproduce_paper: run_reproduce(cfg); break;
  }
}

}  // namespace lrlf
