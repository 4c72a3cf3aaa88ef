#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lrlf/config.hpp"
#include "lrlf/harness.hpp"
#include "lrlf/trainer.hpp"

namespace lrlf {

/// Policy-selection score: the trace of the per-step error covariance averaged over the horizon,
/// computed over every trial (diverged ones included up to their last step). Lower is better.
double covariance_trace(const EvalReport& report);

/// Index of the lowest `covariance_trace`; ties go to the earlier index.
std::size_t select_lowest_trace(const std::vector<EvalReport>& reports);

/// `cfg` with policy count, trial counts and training steps divided by `reproduce.quick_factor`.
RunConfig quick_scaled(const RunConfig& cfg);

/// Trains one policy for `system` with `train` (seed taken from `train.seed`).
TrainResult train_policy(const std::string& system, const TrainConfig& train);

/// `lrlf train`: writes policy.json/.bin, diagnostics.csv and a λ plot under cfg.out.
void run_train(const RunConfig& cfg);
/// `lrlf evaluate`: the trained policy on the configured scenario.
void run_evaluate(const RunConfig& cfg);
/// `lrlf compare`: every configured estimator on the configured scenario.
void run_compare(const RunConfig& cfg);
/// `lrlf reproduce-paper`: the full experiment bundle. A failing stage is named in manifest.json
/// (marked incomplete) and rethrown.
void run_reproduce(const RunConfig& cfg);

/// Dispatches on cfg.command. `quick` applies `quick_scaled` first.
void run_command(RunConfig cfg, bool quick);

}  // namespace lrlf
