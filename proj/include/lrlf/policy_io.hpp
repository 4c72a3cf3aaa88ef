#pragma once

#include <string>

#include "lrlf/estimator.hpp"

namespace lrlf {

/// Writes `<path>` (JSON metadata: system id, observation mode, action bound, checkpoint file name)
/// and the network checkpoint next to it with the extension replaced by ".bin".
void save_estimator(const std::string& path, const std::string& system_id, const LearnedEstimator& est);

/// Rebuilds a learned estimator from metadata written by `save_estimator`.
LearnedEstimator load_estimator(const std::string& path);

}  // namespace lrlf
