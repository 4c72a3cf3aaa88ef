#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "lrlf/nn/features.hpp"
#include "lrlf/nn/mlp.hpp"

namespace lrlf::nn {

/// Binary network record, little-endian throughout:
///   "LRLF" | u32 version | u32 layer_count L | u32 dims[L+1] |
///   f64 input_scale[dims[0]] | u32 periodic_count P | u32 periodic[P] |
///   u32 angle_rows A | u32 raw_dim R | f64 angles[A][R] row-major |
///   per layer: f64 W[out][in+1] row-major (bias last).
inline constexpr std::uint32_t kCheckpointVersion = 2;

struct Checkpoint {
  Mlp<double> net;
  FeatureMap<double> input;
};

void write_checkpoint(std::ostream& out, const Mlp<double>& net, const FeatureMap<double>& input);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const Mlp<double>& net, const FeatureMap<double>& input);
Checkpoint load_checkpoint(const std::string& path);

/// Human-readable dump of the same content.
void write_checkpoint_text(std::ostream& out, const Mlp<double>& net, const FeatureMap<double>& input);

}  // namespace lrlf::nn
