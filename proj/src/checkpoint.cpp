#include "lrlf/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "lrlf/errors.hpp"

namespace lrlf::nn {

namespace {

constexpr std::array<char, 4> kMagic{'L', 'R', 'L', 'F'};
constexpr std::uint32_t kMaxDim = 1u << 20;

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b.data(), 4);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(b.data(), 8);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw ConfigError("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

double get_f64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw ConfigError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return std::bit_cast<double>(v);
}

}  // namespace

void write_checkpoint(std::ostream& out, const Mlp<double>& net, const FeatureMap<double>& input) {
  const auto dims = net.spec().layer_dims();
  if (input.feature_dim() != dims.front()) throw ConfigError("checkpoint: input features do not match the network input");
  input.validate();
  out.write(kMagic.data(), 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(net.layer_count()));
  for (int d : dims) put_u32(out, static_cast<std::uint32_t>(d));
  for (Eigen::Index i = 0; i < input.scale.size(); ++i) put_f64(out, input.scale[i]);
  put_u32(out, static_cast<std::uint32_t>(input.periodic.size()));
  for (int i : input.periodic) put_u32(out, static_cast<std::uint32_t>(i));
  put_u32(out, static_cast<std::uint32_t>(input.angles.rows()));
  put_u32(out, static_cast<std::uint32_t>(input.angles.rows() > 0 ? input.angles.cols() : 0));
  for (Eigen::Index r = 0; r < input.angles.rows(); ++r)
    for (Eigen::Index c = 0; c < input.angles.cols(); ++c) put_f64(out, input.angles(r, c));
  for (const auto& w : net.layers())
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) put_f64(out, w(r, c));
  if (!out) throw ConfigError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) throw ConfigError("checkpoint: bad magic bytes");
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion) throw ConfigError("checkpoint: unsupported format version " + std::to_string(version));
  const std::uint32_t layers = get_u32(in);
  if (layers < 1 || layers > 64) throw ConfigError("checkpoint: implausible layer count");
  std::vector<int> dims;
  for (std::uint32_t i = 0; i <= layers; ++i) {
    const std::uint32_t d = get_u32(in);
    if (d < 1 || d > kMaxDim) throw ConfigError("checkpoint: implausible layer width");
    dims.push_back(static_cast<int>(d));
  }
  MlpSpec spec{dims.front(), std::vector<int>(dims.begin() + 1, dims.end() - 1), dims.back()};
  Checkpoint cp{Mlp<double>::zeros(spec), {Eigen::VectorXd(dims.front()), {}, {}}};
  for (Eigen::Index i = 0; i < cp.input.scale.size(); ++i) cp.input.scale[i] = get_f64(in);
  const std::uint32_t periodic = get_u32(in);
  if (periodic > static_cast<std::uint32_t>(dims.front()) / 2) throw ConfigError("checkpoint: implausible periodic count");
  for (std::uint32_t i = 0; i < periodic; ++i) cp.input.periodic.push_back(static_cast<int>(get_u32(in)));
  const std::uint32_t angle_rows = get_u32(in), angle_cols = get_u32(in);
  if (angle_rows > static_cast<std::uint32_t>(dims.front()) / 2 || angle_cols > static_cast<std::uint32_t>(dims.front()))
    throw ConfigError("checkpoint: implausible angle feature block");
  cp.input.angles.resize(angle_rows, angle_rows > 0 ? angle_cols : 0);
  for (Eigen::Index r = 0; r < cp.input.angles.rows(); ++r)
    for (Eigen::Index c = 0; c < cp.input.angles.cols(); ++c) cp.input.angles(r, c) = get_f64(in);
  cp.input.validate();
  for (auto& w : cp.net.layers())
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = get_f64(in);
  if (!all_finite(cp.net.layers()) || !cp.input.scale.allFinite() || !cp.input.angles.allFinite()) throw ConfigError("checkpoint: non-finite parameters");
  return cp;
}

void save_checkpoint(const std::string& path, const Mlp<double>& net, const FeatureMap<double>& input) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("checkpoint: cannot open " + path + " for writing");
  write_checkpoint(out, net, input);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open " + path);
  return read_checkpoint(in);
}

void write_checkpoint_text(std::ostream& out, const Mlp<double>& net, const FeatureMap<double>& input) {
  const auto dims = net.spec().layer_dims();
  out << "LRLF checkpoint v" << kCheckpointVersion << "\n";
  out << "dims";
  for (int d : dims) out << ' ' << d;
  out << "\ninput_scale";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < input.scale.size(); ++i) out << ' ' << input.scale[i];
  out << "\nperiodic";
  for (int i : input.periodic) out << ' ' << i;
  out << '\n';
  for (Eigen::Index r = 0; r < input.angles.rows(); ++r) {
    out << "angle";
    for (Eigen::Index c = 0; c < input.angles.cols(); ++c) out << ' ' << input.angles(r, c);
    out << '\n';
  }
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& w = net.layers()[l];
    out << "layer " << l << ' ' << w.rows() << 'x' << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out << (c ? " " : "") << w(r, c);
      out << '\n';
    }
  }
}

}  // namespace lrlf::nn
