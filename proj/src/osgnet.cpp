#include "deeposg/osgnet.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "deeposg/binary_io.hpp"
#include "deeposg/error.hpp"
#include "deeposg/rng.hpp"

namespace deeposg {

namespace {

constexpr char model_magic[8] = {'O', 'S', 'G', 'M', 'D', 'L', '1', '\0'};
constexpr double ln10 = 2.30258509299404568402;

void check_delta(BlockVariant variant, double delta, int block) {
  if (!std::isfinite(delta) || delta < 0.0) {
    throw DomainError("block " + std::to_string(block) + ": time step must be finite and >= 0");
  }
  if (variant == BlockVariant::multiscale && delta <= 0.0) {
    throw DomainError("block " + std::to_string(block) +
                      ": multiscale block needs a positive time step (log10 of 0)");
  }
}

}  // namespace

std::string to_string(BlockVariant v) {
  return v == BlockVariant::standard ? "standard" : "multiscale";
}

std::string to_string(Sharing s) { return s == Sharing::recursive ? "recursive" : "recurrent"; }

BlockVariant parse_block_variant(const std::string& s) {
  if (s == "standard") return BlockVariant::standard;
  if (s == "multiscale") return BlockVariant::multiscale;
  throw ConfigError("unknown block variant '" + s + "'");
}

Sharing parse_sharing(const std::string& s) {
  if (s == "recursive") return Sharing::recursive;
  if (s == "recurrent") return Sharing::recurrent;
  throw ConfigError("unknown sharing mode '" + s + "'");
}

double time_raw(BlockVariant variant, double delta) {
  return variant == BlockVariant::standard ? delta : -std::log10(delta);
}

double time_raw_derivative(BlockVariant variant, double delta) {
  return variant == BlockVariant::standard ? 1.0 : -1.0 / (delta * ln10);
}

const MlpParams& OsgNet::block(int k) const {
  return sharing == Sharing::recurrent ? params.front() : params[static_cast<std::size_t>(k)];
}

std::size_t OsgNet::parameter_count() const {
  std::size_t count = 0;
  for (const auto& p : params) count += p.parameter_count();
  return count;
}

std::vector<MlpParams> OsgNet::zero_grads() const {
  std::vector<MlpParams> g;
  g.reserve(params.size());
  for (const auto& p : params) g.push_back(p.zeros_like());
  return g;
}

void OsgNet::validate() const {
  if (state_dim < 1) throw DimensionError("net", "state dimension must be positive");
  if (block_count < 1) throw DimensionError("net", "need at least one block");
  if (static_cast<int>(variants.size()) != block_count) {
    throw DimensionError("net", "variant list length differs from block count");
  }
  const std::size_t expected = sharing == Sharing::recurrent ? 1 : block_count;
  if (params.size() != expected) {
    throw DimensionError("net", "expected " + std::to_string(expected) + " parameter sets, got " +
                                    std::to_string(params.size()));
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    const std::string where = "block " + std::to_string(b);
    try {
      params[b].validate();
    } catch (const DimensionError& e) {
      throw DimensionError(where, e.what());
    }
    if (params[b].input_width() != state_dim + 1) throw DimensionError(where, "input width != n+1");
    if (params[b].output_width() != state_dim) throw DimensionError(where, "output width != n");
  }
}

OsgNet make_zero_osgnet(int state_dim, const NetSpec& spec) {
  OsgNet net;
  net.state_dim = state_dim;
  net.block_count = spec.block_count;
  net.sharing = spec.sharing;
  net.variants.assign(static_cast<std::size_t>(spec.block_count), spec.variant);
  std::vector<int> widths{state_dim + 1};
  widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
  widths.push_back(state_dim);
  const int sets = spec.sharing == Sharing::recurrent ? 1 : spec.block_count;
  for (int k = 0; k < sets; ++k) net.params.push_back(make_mlp(widths));
  net.validate();
  return net;
}

OsgNet make_osgnet(int state_dim, const NetSpec& spec, Rng& rng) {
  OsgNet net = make_zero_osgnet(state_dim, spec);
  for (auto& p : net.params) {
    p = make_mlp_glorot(p.widths, rng);
    if (spec.zero_output_layer) {
      p.weights.back().setZero();
      p.biases.back().setZero();
    }
  }
  return net;
}

Matrix osg_forward(const OsgNet& net, const Matrix& u, const Vector& delta, ForwardTape* tape) {
  const int n = net.state_dim;
  if (u.rows() != n) {
    throw DimensionError("net input", "state has " + std::to_string(u.rows()) +
                                          " components, expected " + std::to_string(n));
  }
  if (delta.size() != u.cols()) throw DimensionError("net input", "one time step per column");
  const int K = net.block_count;
  Vector block_delta = delta / static_cast<double>(K);
  if (tape) {
    tape->state_dim = n;
    tape->blocks.assign(static_cast<std::size_t>(K), BlockTape{});
  }
  Matrix x(n + 1, u.cols());
  Matrix state = u;
  for (int k = 0; k < K; ++k) {
    const BlockVariant variant = net.variants[static_cast<std::size_t>(k)];
    for (Eigen::Index b = 0; b < u.cols(); ++b) {
      check_delta(variant, block_delta(b), k);
      x(n, b) = net.time_feature.scale * time_raw(variant, block_delta(b)) +
                net.time_feature.offset;
    }
    x.topRows(n) = state;
    MlpTape* mt = tape ? &tape->blocks[static_cast<std::size_t>(k)].mlp : nullptr;
    Matrix inc = mlp_forward(net.block(k), x, mt);
    for (Eigen::Index b = 0; b < u.cols(); ++b) {
      if (block_delta(b) != 0.0) state.col(b) += block_delta(b) * inc.col(b);
    }
    if (tape) {
      auto& bt = tape->blocks[static_cast<std::size_t>(k)];
      bt.increment = std::move(inc);
      bt.delta = block_delta;
    }
  }
  return state;
}

Matrix osg_backprop(const OsgNet& net, const ForwardTape& tape, const Matrix& upstream,
                    std::vector<MlpParams>& grads, Vector* d_delta) {
  const int n = net.state_dim;
  const int K = net.block_count;
  if (tape.state_dim != n || static_cast<int>(tape.blocks.size()) != K) {
    throw DimensionError("net tape", "tape was not produced by this network");
  }
  if (grads.size() != net.params.size()) {
    throw DimensionError("net grads", "gradient list does not match parameter sets");
  }
  const Eigen::Index B = upstream.cols();
  if (upstream.rows() != n || tape.blocks.front().delta.size() != B) {
    throw DimensionError("net tape", "upstream shape does not match the forward pass");
  }
  Matrix g = upstream;
  Vector dd;
  if (d_delta) dd = Vector::Zero(B);
  for (int k = K - 1; k >= 0; --k) {
    const auto& bt = tape.blocks[static_cast<std::size_t>(k)];
    const BlockVariant variant = net.variants[static_cast<std::size_t>(k)];
    Matrix d_inc = g * bt.delta.asDiagonal();
    MlpParams& acc = grads[net.sharing == Sharing::recurrent ? 0 : static_cast<std::size_t>(k)];
    Matrix dx = mlp_backprop(net.block(k), bt.mlp, d_inc, acc);
    if (d_delta) {
      for (Eigen::Index b = 0; b < B; ++b) {
        const double skip = g.col(b).dot(bt.increment.col(b));
        const double feat = dx(n, b) * net.time_feature.scale *
                            time_raw_derivative(variant, bt.delta(b));
        dd(b) += (skip + feat) / static_cast<double>(K);
      }
    }
    g += dx.topRows(n);
  }
  if (d_delta) *d_delta = dd;
  return g;
}

StateVector osg_forward(const OsgNet& net, const StateVector& u, double delta,
                        ForwardTape* tape) {
  Vector d(1);
  d(0) = delta;
  return osg_forward(net, Matrix(u), d, tape).col(0);
}

OsgBackpropResult osg_backprop(const OsgNet& net, const ForwardTape& tape,
                               const StateVector& upstream) {
  OsgBackpropResult r;
  r.grads = net.zero_grads();
  Vector dd;
  r.input_grad = osg_backprop(net, tape, Matrix(upstream), r.grads, &dd).col(0);
  r.d_delta = dd(0);
  return r;
}

StateVector osg_block_forward(const MlpParams& block, const StateVector& u, double delta,
                              BlockVariant variant, const TimeFeature& feature) {
  const auto n = u.size();
  if (block.input_width() != n + 1 || block.output_width() != n) {
    throw DimensionError("block", "widths do not match state dimension " + std::to_string(n));
  }
  check_delta(variant, delta, 0);
  Vector x(n + 1);
  x.head(n) = u;
  x(n) = feature.scale * time_raw(variant, delta) + feature.offset;
  if (delta == 0.0) return u;
  return u + delta * mlp_forward(block, x).y;
}

StateVector plain_resnet_forward(const MlpParams& block, const StateVector& u) {
  if (block.input_width() != u.size() || block.output_width() != u.size()) {
    throw DimensionError("block", "residual block must map R^n to R^n");
  }
  return u + mlp_forward(block, u).y;
}

void write_osgnet(std::ostream& out, const OsgNet& net) {
  net.validate();
  out.write(model_magic, sizeof model_magic);
  write_u32(out, static_cast<std::uint32_t>(net.state_dim));
  write_u32(out, static_cast<std::uint32_t>(net.block_count));
  write_u32(out, net.sharing == Sharing::recurrent ? 1u : 0u);
  write_u32(out, static_cast<std::uint32_t>(net.params.size()));
  for (auto v : net.variants) write_u32(out, v == BlockVariant::multiscale ? 1u : 0u);
  write_f64(out, net.time_feature.scale);
  write_f64(out, net.time_feature.offset);
  for (const auto& p : net.params) write_mlp(out, p);
}

OsgNet read_osgnet(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, model_magic, sizeof magic) != 0) {
    throw IoError("<stream>", "not an OSGMDL1 model file");
  }
  OsgNet net;
  net.state_dim = static_cast<int>(read_u32(in));
  net.block_count = static_cast<int>(read_u32(in));
  const std::uint32_t sharing = read_u32(in);
  const std::uint32_t sets = read_u32(in);
  if (sharing > 1 || net.block_count < 1 || net.block_count > 4096 || sets > 4096) {
    throw IoError("<stream>", "corrupt model header");
  }
  net.sharing = sharing ? Sharing::recurrent : Sharing::recursive;
  for (int k = 0; k < net.block_count; ++k) {
    const std::uint32_t v = read_u32(in);
    if (v > 1) throw IoError("<stream>", "corrupt block variant");
    net.variants.push_back(v ? BlockVariant::multiscale : BlockVariant::standard);
  }
  net.time_feature.scale = read_f64(in);
  net.time_feature.offset = read_f64(in);
  for (std::uint32_t s = 0; s < sets; ++s) net.params.push_back(read_mlp(in));
  net.validate();
  return net;
}

void save_osgnet(const std::string& path, const OsgNet& net) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  write_osgnet(out, net);
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

OsgNet load_osgnet(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open model file");
  try {
    return read_osgnet(in);
  } catch (const IoError& e) {
    throw IoError(path, e.what());
  }
}

}  // namespace deeposg
