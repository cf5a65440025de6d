#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "deeposg/linalg.hpp"
#include "deeposg/mlp.hpp"

namespace deeposg {

class Rng;

enum class BlockVariant { standard, multiscale };
enum class Sharing { recursive, recurrent };

std::string to_string(BlockVariant v);
std::string to_string(Sharing s);
BlockVariant parse_block_variant(const std::string& s);
Sharing parse_sharing(const std::string& s);

/// Affine map applied to the raw time input before it reaches the inner MLP:
/// feature = scale * raw + offset, with raw = delta (standard) or -log10(delta)
/// (multiscale). The skip term always multiplies by the physical delta.
struct TimeFeature {
  double scale = 1.0;
  double offset = 0.0;
};

/// Raw time input for one block.
double time_raw(BlockVariant variant, double delta);
/// d raw / d delta.
double time_raw_derivative(BlockVariant variant, double delta);

struct OsgNet {
  int state_dim = 0;
  int block_count = 1;
  Sharing sharing = Sharing::recursive;
  std::vector<BlockVariant> variants;  // one per block
  std::vector<MlpParams> params;       // block_count entries, or one when recurrent
  TimeFeature time_feature;

  /// Parameters used by block k (the shared set when recurrent).
  const MlpParams& block(int k) const;
  std::size_t parameter_count() const;
  /// Zero-valued gradient accumulators matching `params`.
  std::vector<MlpParams> zero_grads() const;
  /// Throws DimensionError naming the first bad block.
  void validate() const;
};

/// Architecture description used to build fresh networks.
struct NetSpec {
  std::vector<int> hidden{30, 30, 30};
  int block_count = 1;
  Sharing sharing = Sharing::recursive;
  BlockVariant variant = BlockVariant::standard;
  bool zero_output_layer = false;
};

OsgNet make_osgnet(int state_dim, const NetSpec& spec, Rng& rng);
/// Every parameter zero: the exact identity map.
OsgNet make_zero_osgnet(int state_dim, const NetSpec& spec);

struct BlockTape {
  MlpTape mlp;
  Matrix increment;  // inner MLP output, n x B
  Vector delta;      // per-column block time step
};

/// Activation record of a batched forward pass through all K blocks.
struct ForwardTape {
  int state_dim = 0;
  std::vector<BlockTape> blocks;
};

/// Batched forward. Column b of `u` advances by delta(b); each block sees delta/K.
Matrix osg_forward(const OsgNet& net, const Matrix& u, const Vector& delta,
                   ForwardTape* tape = nullptr);

/// Reverse pass for <upstream, output>. Adds parameter gradients into `grads`
/// (shaped like net.params). Returns the gradient with respect to the input
/// state; when d_delta is non-null it receives the gradient with respect to delta.
Matrix osg_backprop(const OsgNet& net, const ForwardTape& tape, const Matrix& upstream,
                    std::vector<MlpParams>& grads, Vector* d_delta = nullptr);

/// Single-state conveniences.
StateVector osg_forward(const OsgNet& net, const StateVector& u, double delta,
                        ForwardTape* tape = nullptr);

struct OsgBackpropResult {
  std::vector<MlpParams> grads;
  StateVector input_grad;
  double d_delta = 0.0;
};

OsgBackpropResult osg_backprop(const OsgNet& net, const ForwardTape& tape,
                               const StateVector& upstream);

/// One block: u + delta * N(u, feature(delta)).
StateVector osg_block_forward(const MlpParams& block, const StateVector& u, double delta,
                              BlockVariant variant, const TimeFeature& feature = {});

/// Fixed-step residual network: u + N(u).
StateVector plain_resnet_forward(const MlpParams& block, const StateVector& u);

/// Header "OSGMDL1", n, K, sharing, parameter-set count, per-block variant,
/// time-feature scale and offset, then each parameter set in OSGNET1 format.
void write_osgnet(std::ostream& out, const OsgNet& net);
OsgNet read_osgnet(std::istream& in);
void save_osgnet(const std::string& path, const OsgNet& net);
OsgNet load_osgnet(const std::string& path);

}  // namespace deeposg
