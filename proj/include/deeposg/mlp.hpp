#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "deeposg/linalg.hpp"

namespace deeposg {

class Rng;

/// Exact GELU, x * Phi(x) with Phi the standard normal CDF.
double gelu(double x);
/// d/dx gelu(x) = Phi(x) + x * phi(x).
double gelu_derivative(double x);

/// Dense feed-forward network: GELU on every hidden layer, affine output.
/// widths = {input, hidden..., output}; layer l maps widths[l] -> widths[l+1].
struct MlpParams {
  std::vector<int> widths;
  std::vector<Matrix> weights;  // weights[l] is widths[l+1] x widths[l]
  std::vector<Vector> biases;   // biases[l] has widths[l+1] entries

  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;

  /// Same shape, every entry zero. Used for gradient accumulators.
  MlpParams zeros_like() const;
  void set_zero();
  /// this += scale * other (shapes must match).
  void add_scaled(const MlpParams& other, double scale);
  bool all_finite() const;

  /// Throws DimensionError naming the first inconsistent layer.
  void validate() const;

  /// Flat views for tests and optimizers: weights (column-major), then bias, per layer.
  Vector flatten() const;
  void assign_flat(const Vector& flat);
};

/// Zero parameters of the given shape.
MlpParams make_mlp(const std::vector<int>& widths);
/// Glorot-uniform weights, zero biases.
MlpParams make_mlp_glorot(const std::vector<int>& widths, Rng& rng);

/// Activation record from a batched forward pass (one column per sample).
struct MlpTape {
  std::vector<int> widths;
  Eigen::Index batch = 0;
  Matrix input;
  std::vector<Matrix> hidden;  // post-activation of each hidden layer
  std::vector<Matrix> slope;   // gelu'(pre-activation) of each hidden layer
};

/// Batched forward: x is (input_width x B), result is (output_width x B).
/// When tape is non-null it receives what mlp_backprop needs.
Matrix mlp_forward(const MlpParams& params, const Matrix& x, MlpTape* tape = nullptr);

/// Batched reverse pass for <upstream, y>. Parameter gradients are added into
/// `grads` (which must have the parameter shape); returns the input gradient.
Matrix mlp_backprop(const MlpParams& params, const MlpTape& tape, const Matrix& upstream,
                    MlpParams& grads);

struct MlpForwardResult {
  StateVector y;
  MlpTape tape;
};

struct MlpBackpropResult {
  MlpParams param_grads;
  StateVector input_grad;
};

MlpForwardResult mlp_forward(const MlpParams& params, const StateVector& x);
MlpBackpropResult mlp_backprop(const MlpParams& params, const MlpTape& tape,
                               const StateVector& upstream);

/// Binary format: "OSGNET1", u32 width count, u32 widths, then for each layer
/// the row-major weight matrix followed by the bias, all little-endian f64.
void write_mlp(std::ostream& out, const MlpParams& params);
MlpParams read_mlp(std::istream& in);

}  // namespace deeposg
