#include "deeposg/mlp.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "deeposg/binary_io.hpp"
#include "deeposg/error.hpp"
#include "deeposg/rng.hpp"

namespace deeposg {

namespace {

constexpr double inv_sqrt2 = 0.70710678118654752440;
constexpr double inv_sqrt_2pi = 0.39894228040143267794;
constexpr char mlp_magic[8] = {'O', 'S', 'G', 'N', 'E', 'T', '1', '\0'};

}  // namespace

double gelu(double x) { return x * (0.5 * (1.0 + std::erf(x * inv_sqrt2))); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
  const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    count += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return count;
}

MlpParams MlpParams::zeros_like() const {
  MlpParams out;
  out.widths = widths;
  out.weights.reserve(weights.size());
  out.biases.reserve(biases.size());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.weights.push_back(Matrix::Zero(weights[l].rows(), weights[l].cols()));
    out.biases.push_back(Vector::Zero(biases[l].size()));
  }
  return out;
}

void MlpParams::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

void MlpParams::add_scaled(const MlpParams& other, double scale) {
  if (other.weights.size() != weights.size()) {
    throw DimensionError("mlp", "layer count mismatch in accumulation");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (other.weights[l].rows() != weights[l].rows() ||
        other.weights[l].cols() != weights[l].cols()) {
      throw DimensionError("layer " + std::to_string(l), "shape mismatch in accumulation");
    }
    weights[l].noalias() += scale * other.weights[l];
    biases[l].noalias() += scale * other.biases[l];
  }
}

bool MlpParams::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

void MlpParams::validate() const {
  if (widths.size() < 2) throw DimensionError("mlp", "need at least input and output widths");
  if (weights.size() != widths.size() - 1 || biases.size() != widths.size() - 1) {
    throw DimensionError("mlp", "layer count does not match widths");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const std::string where = "layer " + std::to_string(l);
    if (widths[l] < 1 || widths[l + 1] < 1) throw DimensionError(where, "non-positive width");
    if (weights[l].rows() != widths[l + 1] || weights[l].cols() != widths[l]) {
      throw DimensionError(where, "weight shape " + std::to_string(weights[l].rows()) + "x" +
                                      std::to_string(weights[l].cols()) + " expected " +
                                      std::to_string(widths[l + 1]) + "x" +
                                      std::to_string(widths[l]));
    }
    if (biases[l].size() != widths[l + 1]) throw DimensionError(where, "bias length mismatch");
  }
}

Vector MlpParams::flatten() const {
  Vector flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.segment(at, weights[l].size()) = weights[l].reshaped();
    at += weights[l].size();
    flat.segment(at, biases[l].size()) = biases[l];
    at += biases[l].size();
  }
  return flat;
}

void MlpParams::assign_flat(const Vector& flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count())) {
    throw DimensionError("mlp", "flat parameter vector has wrong length");
  }
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l].reshaped() = flat.segment(at, weights[l].size());
    at += weights[l].size();
    biases[l] = flat.segment(at, biases[l].size());
    at += biases[l].size();
  }
}

MlpParams make_mlp(const std::vector<int>& widths) {
  MlpParams p;
  p.widths = widths;
  if (widths.size() < 2) throw DimensionError("mlp", "need at least input and output widths");
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    if (widths[l] < 1 || widths[l + 1] < 1) {
      throw DimensionError("layer " + std::to_string(l), "non-positive width");
    }
    p.weights.push_back(Matrix::Zero(widths[l + 1], widths[l]));
    p.biases.push_back(Vector::Zero(widths[l + 1]));
  }
  return p;
}

MlpParams make_mlp_glorot(const std::vector<int>& widths, Rng& rng) {
  MlpParams p = make_mlp(widths);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const double limit = std::sqrt(6.0 / (widths[l] + widths[l + 1]));
    Matrix& w = p.weights[l];
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-limit, limit);
    }
  }
  return p;
}

Matrix mlp_forward(const MlpParams& params, const Matrix& x, MlpTape* tape) {
  const std::size_t layers = params.weights.size();
  if (layers == 0) throw DimensionError("mlp", "no layers");
  if (x.rows() != params.weights[0].cols()) {
    throw DimensionError("layer 0", "input has " + std::to_string(x.rows()) +
                                        " rows, expected " +
                                        std::to_string(params.weights[0].cols()));
  }
  if (tape) {
    tape->widths = params.widths;
    tape->batch = x.cols();
    tape->input = x;
    tape->hidden.resize(layers - 1);
    tape->slope.resize(layers - 1);
  }
  Matrix a = x;
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = params.weights[l];
    if (a.rows() != w.cols()) {
      throw DimensionError("layer " + std::to_string(l), "incompatible with previous layer");
    }
    Matrix z = w * a;
    z.colwise() += params.biases[l];
    if (l + 1 == layers) return z;
    if (tape) {
      Matrix& s = tape->slope[l];
      s.resize(z.rows(), z.cols());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double v = z.data()[i];
        const double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
        s.data()[i] = cdf + v * (inv_sqrt_2pi * std::exp(-0.5 * v * v));
        z.data()[i] = v * cdf;
      }
      tape->hidden[l] = z;
    } else {
      for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = gelu(z.data()[i]);
    }
    a = std::move(z);
  }
  return a;
}

Matrix mlp_backprop(const MlpParams& params, const MlpTape& tape, const Matrix& upstream,
                    MlpParams& grads) {
  const std::size_t layers = params.weights.size();
  if (tape.widths != params.widths || tape.hidden.size() + 1 != layers ||
      tape.input.cols() != tape.batch) {
    throw DimensionError("mlp tape", "tape does not match the network");
  }
  if (upstream.rows() != params.output_width() || upstream.cols() != tape.batch) {
    throw DimensionError("mlp tape", "upstream shape does not match the forward output");
  }
  if (grads.weights.size() != layers) {
    throw DimensionError("mlp grads", "gradient accumulator has the wrong layer count");
  }
  Matrix delta = upstream;
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& prev = (l == 0) ? tape.input : tape.hidden[l - 1];
    grads.weights[l].noalias() += delta * prev.transpose();
    grads.biases[l].noalias() += delta.rowwise().sum();
    Matrix back = params.weights[l].transpose() * delta;
    if (l > 0) back.array() *= tape.slope[l - 1].array();
    delta = std::move(back);
  }
  return delta;
}

MlpForwardResult mlp_forward(const MlpParams& params, const StateVector& x) {
  MlpForwardResult r;
  r.y = mlp_forward(params, Matrix(x), &r.tape).col(0);
  return r;
}

MlpBackpropResult mlp_backprop(const MlpParams& params, const MlpTape& tape,
                               const StateVector& upstream) {
  MlpBackpropResult r;
  r.param_grads = params.zeros_like();
  r.input_grad = mlp_backprop(params, tape, Matrix(upstream), r.param_grads).col(0);
  return r;
}

void write_mlp(std::ostream& out, const MlpParams& params) {
  params.validate();
  out.write(mlp_magic, sizeof mlp_magic);
  write_u32(out, static_cast<std::uint32_t>(params.widths.size()));
  for (int w : params.widths) write_u32(out, static_cast<std::uint32_t>(w));
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const Matrix& w = params.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) write_f64(out, w(r, c));
    }
    for (Eigen::Index i = 0; i < params.biases[l].size(); ++i) write_f64(out, params.biases[l](i));
  }
  if (!out) throw IoError("<stream>", "failed writing network parameters");
}

MlpParams read_mlp(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, mlp_magic, sizeof magic) != 0) {
    throw IoError("<stream>", "not an OSGNET1 parameter block");
  }
  const std::uint32_t count = read_u32(in);
  if (count < 2 || count > 4096) throw IoError("<stream>", "implausible layer count");
  std::vector<int> widths(count);
  for (auto& w : widths) {
    const std::uint32_t v = read_u32(in);
    if (v == 0 || v > (1u << 20)) throw IoError("<stream>", "implausible layer width");
    w = static_cast<int>(v);
  }
  MlpParams p = make_mlp(widths);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    Matrix& w = p.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = read_f64(in);
    }
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) p.biases[l](i) = read_f64(in);
  }
  return p;
}

}  // namespace deeposg
