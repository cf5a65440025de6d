#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "deeposg/integrate.hpp"
#include "deeposg/loss.hpp"
#include "deeposg/osgnet.hpp"

namespace deeposg {

class Rng;
struct OdeSystem;

/// Per-channel affine maps to [-1, 1]: one channel per state component plus
/// the time-lag channel (stored as -log10 of the lag when `log_delta`).
struct NormStats {
  Vector lo, hi;
  std::vector<bool> degenerate;  // per state channel
  double delta_lo = 0.0, delta_hi = 0.0;
  bool delta_degenerate = false;
  bool log_delta = false;

  int dim() const { return static_cast<int>(lo.size()); }
  /// Identity maps for n channels.
  static NormStats identity(int n);

  Vector normalize_state(const Vector& u) const;
  Vector denormalize_state(const Vector& v) const;
  Matrix normalize_states(const Matrix& u) const;
  Matrix denormalize_states(const Matrix& v) const;
  /// Time-lag channel value in [-1, 1].
  double normalize_delta(double delta) const;
  /// Physical box mapped into normalized coordinates.
  Box normalize_box(const Box& box) const;
  /// Inner-network time feature for blocks of the given variant when the full
  /// lag is split across `blocks` blocks.
  TimeFeature time_feature(BlockVariant variant, int blocks) const;
};

struct Provenance {
  std::string system;
  std::string basis;
  std::uint64_t seed = 0;
  double delta_min = 0.0, delta_max = 0.0;
  bool log_delta = false;
  double noise = 0.0;

  std::string to_json() const;
  static Provenance from_json(const std::string& text);
};

struct BurstDataset {
  int dim = 0;
  std::vector<Burst> bursts;
  bool normalized = false;
  NormStats stats;
  Provenance provenance;

  std::size_t size() const { return bursts.size(); }
};

struct BurstSpec {
  std::size_t count = 0;
  double delta_min = 0.05;
  double delta_max = 0.15;
  bool log_delta = false;
};

using StateSampler = std::function<Vector(Rng&)>;

/// Generic burst generator: per-burst RNG sub-streams, states from `sample`,
/// lags uniform (or log-uniform), u1 and u2 from `flow`.
BurstDataset make_bursts_with(int dim, const BurstSpec& spec, const StateSampler& sample,
                              const FlowFn& flow, std::uint64_t seed);

/// Bursts of a registered ODE system with initial states from `domain`
/// (the system's own domain when `domain` is empty).
BurstDataset make_bursts(const OdeSystem& sys, const BurstSpec& spec, const Box& domain,
                         std::uint64_t seed, const IntegratorSpec& integrator);

/// Multiplicative uniform noise u (1 + eps), eps in [-eta, eta], on every state.
BurstDataset add_noise(const BurstDataset& ds, double eta, std::uint64_t seed);

/// Min/max statistics over all stored states and lags.
NormStats compute_norm_stats(const BurstDataset& ds, bool log_delta);
/// Maps states into [-1, 1] per channel. Lags stay physical; their channel
/// statistics drive the network's time feature.
BurstDataset normalize(const BurstDataset& ds);
BurstDataset normalize(const BurstDataset& ds, const NormStats& stats);
BurstDataset denormalize(const BurstDataset& ds);

/// Per-epoch train/validation partition of burst indices.
struct SplitView {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::uint64_t epoch = 0;
};

/// Fresh permutation for (seed, epoch); the first ceil(fraction J) indices
/// validate (at most J - 1), the rest train.
SplitView dynamic_split(std::size_t dataset_size, double fraction, std::uint64_t epoch,
                        std::uint64_t seed);

/// "OSGDAT1" binary file: n, J, normalized flag, channel stats, provenance
/// JSON, then columnar u0, d1, u1, d2, u2.
void save_dataset(const std::string& path, const BurstDataset& ds);
BurstDataset load_dataset(const std::string& path);
/// One burst per row: u0..., d1, u1..., d2, u2...
void export_csv(const std::string& path, const BurstDataset& ds);

}  // namespace deeposg
