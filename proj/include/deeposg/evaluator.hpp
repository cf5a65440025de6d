#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "deeposg/dataset.hpp"
#include "deeposg/integrate.hpp"
#include "deeposg/osgnet.hpp"

namespace deeposg {

class Rng;
struct OdeSystem;

/// Advances every column of a state matrix by the matching time step.
using Stepper = std::function<Matrix(const Matrix&, const Vector&)>;

/// The trained network in physical units: normalize, step, denormalize.
Stepper model_stepper(const OsgNet& net, const NormStats& stats);
/// The network acting directly on its own (normalized) coordinates.
Stepper raw_stepper(const OsgNet& net);
/// A reference flow map standing in for the model.
Stepper flow_stepper(const FlowFn& flow);

struct Rollout {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> deltas;
  /// Set when a non-finite state appeared; the rollout stops before it.
  bool diverged = false;
};

/// Recursive prediction from u0 (physical units) through the given steps.
Rollout predict(const OsgNet& net, const StateVector& u0, const std::vector<double>& deltas,
                const NormStats& norm);
Rollout predict(const Stepper& stepper, const StateVector& u0, const std::vector<double>& deltas);

/// Reference trajectories at t_m = m * delta, m = 0..steps; states[m] is n x I.
struct TestSet {
  double delta = 0.0;
  int steps = 0;
  std::vector<Matrix> states;

  int trajectories() const { return states.empty() ? 0 : static_cast<int>(states[0].cols()); }
};

TestSet make_test_set(const FlowFn& flow, const Matrix& initial, int steps, double delta);
/// Initial states drawn from `sample` on per-trajectory RNG sub-streams.
Matrix sample_initial_states(int dim, int count, const std::function<Vector(Rng&)>& sample,
                             std::uint64_t seed);

struct ErrorCurve {
  std::vector<double> times;
  std::vector<double> errors;  // mean relative l2 error at each time
  double mean = 0.0;
  int diverged = 0;
};

/// Mean over trajectories of |u - u_pred| / |u| at each t_m, m = 1..M, and the
/// average over m. Throws DomainError for a zero-norm reference state.
ErrorCurve mean_rel_error(const Stepper& stepper, const TestSet& test);

/// Positive steps summing to T.
struct Partition {
  std::vector<double> steps;
  double total() const;
};

/// Step count uniform over [ceil(T/dmax), floor(T/dmin)], steps uniform in
/// [dmin, dmax], rescaled so they sum to T (the last one absorbs rounding).
Partition random_partition(double T, double dmin, double dmax, Rng& rng);
std::vector<Partition> random_partitions(double T, double dmin, double dmax, int count,
                                         std::uint64_t seed);

/// End states of every column after stepping through a partition.
Matrix rollout_end(const Stepper& stepper, const Matrix& initial, const Partition& partition);

struct PartitionStd {
  double sigma = 0.0;
  int diverged = 0;
};

/// Mean over trajectories of the population standard deviation, across
/// partitions, of the relative end-time error.
PartitionStd partition_std(const Stepper& stepper, const Matrix& initial, const Matrix& truth_T,
                           const std::vector<Partition>& partitions);

/// Largest distance between end states of any two partitions over all probes.
double semigroup_residual(const Stepper& stepper, const Matrix& probes,
                          const std::vector<Partition>& partitions);
double semigroup_residual(const OsgNet& net, const Matrix& probes,
                          const std::vector<Partition>& partitions);

struct ConsistencyReport {
  std::vector<double> sigma;  // per probe state
  std::vector<double> epsilon;
  std::vector<double> bound;
  double max_slack = 0.0;  // largest sigma - bound
  int violations = 0;
  bool holds = true;
};

/// Checks std_k(|u_k(T) - u(T)|) <= (K-1)/K * eps per probe, eps being that
/// probe's largest pairwise end-state distance. Slack above `tolerance` counts
/// as a violation.
ConsistencyReport consistency_check(const Stepper& stepper, const Matrix& probes, const Matrix& truth_T,
                              const std::vector<Partition>& partitions, double tolerance = 1e-12);

struct BoundContext {
  double lipschitz = 0.0;
  double sup_error = 0.0;
};

/// sup_error * delta (e^{L j delta} - 1) / (e^{L delta} - 1); j delta sup_error when L = 0.
double accumulated_error_bound(const BoundContext& ctx, double delta, int j);
/// sup_error * sum_s d_s e^{L (t_j - t_{s+1})} for arbitrary steps d_0..d_{j-1}.
double accumulated_error_bound(const BoundContext& ctx, const std::vector<double>& steps);

/// Sampled estimate of max |N(u, d) - (flow_d(u) - u) / d| over grid states and
/// `delta_points` equally spaced lags in [dmin, dmax], in physical units.
double sampled_sup_error(const Stepper& model, const FlowFn& flow, const std::vector<Vector>& grid,
                         double dmin, double dmax, int delta_points);

struct LipschitzReport {
  int pairs = 0;
  double max_violation = 0.0;  // largest (lhs - rhs) / max(rhs, tiny)
  int violations = 0;          // pairs whose relative violation exceeds the tolerance
};

/// Compares |phi(u1,d) - phi(u2,d)| with (e^{L d} - 1)/d |u1 - u2| for random
/// pairs from the system domain, phi from the reference flow.
LipschitzReport lipschitz_check(const OdeSystem& sys, const FlowFn& flow, double lipschitz, double delta,
                          int pairs, std::uint64_t seed, double tolerance = 1e-8);

/// Per-time error curve CSV ("t,mean_rel_error") and a summary block.
struct EvalReport {
  std::string label;
  ErrorCurve curve;
  PartitionStd spread;
  double semigroup_epsilon = 0.0;
  double seconds_per_epoch = 0.0;

  std::string curve_csv() const;
  std::string summary() const;
};

void write_text(const std::string& path, const std::string& text);

}  // namespace deeposg
