#include "deeposg/evaluator.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "deeposg/error.hpp"
#include "deeposg/rng.hpp"
#include "deeposg/systems.hpp"

namespace deeposg {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Vector constant_steps(Eigen::Index count, double delta) { return Vector::Constant(count, delta); }

/// Population standard deviation, computed on values shifted by the first one
/// so that equal values give exactly zero.
double population_std(const Vector& values) {
  const Eigen::ArrayXd shifted = values.array() - values(0);
  const double mean = shifted.mean();
  return std::sqrt((shifted - mean).square().mean());
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

}  // namespace

Stepper model_stepper(const OsgNet& net, const NormStats& stats) {
  return [net, stats](const Matrix& u, const Vector& delta) {
    return stats.denormalize_states(osg_forward(net, stats.normalize_states(u), delta));
  };
}

Stepper raw_stepper(const OsgNet& net) {
  return [net](const Matrix& u, const Vector& delta) { return osg_forward(net, u, delta); };
}

Stepper flow_stepper(const FlowFn& flow) {
  return [flow](const Matrix& u, const Vector& delta) {
    Matrix out(u.rows(), u.cols());
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
      if (!u.col(c).allFinite()) {
        out.col(c) = u.col(c);
        continue;
      }
      out.col(c) = flow(u.col(c), delta(c));
    }
    return out;
  };
}

Rollout predict(const OsgNet& net, const StateVector& u0, const std::vector<double>& deltas,
                const NormStats& norm) {
  Rollout r;
  r.times.push_back(0.0);
  r.states.push_back(u0);
  StateVector v = norm.normalize_state(u0);
  double t = 0.0;
  for (double d : deltas) {
    v = osg_forward(net, v, d);
    StateVector u = norm.denormalize_state(v);
    if (!u.allFinite()) {
      r.diverged = true;
      break;
    }
    t += d;
    r.times.push_back(t);
    r.states.push_back(std::move(u));
    r.deltas.push_back(d);
  }
  return r;
}

Rollout predict(const Stepper& stepper, const StateVector& u0, const std::vector<double>& deltas) {
  Rollout r;
  r.times.push_back(0.0);
  r.states.push_back(u0);
  Matrix u = u0;
  double t = 0.0;
  for (double d : deltas) {
    u = stepper(u, constant_steps(1, d));
    if (!u.allFinite()) {
      r.diverged = true;
      break;
    }
    t += d;
    r.times.push_back(t);
    r.states.push_back(u.col(0));
    r.deltas.push_back(d);
  }
  return r;
}

TestSet make_test_set(const FlowFn& flow, const Matrix& initial, int steps, double delta) {
  if (steps < 1) throw DomainError("test set needs at least one step");
  if (!(delta > 0.0)) throw DomainError("test time step must be positive");
  TestSet t;
  t.delta = delta;
  t.steps = steps;
  t.states.push_back(initial);
  for (int m = 1; m <= steps; ++m) {
    Matrix next(initial.rows(), initial.cols());
    for (Eigen::Index c = 0; c < initial.cols(); ++c) {
      next.col(c) = flow(t.states.back().col(c), delta);
    }
    t.states.push_back(std::move(next));
  }
  return t;
}

Matrix sample_initial_states(int dim, int count, const std::function<Vector(Rng&)>& sample,
                             std::uint64_t seed) {
  Matrix out(dim, count);
  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    out.col(i) = sample(rng);
  }
  return out;
}

ErrorCurve mean_rel_error(const Stepper& stepper, const TestSet& test) {
  if (test.steps < 1 || test.states.size() != static_cast<std::size_t>(test.steps) + 1) {
    throw DomainError("error curve needs M >= 1 reference steps");
  }
  const Eigen::Index count = test.states[0].cols();
  if (count < 1) throw DomainError("error curve needs at least one trajectory");
  ErrorCurve curve;
  Matrix u = test.states[0];
  std::vector<bool> dead(static_cast<std::size_t>(count), false);
  for (int m = 1; m <= test.steps; ++m) {
    u = stepper(u, constant_steps(count, test.delta));
    const Matrix& ref = test.states[static_cast<std::size_t>(m)];
    double sum = 0.0;
    for (Eigen::Index i = 0; i < count; ++i) {
      const double nref = ref.col(i).norm();
      if (nref == 0.0) {
        throw DomainError("reference state of trajectory " + std::to_string(i) + " at t = " +
                          std::to_string(m * test.delta) + " has zero norm");
      }
      if (!u.col(i).allFinite()) dead[static_cast<std::size_t>(i)] = true;
      sum += dead[static_cast<std::size_t>(i)] ? inf : (ref.col(i) - u.col(i)).norm() / nref;
    }
    curve.times.push_back(m * test.delta);
    curve.errors.push_back(sum / static_cast<double>(count));
  }
  double total = 0.0;
  for (double e : curve.errors) total += e;
  curve.mean = total / static_cast<double>(curve.errors.size());
  for (bool d : dead) curve.diverged += d ? 1 : 0;
  return curve;
}

double Partition::total() const {
  double s = 0.0;
  for (double d : steps) s += d;
  return s;
}

Partition random_partition(double T, double dmin, double dmax, Rng& rng) {
  if (!(T > 0.0) || !(dmin > 0.0) || !(dmax >= dmin)) {
    throw DomainError("partition needs T > 0 and 0 < dmin <= dmax");
  }
  const long lo_count = std::max(1L, static_cast<long>(std::ceil(T / dmax - 1e-9)));
  const long hi_count = std::max(lo_count, static_cast<long>(std::floor(T / dmin + 1e-9)));
  const long count =
      lo_count + static_cast<long>(rng.index(static_cast<std::size_t>(hi_count - lo_count + 1)));
  std::vector<double> raw(static_cast<std::size_t>(count));
  double sum = 0.0;
  for (auto& r : raw) {
    r = rng.uniform(dmin, dmax);
    sum += r;
  }
  Partition p;
  p.steps.resize(raw.size());
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < raw.size(); ++s) {
    p.steps[s] = raw[s] * (T / sum);
    acc += p.steps[s];
  }
  p.steps.back() = T - acc;
  return p;
}

std::vector<Partition> random_partitions(double T, double dmin, double dmax, int count,
                                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Partition> out;
  for (int k = 0; k < count; ++k) out.push_back(random_partition(T, dmin, dmax, rng));
  return out;
}

Matrix rollout_end(const Stepper& stepper, const Matrix& initial, const Partition& partition) {
  Matrix u = initial;
  for (double d : partition.steps) u = stepper(u, constant_steps(u.cols(), d));
  return u;
}

PartitionStd partition_std(const Stepper& stepper, const Matrix& initial, const Matrix& truth_T,
                           const std::vector<Partition>& partitions) {
  if (partitions.size() < 2) throw DomainError("partition spread needs K >= 2");
  const Eigen::Index count = initial.cols();
  const std::size_t K = partitions.size();
  Matrix err(count, static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) {
    const Matrix end = rollout_end(stepper, initial, partitions[k]);
    for (Eigen::Index i = 0; i < count; ++i) {
      const double nref = truth_T.col(i).norm();
      if (nref == 0.0) throw DomainError("zero-norm reference end state");
      err(i, static_cast<Eigen::Index>(k)) =
          end.col(i).allFinite() ? (truth_T.col(i) - end.col(i)).norm() / nref : inf;
    }
  }
  PartitionStd out;
  double total = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!err.row(i).allFinite()) {
      ++out.diverged;
      total += inf;
      continue;
    }
    total += population_std(err.row(i).transpose());
  }
  out.sigma = total / static_cast<double>(count);
  return out;
}

double semigroup_residual(const Stepper& stepper, const Matrix& probes,
                          const std::vector<Partition>& partitions) {
  if (partitions.size() < 2) return 0.0;
  std::vector<Matrix> ends;
  for (const auto& p : partitions) ends.push_back(rollout_end(stepper, probes, p));
  double eps = 0.0;
  for (std::size_t k = 0; k < ends.size(); ++k) {
    for (std::size_t s = k + 1; s < ends.size(); ++s) {
      for (Eigen::Index i = 0; i < probes.cols(); ++i) {
        const double d = (ends[k].col(i) - ends[s].col(i)).norm();
        eps = std::isnan(d) ? inf : std::max(eps, d);
      }
    }
  }
  return eps;
}

double semigroup_residual(const OsgNet& net, const Matrix& probes,
                          const std::vector<Partition>& partitions) {
  return semigroup_residual(raw_stepper(net), probes, partitions);
}

ConsistencyReport consistency_check(const Stepper& stepper, const Matrix& probes, const Matrix& truth_T,
                              const std::vector<Partition>& partitions, double tolerance) {
  ConsistencyReport rep;
  const std::size_t K = partitions.size();
  if (K == 0) throw DomainError("consistency check needs at least one partition");
  std::vector<Matrix> ends;
  for (const auto& p : partitions) ends.push_back(rollout_end(stepper, probes, p));
  const double factor = static_cast<double>(K - 1) / static_cast<double>(K);
  rep.max_slack = -inf;
  for (Eigen::Index i = 0; i < probes.cols(); ++i) {
    Vector e(static_cast<Eigen::Index>(K));
    double eps = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      e(static_cast<Eigen::Index>(k)) = (ends[k].col(i) - truth_T.col(i)).norm();
      for (std::size_t s = k + 1; s < K; ++s) {
        eps = std::max(eps, (ends[k].col(i) - ends[s].col(i)).norm());
      }
    }
    const double sigma = population_std(e);
    const double bound = factor * eps;
    rep.sigma.push_back(sigma);
    rep.epsilon.push_back(eps);
    rep.bound.push_back(bound);
    const double slack = sigma - bound;
    rep.max_slack = std::max(rep.max_slack, slack);
    if (!(slack <= tolerance)) ++rep.violations;
  }
  rep.holds = rep.violations == 0;
  return rep;
}

double accumulated_error_bound(const BoundContext& ctx, double delta, int j) {
  if (j <= 0) return 0.0;
  if (ctx.lipschitz == 0.0) return j * delta * ctx.sup_error;
  const double L = ctx.lipschitz;
  return ctx.sup_error * delta * std::expm1(L * j * delta) / std::expm1(L * delta);
}

double accumulated_error_bound(const BoundContext& ctx, const std::vector<double>& steps) {
  double t_end = 0.0;
  for (double d : steps) t_end += d;
  double sum = 0.0;
  double t = 0.0;
  for (double d : steps) {
    t += d;
    sum += d * std::exp(ctx.lipschitz * (t_end - t));
  }
  return ctx.sup_error * sum;
}

double sampled_sup_error(const Stepper& model, const FlowFn& flow, const std::vector<Vector>& grid,
                         double dmin, double dmax, int delta_points) {
  if (grid.empty() || delta_points < 1) return 0.0;
  const Eigen::Index n = grid.front().size();
  Matrix states(n, static_cast<Eigen::Index>(grid.size()));
  for (std::size_t g = 0; g < grid.size(); ++g) states.col(static_cast<Eigen::Index>(g)) = grid[g];
  double worst = 0.0;
  for (int p = 0; p < delta_points; ++p) {
    const double d =
        delta_points == 1 ? dmin : dmin + (dmax - dmin) * p / static_cast<double>(delta_points - 1);
    const Matrix next = model(states, constant_steps(states.cols(), d));
    for (Eigen::Index c = 0; c < states.cols(); ++c) {
      const Vector model_inc = (next.col(c) - states.col(c)) / d;
      const Vector true_inc = (flow(states.col(c), d) - states.col(c)) / d;
      worst = std::max(worst, (model_inc - true_inc).norm());
    }
  }
  return worst;
}

LipschitzReport lipschitz_check(const OdeSystem& sys, const FlowFn& flow, double lipschitz, double delta,
                          int pairs, std::uint64_t seed, double tolerance) {
  if (!(delta > 0.0)) throw DomainError("Lipschitz check needs a positive time step");
  LipschitzReport rep;
  rep.pairs = pairs;
  const double factor = std::expm1(lipschitz * delta) / delta;
  for (int p = 0; p < pairs; ++p) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(p));
    const Vector u1 = sys.sample_state(rng);
    const Vector u2 = sys.sample_state(rng);
    const Vector phi1 = (flow(u1, delta) - u1) / delta;
    const Vector phi2 = (flow(u2, delta) - u2) / delta;
    const double lhs = (phi1 - phi2).norm();
    const double rhs = factor * (u1 - u2).norm();
    const double violation = (lhs - rhs) / std::max(rhs, 1e-300);
    rep.max_violation = std::max(rep.max_violation, violation);
    if (violation > tolerance) ++rep.violations;
  }
  return rep;
}

std::string EvalReport::curve_csv() const {
  std::ostringstream os;
  os << "t,mean_rel_error\n" << std::setprecision(17);
  for (std::size_t m = 0; m < curve.times.size(); ++m) {
    os << curve.times[m] << ',' << curve.errors[m] << '\n';
  }
  return os.str();
}

std::string EvalReport::summary() const {
  std::ostringstream os;
  os << "method: " << label << '\n';
  os << "Prediction error E_mean: " << fmt(curve.mean) << '\n';
  os << "Standard deviation sigma: " << fmt(spread.sigma) << '\n';
  os << "Partition residual epsilon: " << fmt(semigroup_epsilon) << '\n';
  os << "Diverged trajectories: " << curve.diverged << " (curve), " << spread.diverged
     << " (partitions)\n";
  if (seconds_per_epoch > 0.0) os << "Training time per epoch (s): " << fmt(seconds_per_epoch) << '\n';
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  out << text;
  if (!out) throw IoError(path, "write failed");
}

}  // namespace deeposg
