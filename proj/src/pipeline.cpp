#include "deeposg/pipeline.hpp"

#include <cmath>

#include "deeposg/error.hpp"
#include "deeposg/modal.hpp"
#include "deeposg/rng.hpp"

namespace deeposg {

namespace {

constexpr std::uint64_t noise_stream = 0x4e4f495345ULL;
constexpr std::uint64_t test_stream = 0x54455354ULL;

Box config_box(const std::vector<double>& lo, const std::vector<double>& hi) {
  Box b;
  b.lo = Eigen::Map<const Vector>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  b.hi = Eigen::Map<const Vector>(hi.data(), static_cast<Eigen::Index>(hi.size()));
  return b;
}

BurstSpec burst_spec(const ExperimentConfig& cfg) {
  BurstSpec spec;
  spec.count = cfg.dataset.bursts;
  spec.delta_min = cfg.dataset.delta_min;
  spec.delta_max = cfg.dataset.delta_max;
  spec.log_delta = cfg.dataset.log_delta;
  return spec;
}

}  // namespace

Problem make_problem(const ExperimentConfig& cfg) {
  Problem p;
  p.name = cfg.problem;
  const Box override_box = config_box(cfg.dataset.domain_lo, cfg.dataset.domain_hi);
  if (cfg.kind == "ode") {
    p.system = make_system(cfg.problem);
    const OdeSystem& sys = *p.system;
    p.dim = sys.dim;
    p.flow = make_flow(sys, cfg.dataset.integrator);
    p.lipschitz = sys.lipschitz;
    if (override_box.dim() > 0) {
      p.domain = override_box;
      p.sample = [box = override_box](Rng& rng) { return box.sample(rng); };
    } else {
      p.domain = sys.box;
      p.sample = [sys](Rng& rng) { return sys.sample_state(rng); };
    }
  } else if (cfg.kind == "modal") {
    const ModalPde pde = parse_modal_pde(cfg.problem);
    p.dim = modal_dim(pde);
    p.domain = override_box.dim() > 0 ? override_box : modal_default_domain(pde);
    p.flow = [pde](const Vector& v, double d) { return modal_reference_evolve(pde, v, d); };
    p.sample = [box = p.domain](Rng& rng) { return box.sample(rng); };
  } else {
    throw ConfigError("field 'kind': expected 'ode' or 'modal'");
  }
  if (p.domain.dim() != p.dim) throw ConfigError("field 'dataset.domain': wrong dimension");
  return p;
}

BurstDataset generate_dataset(const ExperimentConfig& cfg) {
  cfg.validate();
  const BurstSpec spec = burst_spec(cfg);
  const Box override_box = config_box(cfg.dataset.domain_lo, cfg.dataset.domain_hi);
  BurstDataset ds;
  if (cfg.kind == "ode") {
    const OdeSystem sys = make_system(cfg.problem);
    ds = make_bursts(sys, spec, override_box, cfg.seeds.dataset, cfg.dataset.integrator);
  } else {
    const ModalPde pde = parse_modal_pde(cfg.problem);
    ds = make_modal_bursts(pde, spec, override_box, cfg.seeds.dataset);
  }
  if (cfg.dataset.noise > 0.0) {
    ds = add_noise(ds, cfg.dataset.noise, stream_seed(cfg.seeds.dataset, noise_stream));
  }
  return ds;
}

OsgNet initial_network(const ExperimentConfig& cfg, const NormStats& stats) {
  Rng rng(cfg.seeds.init);
  OsgNet net = make_osgnet(stats.dim(), cfg.network.spec, rng);
  net.time_feature = stats.time_feature(cfg.network.spec.variant, cfg.network.spec.block_count);
  return net;
}

TrainConfig make_train_config(const ExperimentConfig& cfg, LossKind method, const NormStats& stats) {
  const TrainingConfig& t = cfg.training;
  TrainConfig tc;
  tc.epochs = t.epochs;
  tc.batch_size = t.batch_size;
  tc.lr = t.lr;
  tc.validation_fraction = t.validation_fraction;
  tc.dynamic_validation = t.dynamic_validation;
  tc.validation_every = t.validation_every;
  tc.history_interval = t.history_interval;
  tc.probe_tuples = t.probe_tuples;
  tc.split_seed = cfg.seeds.split;
  tc.tuple_seed = cfg.seeds.tuples;
  tc.loss.kind = method;
  tc.loss.lambda = t.lambda;
  tc.loss.q = t.q;
  tc.loss.metric = t.metric;
  tc.loss.delta_min = cfg.dataset.delta_min;
  tc.loss.delta_max = cfg.dataset.delta_max;
  tc.loss.log_uniform_delta = cfg.dataset.log_delta;
  Box physical = config_box(t.sg_domain_lo, t.sg_domain_hi);
  if (physical.dim() == 0) physical = make_problem(cfg).domain;
  tc.loss.domain = stats.normalize_box(physical);
  return tc;
}

TrainResult train_method(const ExperimentConfig& cfg, LossKind method,
                         const BurstDataset& physical, const std::string& checkpoint) {
  const BurstDataset norm = physical.normalized ? physical : normalize(physical);
  TrainConfig tc = make_train_config(cfg, method, norm.stats);
  tc.checkpoint_path = checkpoint;
  return train(initial_network(cfg, norm.stats), norm, tc);
}

TestSet make_config_test_set(const ExperimentConfig& cfg, const Problem& problem) {
  const Matrix initial =
      sample_initial_states(problem.dim, cfg.evaluation.trajectories, problem.sample,
                            stream_seed(cfg.seeds.dataset, test_stream));
  return make_test_set(problem.flow, initial, cfg.evaluation.steps, cfg.eval_delta());
}

Evaluation evaluate_stepper(const ExperimentConfig& cfg, const Problem& problem,
                            const TestSet& test, const Stepper& stepper, const std::string& label) {
  Evaluation out;
  out.report.label = label;
  out.report.curve = mean_rel_error(stepper, test);

  const double horizon = cfg.eval_horizon();
  const Matrix& initial = test.states.front();
  Matrix truth_T;
  const double grid_T = test.steps * test.delta;
  if (std::abs(horizon - grid_T) <= 1e-12 * std::max(1.0, horizon)) {
    truth_T = test.states.back();
  } else {
    truth_T.resize(initial.rows(), initial.cols());
    for (Eigen::Index c = 0; c < initial.cols(); ++c) {
      truth_T.col(c) = problem.flow(initial.col(c), horizon);
    }
  }
  const auto partitions = random_partitions(horizon, cfg.dataset.delta_min, cfg.dataset.delta_max,
                                            cfg.evaluation.partitions, cfg.seeds.partition);
  out.report.spread = partition_std(stepper, initial, truth_T, partitions);

  const int probes = std::min<int>(cfg.evaluation.consistency_probes, static_cast<int>(initial.cols()));
  const std::vector<Partition> consistency_parts(
      partitions.begin(),
      partitions.begin() + std::min<std::ptrdiff_t>(cfg.evaluation.consistency_partitions,
                                                    static_cast<std::ptrdiff_t>(partitions.size())));
  const Matrix probe_states = initial.leftCols(probes);
  out.consistency = consistency_check(stepper, probe_states, truth_T.leftCols(probes), consistency_parts);
  out.report.semigroup_epsilon = semigroup_residual(stepper, probe_states, consistency_parts);

  const std::vector<double> deltas(static_cast<std::size_t>(test.steps), test.delta);
  out.sample_rollouts.push_back(predict(stepper, initial.col(0), deltas));
  return out;
}

ExperimentConfig with_sweep_value(const ExperimentConfig& cfg, double value) {
  ExperimentConfig c = cfg;
  if (cfg.sweep.parameter == "lambda") {
    c.training.lambda = value;
  } else if (cfg.sweep.parameter == "q") {
    c.training.q = static_cast<int>(std::lround(value));
  } else {
    throw ConfigError("field 'sweep.parameter': no sweep configured");
  }
  return c;
}

}  // namespace deeposg
