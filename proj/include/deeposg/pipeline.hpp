#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deeposg/config.hpp"
#include "deeposg/dataset.hpp"
#include "deeposg/evaluator.hpp"
#include "deeposg/systems.hpp"
#include "deeposg/trainer.hpp"

namespace deeposg {

/// A configured problem: sampler, reference flow and state domain.
struct Problem {
  std::string name;
  int dim = 0;
  Box domain;
  StateSampler sample;
  FlowFn flow;
  double lipschitz = 0.0;
  std::optional<OdeSystem> system;
};

Problem make_problem(const ExperimentConfig& cfg);

/// Bursts in physical units, noise included.
BurstDataset generate_dataset(const ExperimentConfig& cfg);

/// Fresh network for a normalized dataset, time feature set from its lag range.
OsgNet initial_network(const ExperimentConfig& cfg, const NormStats& stats);

/// Trainer settings for one method; the semigroup box is normalized with `stats`.
TrainConfig make_train_config(const ExperimentConfig& cfg, LossKind method, const NormStats& stats);

/// Normalizes `physical` (when needed), trains and returns the result.
TrainResult train_method(const ExperimentConfig& cfg, LossKind method,
                         const BurstDataset& physical, const std::string& checkpoint = "");

/// Reference trajectories from initial states on an independent sub-stream.
TestSet make_config_test_set(const ExperimentConfig& cfg, const Problem& problem);

struct Evaluation {
  EvalReport report;
  ConsistencyReport consistency;
  std::vector<Rollout> sample_rollouts;
};

/// Error curve, partition spread and the partition-consistency check for one stepper.
Evaluation evaluate_stepper(const ExperimentConfig& cfg, const Problem& problem,
                            const TestSet& test, const Stepper& stepper, const std::string& label);

/// Copy of `cfg` with the swept parameter set to `value`.
ExperimentConfig with_sweep_value(const ExperimentConfig& cfg, double value);

}  // namespace deeposg
