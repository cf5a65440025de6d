#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deeposg/integrate.hpp"
#include "deeposg/loss.hpp"
#include "deeposg/optim.hpp"
#include "deeposg/osgnet.hpp"

namespace deeposg {

/// Five independent randomness sources.
struct SeedSet {
  std::uint64_t dataset = 1;
  std::uint64_t init = 2;
  std::uint64_t tuples = 3;
  std::uint64_t split = 4;
  std::uint64_t partition = 5;

  bool operator==(const SeedSet&) const = default;
};

struct DatasetConfig {
  std::size_t bursts = 10;
  double delta_min = 0.05;
  double delta_max = 0.15;
  bool log_delta = false;
  /// Initial-state box; empty selects the problem's own domain.
  std::vector<double> domain_lo, domain_hi;
  double noise = 0.0;
  IntegratorSpec integrator;

  bool operator==(const DatasetConfig& o) const;
};

struct NetworkConfig {
  NetSpec spec;

  bool operator==(const NetworkConfig& o) const;
};

struct TrainingConfig {
  int epochs = 20000;
  int batch_size = 5;
  double lambda = 1.0;
  int q = 5;
  MetricKind metric = MetricKind::l2_squared;
  CyclicLrConfig lr;
  double validation_fraction = 0.10;
  bool dynamic_validation = true;
  int validation_every = 1;
  int history_interval = 50;
  int probe_tuples = 100;
  /// Semigroup sampling box in physical units; empty selects the dataset domain.
  std::vector<double> sg_domain_lo, sg_domain_hi;

  bool operator==(const TrainingConfig& o) const;
};

struct EvaluationConfig {
  int trajectories = 100;
  int steps = 20;
  /// Prediction step; 0 selects (delta_min + delta_max) / 2.
  double delta = 0.0;
  int partitions = 100;
  /// Partition horizon; 0 selects steps * delta.
  double horizon = 0.0;
  int consistency_probes = 20;
  int consistency_partitions = 10;

  bool operator==(const EvaluationConfig& o) const = default;
};

struct SweepConfig {
  std::string parameter;  // "", "lambda" or "q"
  std::vector<double> values;

  bool operator==(const SweepConfig& o) const = default;
};

struct ExperimentConfig {
  std::string name;
  /// "ode" (registered system) or "modal" (PDE in coefficient space).
  std::string kind = "ode";
  std::string problem = "linear";
  DatasetConfig dataset;
  NetworkConfig network;
  TrainingConfig training;
  EvaluationConfig evaluation;
  SeedSet seeds;
  std::vector<LossKind> methods{LossKind::baseline, LossKind::lisg, LossKind::gdsg};
  SweepConfig sweep;

  bool operator==(const ExperimentConfig& o) const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
  double eval_delta() const;
  double eval_horizon() const;
};

/// Parses a JSON document; errors name the line or the field path.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path_or_name);
std::string config_to_json(const ExperimentConfig& cfg);

std::vector<std::string> bundled_config_names();
/// Throws ConfigError for an unknown name.
ExperimentConfig bundled_config(const std::string& name);

}  // namespace deeposg
