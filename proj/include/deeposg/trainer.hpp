#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deeposg/dataset.hpp"
#include "deeposg/loss.hpp"
#include "deeposg/optim.hpp"
#include "deeposg/osgnet.hpp"

namespace deeposg {

struct TrainConfig {
  int epochs = 20000;
  int batch_size = 5;
  LossSpec loss;
  CyclicLrConfig lr;
  double validation_fraction = 0.10;
  bool dynamic_validation = true;
  /// Validate after every k-th mini-batch (and after the last one of an epoch).
  int validation_every = 1;
  int history_interval = 50;
  /// Fixed semigroup probe tuples used for the sg_residual history column.
  int probe_tuples = 100;
  std::uint64_t split_seed = 3;
  std::uint64_t tuple_seed = 2;
  std::string checkpoint_path;

  void validate() const;
};

struct HistoryRow {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double sg_residual = 0.0;
  double lr = 0.0;
};

struct TrainHistory {
  std::vector<HistoryRow> rows;

  void write_csv(const std::string& path) const;
  std::string to_csv() const;
};

struct TrainResult {
  OsgNet best_net;
  TrainHistory history;
  double best_validation = 0.0;
  std::uint64_t optimizer_steps = 0;
  double seconds_per_epoch = 0.0;
};

enum class SplitPart { train, validation };

/// Mean loss over one side of a split. GDSG is scored on its data term only.
double evaluate_split_loss(const OsgNet& net, const BurstDataset& ds, const SplitView& view,
                           SplitPart which, const LossSpec& loss);

/// Loss used to rank checkpoints: the method's own loss, or the data term for GDSG.
LossSpec validation_spec(const LossSpec& loss);

/// Fixed probe tuples drawn from the tuple seed; empty when the loss spec has
/// no usable domain.
std::vector<SgTuple> probe_tuples(const LossSpec& loss, int count, std::uint64_t tuple_seed);

/// Mini-batch training with Adam and a cyclic learning rate. Returns the
/// parameters that achieved the lowest validation loss, not the final ones.
TrainResult train(const OsgNet& net, const BurstDataset& ds, const TrainConfig& cfg);

}  // namespace deeposg
