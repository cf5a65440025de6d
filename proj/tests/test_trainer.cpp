#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "deeposg/error.hpp"
#include "deeposg/rng.hpp"
#include "deeposg/systems.hpp"
#include "deeposg/trainer.hpp"
#include "support.hpp"

using namespace deeposg;

namespace {

BurstDataset constant_dataset(std::size_t count) {
  BurstSpec spec;
  spec.count = count;
  const FlowFn still = [](const Vector& u, double) { return u; };
  const StateSampler sampler = [](Rng& rng) { return testsupport::random_vector(2, rng); };
  return normalize(make_bursts_with(2, spec, sampler, still, 1));
}

BurstDataset linear_dataset(std::size_t count, std::uint64_t seed) {
  BurstSpec spec;
  spec.count = count;
  return normalize(make_bursts(make_system("linear"), spec, Box{}, seed, IntegratorSpec{}));
}

/// Bursts of u' = c, reproduced exactly by a net whose only parameter is the output bias.
BurstDataset drift_dataset(const Vector& c, std::size_t count) {
  BurstSpec spec;
  spec.count = count;
  const FlowFn flow = [c](const Vector& u, double t) { return Vector(u + t * c); };
  const StateSampler sampler = [](Rng& rng) { return testsupport::random_vector(2, rng); };
  BurstDataset ds = make_bursts_with(2, spec, sampler, flow, 4);
  ds.normalized = true;
  return ds;
}

OsgNet drift_net(const Vector& c) {
  NetSpec spec;
  spec.hidden = {};
  OsgNet net = make_zero_osgnet(2, spec);
  net.params[0].biases[0] = c;
  return net;
}

OsgNet small_net(const BurstDataset& ds, std::uint64_t seed, bool zero_output = false) {
  NetSpec spec;
  spec.hidden = {12, 12};
  spec.zero_output_layer = zero_output;
  Rng rng(seed);
  OsgNet net = make_osgnet(ds.dim, spec, rng);
  net.time_feature = ds.stats.time_feature(BlockVariant::standard, 1);
  return net;
}

TrainConfig short_config(const BurstDataset& ds, LossKind kind, int epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 5;
  cfg.history_interval = 10;
  cfg.loss.kind = kind;
  cfg.loss.domain = ds.stats.normalize_box(make_system("linear").box);
  cfg.loss.delta_min = 0.05;
  cfg.loss.delta_max = 0.15;
  return cfg;
}

bool same_params(const OsgNet& a, const OsgNet& b) {
  if (a.params.size() != b.params.size()) return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].flatten() != b.params[i].flatten()) return false;
  }
  return true;
}

}  // namespace

TEST(Train, ConstantBurstsWithZeroOutputKeepInitialNet) {
  const BurstDataset ds = constant_dataset(10);
  const OsgNet net = small_net(ds, 2, true);
  TrainConfig cfg = short_config(ds, LossKind::baseline, 1);
  const TrainResult r = train(net, ds, cfg);
  EXPECT_EQ(r.best_validation, 0.0);
  EXPECT_TRUE(same_params(r.best_net, net));
}

TEST(Train, SameSeedsGiveBitIdenticalResults) {
  const BurstDataset ds = linear_dataset(20, 3);
  const OsgNet net = small_net(ds, 4);
  for (LossKind kind : {LossKind::baseline, LossKind::lisg, LossKind::gdsg}) {
    const TrainConfig cfg = short_config(ds, kind, 20);
    const TrainResult a = train(net, ds, cfg);
    const TrainResult b = train(net, ds, cfg);
    EXPECT_EQ(a.history.to_csv(), b.history.to_csv()) << to_string(kind);
    EXPECT_TRUE(same_params(a.best_net, b.best_net)) << to_string(kind);
    EXPECT_EQ(a.best_validation, b.best_validation);
  }
}

TEST(Train, BestSnapshotBeatsEveryRecordedCandidate) {
  const BurstDataset ds = linear_dataset(20, 5);
  TrainConfig cfg = short_config(ds, LossKind::gdsg, 60);
  cfg.dynamic_validation = false;
  cfg.history_interval = 1;
  const TrainResult r = train(small_net(ds, 6), ds, cfg);
  const SplitView view = dynamic_split(ds.size(), cfg.validation_fraction, 0, cfg.split_seed);
  const double best = evaluate_split_loss(r.best_net, ds, view, SplitPart::validation, cfg.loss);
  EXPECT_DOUBLE_EQ(best, r.best_validation);
  for (const HistoryRow& row : r.history.rows) EXPECT_LE(best, row.val_loss) << row.epoch;
}

TEST(Train, BestSnapshotRevalidatedUnderDynamicSplit) {
  const BurstDataset ds = linear_dataset(20, 5);
  TrainConfig cfg = short_config(ds, LossKind::baseline, 30);
  const TrainResult r = train(small_net(ds, 6), ds, cfg);
  const SplitView last =
      dynamic_split(ds.size(), cfg.validation_fraction, cfg.epochs - 1, cfg.split_seed);
  EXPECT_LE(r.best_validation,
            evaluate_split_loss(r.best_net, ds, last, SplitPart::validation, cfg.loss) + 1e-15);
  EXPECT_LE(r.best_validation, r.history.rows.back().val_loss);
}

TEST(Train, HistoryRowsFollowTheInterval) {
  const BurstDataset ds = linear_dataset(20, 7);
  TrainConfig cfg = short_config(ds, LossKind::gdsg, 35);
  const TrainResult r = train(small_net(ds, 8), ds, cfg);
  std::vector<int> epochs;
  for (const auto& row : r.history.rows) {
    epochs.push_back(row.epoch);
    EXPECT_TRUE(std::isfinite(row.sg_residual));
    EXPECT_GE(row.lr, cfg.lr.base_lr);
    EXPECT_LE(row.lr, cfg.lr.max_lr);
  }
  EXPECT_EQ(epochs, (std::vector<int>{10, 20, 30, 35}));
  EXPECT_EQ(r.optimizer_steps, 35u * 4u);
  const std::string csv = r.history.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,train_loss,val_loss,sg_residual,lr");
}

TEST(Train, TrainingLossTrendsDownOnFixedSplit) {
  const BurstDataset ds = linear_dataset(10, 9);
  TrainConfig cfg = short_config(ds, LossKind::baseline, 200);
  cfg.dynamic_validation = false;
  cfg.history_interval = 1;
  const TrainResult r = train(small_net(ds, 10), ds, cfg);
  std::vector<double> diffs;
  for (std::size_t i = 1; i < r.history.rows.size(); ++i) {
    diffs.push_back(r.history.rows[i].train_loss - r.history.rows[i - 1].train_loss);
  }
  std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
  EXPECT_LE(diffs[diffs.size() / 2], 0.0);
  EXPECT_LT(r.history.rows.back().train_loss, r.history.rows.front().train_loss);
}

TEST(Train, NonFiniteLossNamesEpochAndBatch) {
  BurstDataset ds = linear_dataset(20, 11);
  for (auto& b : ds.bursts) b.u1(0) = std::numeric_limits<double>::quiet_NaN();
  const TrainConfig cfg = short_config(ds, LossKind::baseline, 3);
  try {
    train(small_net(ds, 12), ds, cfg);
    FAIL() << "expected a numeric error";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1, batch 1"), std::string::npos) << e.what();
  }
}

TEST(Train, InvalidSetupsRejected) {
  const BurstDataset ds = linear_dataset(10, 13);
  TrainConfig cfg = short_config(ds, LossKind::baseline, 1);
  cfg.batch_size = 10;
  EXPECT_THROW(train(small_net(ds, 14), ds, cfg), ConfigError);
  cfg.batch_size = 0;
  EXPECT_THROW(train(small_net(ds, 14), ds, cfg), ConfigError);
  cfg = short_config(ds, LossKind::baseline, 0);
  EXPECT_THROW(train(small_net(ds, 14), ds, cfg), ConfigError);
  cfg = short_config(ds, LossKind::baseline, 1);
  Rng rng(1);
  EXPECT_THROW(train(make_osgnet(3, NetSpec{{4}}, rng), ds, cfg), DimensionError);
}

TEST(Train, CheckpointWrittenAndWriteFailureReported) {
  const BurstDataset ds = linear_dataset(20, 15);
  TrainConfig cfg = short_config(ds, LossKind::baseline, 5);
  cfg.checkpoint_path = ::testing::TempDir() + "ckpt.osgmdl";
  const TrainResult r = train(small_net(ds, 16), ds, cfg);
  EXPECT_TRUE(same_params(load_osgnet(cfg.checkpoint_path), r.best_net));
  cfg.checkpoint_path = "/nonexistent-dir/ckpt.osgmdl";
  EXPECT_THROW(train(small_net(ds, 16), ds, cfg), IoError);
}

TEST(SplitLoss, OracleNetIsZero) {
  Vector c(2);
  c << 0.4, -0.9;
  const BurstDataset ds = drift_dataset(c, 10);
  const SplitView view = dynamic_split(ds.size(), 0.3, 0, 1);
  LossSpec spec;
  EXPECT_LT(evaluate_split_loss(drift_net(c), ds, view, SplitPart::train, spec), 1e-28);
  spec.kind = LossKind::lisg;
  EXPECT_LT(evaluate_split_loss(drift_net(c), ds, view, SplitPart::validation, spec), 1e-28);
}

TEST(SplitLoss, SingleAndPairSubsets) {
  const BurstDataset ds = linear_dataset(10, 17);
  const OsgNet net = small_net(ds, 18);
  LossSpec spec;
  SplitView view;
  view.train = {3};
  view.validation = {3, 7};
  const double one = baseline_loss(net, ds.bursts[3], MetricKind::l2_squared).value.total;
  const double other = baseline_loss(net, ds.bursts[7], MetricKind::l2_squared).value.total;
  EXPECT_NEAR(evaluate_split_loss(net, ds, view, SplitPart::train, spec), one, 1e-15);
  EXPECT_NEAR(evaluate_split_loss(net, ds, view, SplitPart::validation, spec), 0.5 * (one + other),
              1e-15);
  view.train.clear();
  EXPECT_THROW(evaluate_split_loss(net, ds, view, SplitPart::train, spec), DomainError);
}

TEST(SplitLoss, GdsgIsScoredOnItsDataTerm) {
  const BurstDataset ds = linear_dataset(10, 19);
  const OsgNet net = small_net(ds, 20);
  const SplitView view = dynamic_split(ds.size(), 0.2, 0, 1);
  LossSpec gdsg = short_config(ds, LossKind::gdsg, 1).loss;
  EXPECT_EQ(validation_spec(gdsg).kind, LossKind::baseline);
  EXPECT_EQ(evaluate_split_loss(net, ds, view, SplitPart::validation, gdsg),
            evaluate_split_loss(net, ds, view, SplitPart::validation, LossSpec{}));
}

TEST(Probes, FixedBySeedAndEmptyWithoutDomain) {
  const BurstDataset ds = linear_dataset(10, 21);
  const LossSpec spec = short_config(ds, LossKind::gdsg, 1).loss;
  const auto a = probe_tuples(spec, 10, 5);
  const auto b = probe_tuples(spec, 10, 5);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].u0, b[i].u0);
  EXPECT_TRUE(probe_tuples(LossSpec{}, 10, 5).empty());
}
