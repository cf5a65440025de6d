#include "deeposg/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "deeposg/error.hpp"
#include "deeposg/rng.hpp"

namespace deeposg {

namespace {

constexpr std::uint64_t shuffle_stream = 0x5348554646ULL;
constexpr std::uint64_t probe_stream = 0x50524f4245ULL;

std::vector<const Burst*> gather(const BurstDataset& ds, const std::vector<std::size_t>& idx,
                                 std::size_t begin, std::size_t end) {
  std::vector<const Burst*> out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) out.push_back(&ds.bursts[idx[i]]);
  return out;
}

bool grads_finite(const std::vector<MlpParams>& grads) {
  for (const auto& g : grads) {
    if (!g.all_finite()) return false;
  }
  return true;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in (0, 1)");
  }
  if (validation_every < 1) throw ConfigError("validation_every must be at least 1");
  if (history_interval < 1) throw ConfigError("history_interval must be at least 1");
  lr.validate();
  loss.validate();
}

std::string TrainHistory::to_csv() const {
  std::ostringstream os;
  os << "epoch,train_loss,val_loss,sg_residual,lr\n" << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.sg_residual << ','
       << r.lr << '\n';
  }
  return os.str();
}

void TrainHistory::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << to_csv();
  if (!out) throw IoError(path, "write failed");
}

LossSpec validation_spec(const LossSpec& loss) {
  LossSpec v = loss;
  if (v.kind == LossKind::gdsg) v.kind = LossKind::baseline;
  return v;
}

double evaluate_split_loss(const OsgNet& net, const BurstDataset& ds, const SplitView& view,
                           SplitPart which, const LossSpec& loss) {
  const auto& idx = which == SplitPart::train ? view.train : view.validation;
  if (idx.empty()) throw DomainError("loss over an empty subset");
  for (std::size_t i : idx) {
    if (i >= ds.bursts.size()) throw DimensionError("split", "index outside the dataset");
  }
  const auto bursts = gather(ds, idx, 0, idx.size());
  return batch_loss(net, bursts, nullptr, validation_spec(loss), nullptr).total;
}

std::vector<SgTuple> probe_tuples(const LossSpec& loss, int count, std::uint64_t tuple_seed) {
  if (count < 1 || loss.domain.empty() || !(loss.delta_min > 0.0) ||
      !(loss.delta_max >= loss.delta_min)) {
    return {};
  }
  Rng rng = Rng::stream(tuple_seed, probe_stream);
  return sample_sg_tuples(loss, static_cast<std::size_t>(count), rng);
}

TrainResult train(const OsgNet& initial, const BurstDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  initial.validate();
  if (ds.dim != initial.state_dim) {
    throw DimensionError("train", "network dimension " + std::to_string(initial.state_dim) +
                                      " differs from dataset dimension " + std::to_string(ds.dim));
  }
  if (ds.bursts.size() < 2) throw DomainError("training needs at least two bursts");

  const LossSpec val_spec = validation_spec(cfg.loss);
  const std::vector<SgTuple> probes = probe_tuples(cfg.loss, cfg.probe_tuples, cfg.tuple_seed);
  auto probe_value = [&](const OsgNet& net) {
    return probes.empty() ? std::numeric_limits<double>::quiet_NaN()
                          : semigroup_loss(net, probes, cfg.loss.metric);
  };
  auto validation = [&](const OsgNet& net, const SplitView& view) {
    return batch_loss(net, gather(ds, view.validation, 0, view.validation.size()), nullptr,
                      val_spec, nullptr)
        .total;
  };

  TrainResult result;
  OsgNet net = initial;
  result.best_net = initial;
  AdamState adam = make_adam_state(net.params);
  std::uint64_t step = 0;
  const auto start = std::chrono::steady_clock::now();

  SplitView view = dynamic_split(ds.bursts.size(), cfg.validation_fraction, 0, cfg.split_seed);
  if (static_cast<std::size_t>(cfg.batch_size) > view.train.size()) {
    throw ConfigError("batch_size " + std::to_string(cfg.batch_size) +
                      " exceeds the training-set size " + std::to_string(view.train.size()));
  }
  double best = validation(net, view);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.dynamic_validation && epoch > 0) {
      view = dynamic_split(ds.bursts.size(), cfg.validation_fraction,
                           static_cast<std::uint64_t>(epoch), cfg.split_seed);
      best = validation(result.best_net, view);
    }
    std::vector<std::size_t> order = view.train;
    Rng shuffle = Rng::stream(stream_seed(cfg.split_seed, shuffle_stream),
                              static_cast<std::uint64_t>(epoch));
    shuffle.shuffle(order);

    std::vector<SgTuple> tuples;
    if (cfg.loss.kind == LossKind::gdsg) {
      Rng trng = Rng::stream(cfg.tuple_seed, static_cast<std::uint64_t>(epoch));
      tuples = sample_sg_tuples(cfg.loss, order.size() * static_cast<std::size_t>(cfg.loss.q),
                                trng);
    }

    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
    const std::size_t batches = (order.size() + bs - 1) / bs;
    double epoch_loss = 0.0;
    bool improved = false;
    std::vector<MlpParams> grads = net.zero_grads();
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * bs;
      const std::size_t hi = std::min(order.size(), lo + bs);
      const auto bursts = gather(ds, order, lo, hi);
      for (auto& g : grads) g.set_zero();
      std::vector<SgTuple> batch_tuples;
      if (!tuples.empty()) {
        const std::size_t q = static_cast<std::size_t>(cfg.loss.q);
        batch_tuples.assign(tuples.begin() + static_cast<std::ptrdiff_t>(lo * q),
                            tuples.begin() + static_cast<std::ptrdiff_t>(hi * q));
      }
      const LossValue value = batch_loss(net, bursts, tuples.empty() ? nullptr : &batch_tuples,
                                         cfg.loss, &grads);
      if (!std::isfinite(value.total) || !grads_finite(grads)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                           std::to_string(b + 1));
      }
      epoch_loss += value.total * static_cast<double>(hi - lo);
      adam_step(adam, net.params, grads, cyclic_lr(step, cfg.lr));
      ++step;
      if ((b + 1) % static_cast<std::size_t>(cfg.validation_every) == 0 || b + 1 == batches) {
        const double v = validation(net, view);
        if (v < best) {
          best = v;
          result.best_net = net;
          improved = true;
        }
      }
    }
    if (improved && !cfg.checkpoint_path.empty()) save_osgnet(cfg.checkpoint_path, result.best_net);

    if ((epoch + 1) % cfg.history_interval == 0 || epoch + 1 == cfg.epochs) {
      HistoryRow row;
      row.epoch = epoch + 1;
      row.train_loss = epoch_loss / static_cast<double>(order.size());
      row.val_loss = validation(net, view);
      row.sg_residual = probe_value(net);
      row.lr = cyclic_lr(step, cfg.lr);
      result.history.rows.push_back(row);
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  result.seconds_per_epoch =
      std::chrono::duration<double>(stop - start).count() / static_cast<double>(cfg.epochs);
  result.best_validation = best;
  result.optimizer_steps = step;
  return result;
}

}  // namespace deeposg
