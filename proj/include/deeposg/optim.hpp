#pragma once

#include <cstdint>
#include <vector>

#include "deeposg/mlp.hpp"

namespace deeposg {

/// Adam moments for a list of parameter blocks.
struct AdamState {
  std::vector<MlpParams> first_moment;
  std::vector<MlpParams> second_moment;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const std::vector<MlpParams>& params);
AdamState make_adam_state(const MlpParams& params);

/// One bias-corrected Adam update. Throws NumericError naming the block and
/// layer if any gradient entry is non-finite; nothing is modified in that case.
void adam_step(AdamState& state, std::vector<MlpParams>& params,
               const std::vector<MlpParams>& grads, double lr);
void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads, double lr);

/// Triangular cyclic learning rate.
struct CyclicLrConfig {
  double base_lr = 1e-4;
  double max_lr = 1e-3;
  std::uint64_t cycle_length = 2000;

  void validate() const;
};

/// lr(0) = base_lr, apex max_lr at cycle_length/2, period cycle_length.
double cyclic_lr(std::uint64_t step, const CyclicLrConfig& cfg);

}  // namespace deeposg
