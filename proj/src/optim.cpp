#include "deeposg/optim.hpp"

#include <cmath>
#include <string>

#include "deeposg/error.hpp"

namespace deeposg {

AdamState make_adam_state(const std::vector<MlpParams>& params) {
  AdamState s;
  for (const auto& p : params) {
    s.first_moment.push_back(p.zeros_like());
    s.second_moment.push_back(p.zeros_like());
  }
  return s;
}

AdamState make_adam_state(const MlpParams& params) {
  return make_adam_state(std::vector<MlpParams>{params});
}

namespace {

void check_shapes(const AdamState& state, const std::vector<MlpParams>& params,
                  const std::vector<MlpParams>& grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw DimensionError("adam", "block count mismatch between state, params and grads");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].weights.size() != grads[b].weights.size() ||
        params[b].weights.size() != state.first_moment[b].weights.size()) {
      throw DimensionError("block " + std::to_string(b), "layer count mismatch");
    }
    for (std::size_t l = 0; l < params[b].weights.size(); ++l) {
      if (params[b].weights[l].rows() != grads[b].weights[l].rows() ||
          params[b].weights[l].cols() != grads[b].weights[l].cols() ||
          params[b].biases[l].size() != grads[b].biases[l].size()) {
        throw DimensionError("block " + std::to_string(b) + " layer " + std::to_string(l),
                             "gradient shape mismatch");
      }
    }
  }
  for (std::size_t b = 0; b < grads.size(); ++b) {
    for (std::size_t l = 0; l < grads[b].weights.size(); ++l) {
      if (!grads[b].weights[l].allFinite()) {
        throw NumericError("non-finite gradient in block " + std::to_string(b) + " layer " +
                           std::to_string(l) + " weights");
      }
      if (!grads[b].biases[l].allFinite()) {
        throw NumericError("non-finite gradient in block " + std::to_string(b) + " layer " +
                           std::to_string(l) + " bias");
      }
    }
  }
}

template <typename Param, typename Grad, typename Moment>
void update(Param& p, const Grad& g, Moment& m, Moment& v, double beta1, double beta2, double c1,
            double c2, double lr, double eps) {
  m = beta1 * m + (1.0 - beta1) * g;
  v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
  p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

}  // namespace

void adam_step(AdamState& state, std::vector<MlpParams>& params,
               const std::vector<MlpParams>& grads, double lr) {
  check_shapes(state, params, grads);
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t l = 0; l < params[b].weights.size(); ++l) {
      update(params[b].weights[l], grads[b].weights[l], state.first_moment[b].weights[l],
             state.second_moment[b].weights[l], state.beta1, state.beta2, c1, c2, lr,
             state.epsilon);
      update(params[b].biases[l], grads[b].biases[l], state.first_moment[b].biases[l],
             state.second_moment[b].biases[l], state.beta1, state.beta2, c1, c2, lr,
             state.epsilon);
    }
  }
}

void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads, double lr) {
  std::vector<MlpParams> p{std::move(params)};
  try {
    adam_step(state, p, std::vector<MlpParams>{grads}, lr);
  } catch (...) {
    params = std::move(p.front());
    throw;
  }
  params = std::move(p.front());
}

void CyclicLrConfig::validate() const {
  if (!(base_lr > 0.0) || !(max_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (base_lr > max_lr) throw ConfigError("base_lr must not exceed max_lr");
  if (cycle_length == 0) throw ConfigError("cycle_length must be positive");
}

double cyclic_lr(std::uint64_t step, const CyclicLrConfig& cfg) {
  const double phase =
      static_cast<double>(step % cfg.cycle_length) / static_cast<double>(cfg.cycle_length);
  const double tri = 1.0 - std::abs(2.0 * phase - 1.0);
  return cfg.base_lr + (cfg.max_lr - cfg.base_lr) * tri;
}

}  // namespace deeposg
