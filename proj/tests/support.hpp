#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "deeposg/osgnet.hpp"
#include "deeposg/rng.hpp"

namespace testsupport {

using deeposg::Matrix;
using deeposg::MlpParams;
using deeposg::OsgNet;
using deeposg::Vector;

/// Finite-difference comparison outcome over every parameter entry.
struct GradCheck {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst_rel = 0.0;  // over components of magnitude above 1e-6
  std::string first_failure;
};

/// A component passes when the relative difference is below `rel`, or when the
/// absolute difference sits under the round-off floor of a central difference.
inline bool grad_close(double analytic, double numeric, double rel, double abs_floor) {
  const double diff = std::abs(analytic - numeric);
  if (diff <= abs_floor) return true;
  return diff <= rel * std::max(std::abs(analytic), std::abs(numeric));
}

/// Central differences of f over every parameter of `net`, compared with `grads`.
inline GradCheck check_net_gradient(OsgNet net, const std::vector<MlpParams>& grads,
                                    const std::function<double(const OsgNet&)>& f,
                                    double step = 1e-6, double rel = 1e-5,
                                    double abs_floor = 1e-9) {
  GradCheck out;
  for (std::size_t s = 0; s < net.params.size(); ++s) {
    const Vector base = net.params[s].flatten();
    const Vector g = grads[s].flatten();
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      Vector p = base;
      p(i) = base(i) + step;
      net.params[s].assign_flat(p);
      const double fp = f(net);
      p(i) = base(i) - step;
      net.params[s].assign_flat(p);
      const double fm = f(net);
      net.params[s].assign_flat(base);
      const double numeric = (fp - fm) / (2.0 * step);
      ++out.checked;
      const double scale = std::max(std::abs(g(i)), std::abs(numeric));
      if (scale > 1e-6) out.worst_rel = std::max(out.worst_rel, std::abs(g(i) - numeric) / scale);
      if (!grad_close(g(i), numeric, rel, abs_floor)) {
        if (out.failures == 0) {
          out.first_failure = "set " + std::to_string(s) + " entry " + std::to_string(i) +
                              ": analytic " + std::to_string(g(i)) + " numeric " +
                              std::to_string(numeric);
        }
        ++out.failures;
      }
    }
  }
  return out;
}

inline Vector random_vector(int n, deeposg::Rng& rng, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

/// Random network with non-trivial biases so every code path is exercised.
inline OsgNet random_net(int n, const deeposg::NetSpec& spec, std::uint64_t seed,
                         double bias_scale = 0.1) {
  deeposg::Rng rng(seed);
  OsgNet net = deeposg::make_osgnet(n, spec, rng);
  for (auto& p : net.params) {
    for (auto& b : p.biases) {
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-bias_scale, bias_scale);
    }
  }
  return net;
}

}  // namespace testsupport
