#pragma once

#include <string>
#include <vector>

#include "deeposg/linalg.hpp"
#include "deeposg/osgnet.hpp"

namespace deeposg {

class Rng;

enum class MetricKind { l2_squared, relative_l2 };
enum class LossKind { baseline, lisg, gdsg };

std::string to_string(MetricKind m);
std::string to_string(LossKind k);
MetricKind parse_metric(const std::string& s);
LossKind parse_loss_kind(const std::string& s);

/// Axis-aligned box [lo, hi]. A box with lo == hi on some axis is a valid
/// (degenerate) domain; lo > hi on any axis makes it empty.
struct Box {
  Vector lo;
  Vector hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool empty() const;
  bool contains(const Vector& u, double slack = 0.0) const;
  Vector sample(Rng& rng) const;
};

/// One training record {u0, d1, u1, d2, u2}.
struct Burst {
  StateVector u0, u1, u2;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Random semigroup tuple: a state and two time steps.
struct SgTuple {
  StateVector u0;
  double d1 = 0.0;
  double d2 = 0.0;
};

struct LossSpec {
  LossKind kind = LossKind::baseline;
  double lambda = 1.0;
  int q = 5;
  MetricKind metric = MetricKind::l2_squared;
  Box domain;
  double delta_min = 0.0;
  double delta_max = 0.0;
  /// Draw tuple time steps log-uniformly (multiscale data) instead of uniformly.
  bool log_uniform_delta = false;

  void validate() const;
};

/// l2_squared: |u - v|^2. relative_l2: |u - v| / |u|; throws DomainError when |u| = 0.
double metric(const StateVector& u, const StateVector& v, MetricKind which);

/// Gradient of metric(u, v) with respect to both arguments.
void metric_gradient(const StateVector& u, const StateVector& v, MetricKind which,
                     StateVector& du, StateVector& dv);

/// Uniform states over spec.domain, independent time steps over the delta range.
std::vector<SgTuple> sample_sg_tuples(const LossSpec& spec, std::size_t count, Rng& rng);

/// Loss value split into its data-fitting and semigroup parts. For baseline
/// and LISG, `data` equals `total` and `semigroup` is zero.
struct LossValue {
  double total = 0.0;
  double data = 0.0;
  double semigroup = 0.0;
};

struct LossResult {
  LossValue value;
  std::vector<MlpParams> grads;
};

LossResult baseline_loss(const OsgNet& net, const Burst& burst, MetricKind metric);
LossResult lisg_loss(const OsgNet& net, const Burst& burst, MetricKind metric);
LossResult gdsg_loss(const OsgNet& net, const Burst& burst, const std::vector<SgTuple>& tuples,
                     double lambda, MetricKind metric);

/// Mean loss over a set of bursts evaluated in one batched pass. For GDSG,
/// `tuples` holds spec.q tuples per burst, in burst order. When `grads` is
/// non-null the gradient of the mean is added into it.
LossValue batch_loss(const OsgNet& net, const std::vector<const Burst*>& bursts,
                     const std::vector<SgTuple>* tuples, const LossSpec& spec,
                     std::vector<MlpParams>* grads);

/// Mean over tuples of 1/2 [l(u02, u012) + l(u02, u021)]; the semigroup term
/// alone, usable as a probe for any network.
double semigroup_loss(const OsgNet& net, const std::vector<SgTuple>& tuples, MetricKind metric);

}  // namespace deeposg
