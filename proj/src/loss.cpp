#include "deeposg/loss.hpp"

#include <cmath>

#include "deeposg/error.hpp"
#include "deeposg/rng.hpp"

namespace deeposg {

std::string to_string(MetricKind m) {
  return m == MetricKind::l2_squared ? "l2_squared" : "relative_l2";
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::baseline: return "baseline";
    case LossKind::lisg: return "lisg";
    case LossKind::gdsg: return "gdsg";
  }
  return "baseline";
}

MetricKind parse_metric(const std::string& s) {
  if (s == "l2_squared") return MetricKind::l2_squared;
  if (s == "relative_l2") return MetricKind::relative_l2;
  throw ConfigError("unknown metric '" + s + "'");
}

LossKind parse_loss_kind(const std::string& s) {
  if (s == "baseline") return LossKind::baseline;
  if (s == "lisg") return LossKind::lisg;
  if (s == "gdsg") return LossKind::gdsg;
  throw ConfigError("unknown method '" + s + "' (expected baseline, lisg or gdsg)");
}

bool Box::empty() const {
  if (lo.size() == 0 || lo.size() != hi.size()) return true;
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo(i) <= hi(i))) return true;
  }
  return false;
}

bool Box::contains(const Vector& u, double slack) const {
  if (u.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u(i) < lo(i) - slack || u(i) > hi(i) + slack) return false;
  }
  return true;
}

Vector Box::sample(Rng& rng) const {
  Vector u(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    u(i) = lo(i) == hi(i) ? lo(i) : rng.uniform(lo(i), hi(i));
  }
  return u;
}

void LossSpec::validate() const {
  if (kind == LossKind::gdsg) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive");
    if (q < 1) throw ConfigError("Q must be at least 1");
    if (domain.empty()) throw DomainError("semigroup sampling domain is empty");
    if (!(delta_min > 0.0) || !(delta_max >= delta_min) || !std::isfinite(delta_max)) {
      throw DomainError("semigroup time-step range must be positive and ordered");
    }
  }
}

double metric(const StateVector& u, const StateVector& v, MetricKind which) {
  if (u.size() != v.size()) throw DimensionError("metric", "argument dimensions differ");
  const double diff = (u - v).norm();
  if (which == MetricKind::l2_squared) return diff * diff;
  const double nu = u.norm();
  if (nu == 0.0) throw DomainError("relative metric needs a non-zero reference state");
  return diff / nu;
}

void metric_gradient(const StateVector& u, const StateVector& v, MetricKind which,
                     StateVector& du, StateVector& dv) {
  if (u.size() != v.size()) throw DimensionError("metric", "argument dimensions differ");
  const Vector r = u - v;
  if (which == MetricKind::l2_squared) {
    du = 2.0 * r;
    dv = -2.0 * r;
    return;
  }
  const double nu = u.norm();
  if (nu == 0.0) throw DomainError("relative metric needs a non-zero reference state");
  const double nr = r.norm();
  if (nr == 0.0) {
    du = Vector::Zero(u.size());
    dv = Vector::Zero(u.size());
    return;
  }
  dv = -r / (nr * nu);
  du = r / (nr * nu) - (nr / (nu * nu * nu)) * u;
}

std::vector<SgTuple> sample_sg_tuples(const LossSpec& spec, std::size_t count, Rng& rng) {
  if (spec.domain.empty()) throw DomainError("semigroup sampling domain is empty");
  if (!(spec.delta_min > 0.0) || !(spec.delta_max >= spec.delta_min)) {
    throw DomainError("semigroup time-step range must be positive and ordered");
  }
  const double llo = std::log10(spec.delta_min);
  const double lhi = std::log10(spec.delta_max);
  auto draw = [&]() {
    if (spec.log_uniform_delta) return std::pow(10.0, rng.uniform(llo, lhi));
    return rng.uniform(spec.delta_min, spec.delta_max);
  };
  std::vector<SgTuple> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SgTuple t;
    t.u0 = spec.domain.sample(rng);
    t.d1 = draw();
    t.d2 = draw();
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

/// Where a metric argument comes from.
struct Ref {
  enum Source { data, first, second } source;
  Eigen::Index index;
};

struct Term {
  Ref reference;
  Ref prediction;
  double weight;
  bool semigroup;
};

/// Two-stage evaluation plan: first-stage columns start from given states,
/// second-stage columns start from first-stage outputs.
class Plan {
public:
  explicit Plan(int n) : n_(n) {}

  Eigen::Index add_data(const StateVector& u) {
    if (u.size() != n_) throw DimensionError("burst", "state dimension does not match the net");
    data_.push_back(u);
    return static_cast<Eigen::Index>(data_.size() - 1);
  }
  Eigen::Index add_first(Eigen::Index data_index, double delta) {
    first_src_.push_back(data_index);
    first_delta_.push_back(delta);
    return static_cast<Eigen::Index>(first_src_.size() - 1);
  }
  Eigen::Index add_second(Eigen::Index first_index, double delta) {
    second_src_.push_back(first_index);
    second_delta_.push_back(delta);
    return static_cast<Eigen::Index>(second_src_.size() - 1);
  }
  void add_term(Ref reference, Ref prediction, double weight, bool semigroup) {
    terms_.push_back({reference, prediction, weight, semigroup});
  }

  LossValue run(const OsgNet& net, MetricKind metric, std::vector<MlpParams>* grads) const {
    const Eigen::Index n1 = static_cast<Eigen::Index>(first_src_.size());
    const Eigen::Index n2 = static_cast<Eigen::Index>(second_src_.size());
    Matrix in1(n_, n1);
    Vector d1(n1);
    for (Eigen::Index c = 0; c < n1; ++c) {
      in1.col(c) = data_[static_cast<std::size_t>(first_src_[static_cast<std::size_t>(c)])];
      d1(c) = first_delta_[static_cast<std::size_t>(c)];
    }
    ForwardTape tape1, tape2;
    const Matrix out1 = osg_forward(net, in1, d1, grads ? &tape1 : nullptr);
    Matrix out2;
    Vector d2(n2);
    if (n2 > 0) {
      Matrix in2(n_, n2);
      for (Eigen::Index c = 0; c < n2; ++c) {
        in2.col(c) = out1.col(second_src_[static_cast<std::size_t>(c)]);
        d2(c) = second_delta_[static_cast<std::size_t>(c)];
      }
      out2 = osg_forward(net, in2, d2, grads ? &tape2 : nullptr);
    }
    auto fetch = [&](const Ref& r) -> StateVector {
      switch (r.source) {
        case Ref::data: return data_[static_cast<std::size_t>(r.index)];
        case Ref::first: return out1.col(r.index);
        case Ref::second: return out2.col(r.index);
      }
      return {};
    };
    Matrix g1, g2;
    if (grads) {
      g1 = Matrix::Zero(n_, n1);
      g2 = Matrix::Zero(n_, n2);
    }
    auto scatter = [&](const Ref& r, const StateVector& g) {
      if (r.source == Ref::first) g1.col(r.index) += g;
      if (r.source == Ref::second) g2.col(r.index) += g;
    };
    LossValue value;
    StateVector da, db;
    for (const Term& t : terms_) {
      const StateVector a = fetch(t.reference);
      const StateVector b = fetch(t.prediction);
      const double l = t.weight * deeposg::metric(a, b, metric);
      value.total += l;
      (t.semigroup ? value.semigroup : value.data) += l;
      if (grads) {
        metric_gradient(a, b, metric, da, db);
        scatter(t.reference, t.weight * da);
        scatter(t.prediction, t.weight * db);
      }
    }
    if (grads) {
      if (n2 > 0) {
        const Matrix back = osg_backprop(net, tape2, g2, *grads);
        for (Eigen::Index c = 0; c < n2; ++c) {
          g1.col(second_src_[static_cast<std::size_t>(c)]) += back.col(c);
        }
      }
      osg_backprop(net, tape1, g1, *grads);
    }
    return value;
  }

private:
  int n_;
  std::vector<StateVector> data_;
  std::vector<Eigen::Index> first_src_;
  std::vector<double> first_delta_;
  std::vector<Eigen::Index> second_src_;
  std::vector<double> second_delta_;
  std::vector<Term> terms_;
};

void add_baseline(Plan& plan, const Burst& b, double w) {
  const auto u0 = plan.add_data(b.u0);
  const auto u1 = plan.add_data(b.u1);
  const auto u2 = plan.add_data(b.u2);
  const auto p01 = plan.add_first(u0, b.d1);
  const auto p12 = plan.add_first(u1, b.d2);
  plan.add_term({Ref::data, u1}, {Ref::first, p01}, 0.5 * w, false);
  plan.add_term({Ref::data, u2}, {Ref::first, p12}, 0.5 * w, false);
}

void add_lisg(Plan& plan, const Burst& b, double w) {
  const auto u0 = plan.add_data(b.u0);
  const auto u1 = plan.add_data(b.u1);
  const auto u2 = plan.add_data(b.u2);
  const auto p01 = plan.add_first(u0, b.d1);
  const auto p12 = plan.add_first(u1, b.d2);
  const auto p02 = plan.add_first(u0, b.d1 + b.d2);
  const auto p0_2 = plan.add_first(u0, b.d2);
  const auto p012 = plan.add_second(p01, b.d2);
  const auto p021 = plan.add_second(p0_2, b.d1);
  const double c = w / 5.0;
  plan.add_term({Ref::data, u1}, {Ref::first, p01}, c, false);
  plan.add_term({Ref::data, u2}, {Ref::first, p12}, c, false);
  plan.add_term({Ref::data, u2}, {Ref::first, p02}, c, false);
  plan.add_term({Ref::data, u2}, {Ref::second, p012}, c, false);
  plan.add_term({Ref::data, u2}, {Ref::second, p021}, c, false);
}

/// Adds w * 1/(2Q) sum [l(u02,u012) + l(u02,u021)] over the tuples.
void add_semigroup(Plan& plan, const SgTuple* tuples, std::size_t q, double w) {
  const double c = w / (2.0 * static_cast<double>(q));
  for (std::size_t i = 0; i < q; ++i) {
    const SgTuple& t = tuples[i];
    const auto u0 = plan.add_data(t.u0);
    const auto p1 = plan.add_first(u0, t.d1);
    const auto p2 = plan.add_first(u0, t.d2);
    const auto p12 = plan.add_first(u0, t.d1 + t.d2);
    const auto p012 = plan.add_second(p1, t.d2);
    const auto p021 = plan.add_second(p2, t.d1);
    plan.add_term({Ref::first, p12}, {Ref::second, p012}, c, true);
    plan.add_term({Ref::first, p12}, {Ref::second, p021}, c, true);
  }
}

void check_burst(const OsgNet& net, const Burst& b) {
  if (b.u0.size() != net.state_dim || b.u1.size() != net.state_dim ||
      b.u2.size() != net.state_dim) {
    throw DimensionError("burst", "state dimension does not match the net");
  }
}

LossResult single(const OsgNet& net, const Burst& burst, const std::vector<SgTuple>* tuples,
                  const LossSpec& spec) {
  LossResult r;
  r.grads = net.zero_grads();
  std::vector<const Burst*> one{&burst};
  r.value = batch_loss(net, one, tuples, spec, &r.grads);
  return r;
}

}  // namespace

LossValue batch_loss(const OsgNet& net, const std::vector<const Burst*>& bursts,
                     const std::vector<SgTuple>* tuples, const LossSpec& spec,
                     std::vector<MlpParams>* grads) {
  if (bursts.empty()) throw DomainError("loss over an empty set of bursts");
  const double w = 1.0 / static_cast<double>(bursts.size());
  Plan plan(net.state_dim);
  for (std::size_t j = 0; j < bursts.size(); ++j) {
    const Burst& b = *bursts[j];
    check_burst(net, b);
    switch (spec.kind) {
      case LossKind::baseline: add_baseline(plan, b, w); break;
      case LossKind::lisg: add_lisg(plan, b, w); break;
      case LossKind::gdsg: {
        if (!(spec.lambda > 0.0)) throw ConfigError("lambda must be positive");
        const std::size_t q = static_cast<std::size_t>(spec.q);
        if (!tuples || tuples->size() != q * bursts.size()) {
          throw DimensionError("gdsg", "expected " + std::to_string(q) + " tuples per burst");
        }
        const double scale = 1.0 / (1.0 + spec.lambda);
        add_baseline(plan, b, w * scale);
        add_semigroup(plan, tuples->data() + j * q, q, w * spec.lambda * scale);
        break;
      }
    }
  }
  return plan.run(net, spec.metric, grads);
}

LossResult baseline_loss(const OsgNet& net, const Burst& burst, MetricKind metric) {
  LossSpec spec;
  spec.kind = LossKind::baseline;
  spec.metric = metric;
  return single(net, burst, nullptr, spec);
}

LossResult lisg_loss(const OsgNet& net, const Burst& burst, MetricKind metric) {
  LossSpec spec;
  spec.kind = LossKind::lisg;
  spec.metric = metric;
  return single(net, burst, nullptr, spec);
}

LossResult gdsg_loss(const OsgNet& net, const Burst& burst, const std::vector<SgTuple>& tuples,
                     double lambda, MetricKind metric) {
  if (tuples.empty()) throw DimensionError("gdsg", "need at least one semigroup tuple");
  LossSpec spec;
  spec.kind = LossKind::gdsg;
  spec.lambda = lambda;
  spec.q = static_cast<int>(tuples.size());
  spec.metric = metric;
  return single(net, burst, &tuples, spec);
}

double semigroup_loss(const OsgNet& net, const std::vector<SgTuple>& tuples, MetricKind metric) {
  if (tuples.empty()) return 0.0;
  Plan plan(net.state_dim);
  add_semigroup(plan, tuples.data(), tuples.size(), 1.0);
  return plan.run(net, metric, nullptr).total;
}

}  // namespace deeposg
