#include "deeposg/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>

#include <json.hpp>

#include "deeposg/binary_io.hpp"
#include "deeposg/error.hpp"
#include "deeposg/rng.hpp"
#include "deeposg/systems.hpp"

namespace deeposg {

namespace {

constexpr char dataset_magic[8] = {'O', 'S', 'G', 'D', 'A', 'T', '1', '\0'};

double lag_channel(double delta, bool log_delta) { return log_delta ? -std::log10(delta) : delta; }

}  // namespace

NormStats NormStats::identity(int n) {
  NormStats s;
  s.lo = Vector::Constant(n, -1.0);
  s.hi = Vector::Constant(n, 1.0);
  s.degenerate.assign(static_cast<std::size_t>(n), false);
  s.delta_lo = -1.0;
  s.delta_hi = 1.0;
  return s;
}

Vector NormStats::normalize_state(const Vector& u) const {
  if (u.size() != lo.size()) throw DimensionError("normalize", "state dimension mismatch");
  Vector v(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    v(i) = degenerate[static_cast<std::size_t>(i)]
               ? 0.0
               : 2.0 * (u(i) - lo(i)) / (hi(i) - lo(i)) - 1.0;
  }
  return v;
}

Vector NormStats::denormalize_state(const Vector& v) const {
  if (v.size() != lo.size()) throw DimensionError("denormalize", "state dimension mismatch");
  Vector u(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    u(i) = degenerate[static_cast<std::size_t>(i)] ? lo(i)
                                                   : lo(i) + 0.5 * (v(i) + 1.0) * (hi(i) - lo(i));
  }
  return u;
}

Matrix NormStats::normalize_states(const Matrix& u) const {
  Matrix v(u.rows(), u.cols());
  for (Eigen::Index c = 0; c < u.cols(); ++c) v.col(c) = normalize_state(u.col(c));
  return v;
}

Matrix NormStats::denormalize_states(const Matrix& v) const {
  Matrix u(v.rows(), v.cols());
  for (Eigen::Index c = 0; c < v.cols(); ++c) u.col(c) = denormalize_state(v.col(c));
  return u;
}

double NormStats::normalize_delta(double delta) const {
  if (delta_degenerate) return 0.0;
  const double raw = lag_channel(delta, log_delta);
  return 2.0 * (raw - delta_lo) / (delta_hi - delta_lo) - 1.0;
}

Box NormStats::normalize_box(const Box& box) const {
  Box out;
  out.lo = normalize_state(box.lo);
  out.hi = normalize_state(box.hi);
  return out;
}

TimeFeature NormStats::time_feature(BlockVariant variant, int blocks) const {
  TimeFeature f;
  if (delta_degenerate) {
    f.scale = 0.0;
    f.offset = 0.0;
    return f;
  }
  double rlo, rhi;
  if (variant == BlockVariant::multiscale) {
    const double lo_lag = log_delta ? std::pow(10.0, -delta_hi) : delta_lo;
    const double hi_lag = log_delta ? std::pow(10.0, -delta_lo) : delta_hi;
    rlo = -std::log10(hi_lag / blocks);
    rhi = -std::log10(lo_lag / blocks);
  } else {
    const double lo_lag = log_delta ? std::pow(10.0, -delta_hi) : delta_lo;
    const double hi_lag = log_delta ? std::pow(10.0, -delta_lo) : delta_hi;
    rlo = lo_lag / blocks;
    rhi = hi_lag / blocks;
  }
  if (!(rhi > rlo)) {
    f.scale = 0.0;
    f.offset = 0.0;
    return f;
  }
  f.scale = 2.0 / (rhi - rlo);
  f.offset = -1.0 - f.scale * rlo;
  return f;
}

std::string Provenance::to_json() const {
  nlohmann::ordered_json j;
  j["system"] = system;
  j["basis"] = basis;
  j["seed"] = seed;
  j["delta_min"] = delta_min;
  j["delta_max"] = delta_max;
  j["log_delta"] = log_delta;
  j["noise"] = noise;
  return j.dump();
}

Provenance Provenance::from_json(const std::string& text) {
  Provenance p;
  try {
    const auto j = nlohmann::json::parse(text);
    p.system = j.value("system", "");
    p.basis = j.value("basis", "");
    p.seed = j.value("seed", std::uint64_t{0});
    p.delta_min = j.value("delta_min", 0.0);
    p.delta_max = j.value("delta_max", 0.0);
    p.log_delta = j.value("log_delta", false);
    p.noise = j.value("noise", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("<provenance>", e.what());
  }
  return p;
}

BurstDataset make_bursts_with(int dim, const BurstSpec& spec, const StateSampler& sample,
                              const FlowFn& flow, std::uint64_t seed) {
  if (spec.count < 1) throw DomainError("burst count must be at least 1");
  if (!(spec.delta_min > 0.0) || !(spec.delta_max >= spec.delta_min) ||
      !std::isfinite(spec.delta_max)) {
    throw DomainError("time-lag range must lie in (0, inf) and be ordered");
  }
  BurstDataset ds;
  ds.dim = dim;
  ds.bursts.resize(spec.count);
  const double llo = std::log10(spec.delta_min);
  const double lhi = std::log10(spec.delta_max);
  for (std::size_t j = 0; j < spec.count; ++j) {
    Rng rng = Rng::stream(seed, j);
    Burst& b = ds.bursts[j];
    b.u0 = sample(rng);
    if (b.u0.size() != dim) throw DimensionError("burst " + std::to_string(j), "bad state size");
    auto lag = [&]() {
      return spec.log_delta ? std::pow(10.0, rng.uniform(llo, lhi))
                            : rng.uniform(spec.delta_min, spec.delta_max);
    };
    b.d1 = lag();
    b.d2 = lag();
    try {
      b.u1 = flow(b.u0, b.d1);
      b.u2 = flow(b.u1, b.d2);
    } catch (const NumericError& e) {
      throw NumericError("burst " + std::to_string(j) + ": " + e.what());
    }
  }
  ds.provenance.seed = seed;
  ds.provenance.delta_min = spec.delta_min;
  ds.provenance.delta_max = spec.delta_max;
  ds.provenance.log_delta = spec.log_delta;
  ds.stats = NormStats::identity(dim);
  return ds;
}

BurstDataset make_bursts(const OdeSystem& sys, const BurstSpec& spec, const Box& domain,
                         std::uint64_t seed, const IntegratorSpec& integrator) {
  StateSampler sampler;
  if (domain.lo.size() == 0) {
    sampler = [&sys](Rng& rng) { return sys.sample_state(rng); };
  } else {
    if (domain.empty() || domain.dim() != sys.dim) {
      throw DomainError(sys.name + ": initial-state domain is empty or has the wrong dimension");
    }
    sampler = [&domain](Rng& rng) { return domain.sample(rng); };
  }
  BurstDataset ds = make_bursts_with(sys.dim, spec, sampler, make_flow(sys, integrator), seed);
  ds.provenance.system = sys.name;
  return ds;
}

BurstDataset add_noise(const BurstDataset& ds, double eta, std::uint64_t seed) {
  if (!(eta >= 0.0)) throw DomainError("noise level must be non-negative");
  BurstDataset out = ds;
  out.provenance.noise = eta;
  if (eta == 0.0) return out;
  for (std::size_t j = 0; j < out.bursts.size(); ++j) {
    Rng rng = Rng::stream(seed, j);
    for (StateVector* u : {&out.bursts[j].u0, &out.bursts[j].u1, &out.bursts[j].u2}) {
      for (Eigen::Index i = 0; i < u->size(); ++i) (*u)(i) *= 1.0 + rng.uniform(-eta, eta);
    }
  }
  return out;
}

NormStats compute_norm_stats(const BurstDataset& ds, bool log_delta) {
  if (ds.bursts.empty()) throw DomainError("cannot normalize an empty dataset");
  const int n = ds.dim;
  NormStats s;
  s.lo = Vector::Constant(n, std::numeric_limits<double>::infinity());
  s.hi = Vector::Constant(n, -std::numeric_limits<double>::infinity());
  s.log_delta = log_delta;
  s.delta_lo = std::numeric_limits<double>::infinity();
  s.delta_hi = -std::numeric_limits<double>::infinity();
  for (const Burst& b : ds.bursts) {
    for (const StateVector* u : {&b.u0, &b.u1, &b.u2}) {
      s.lo = s.lo.cwiseMin(*u);
      s.hi = s.hi.cwiseMax(*u);
    }
    for (double d : {b.d1, b.d2}) {
      const double c = lag_channel(d, log_delta);
      s.delta_lo = std::min(s.delta_lo, c);
      s.delta_hi = std::max(s.delta_hi, c);
    }
  }
  s.degenerate.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s.degenerate[static_cast<std::size_t>(i)] = !(s.hi(i) > s.lo(i));
  s.delta_degenerate = !(s.delta_hi > s.delta_lo);
  return s;
}

BurstDataset normalize(const BurstDataset& ds, const NormStats& stats) {
  if (ds.normalized) throw DomainError("dataset is already normalized");
  BurstDataset out = ds;
  out.stats = stats;
  out.normalized = true;
  for (Burst& b : out.bursts) {
    b.u0 = stats.normalize_state(b.u0);
    b.u1 = stats.normalize_state(b.u1);
    b.u2 = stats.normalize_state(b.u2);
  }
  return out;
}

BurstDataset normalize(const BurstDataset& ds) {
  return normalize(ds, compute_norm_stats(ds, ds.provenance.log_delta));
}

BurstDataset denormalize(const BurstDataset& ds) {
  if (!ds.normalized) return ds;
  BurstDataset out = ds;
  out.normalized = false;
  for (Burst& b : out.bursts) {
    b.u0 = ds.stats.denormalize_state(b.u0);
    b.u1 = ds.stats.denormalize_state(b.u1);
    b.u2 = ds.stats.denormalize_state(b.u2);
  }
  return out;
}

SplitView dynamic_split(std::size_t dataset_size, double fraction, std::uint64_t epoch,
                        std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("validation fraction must be in (0,1)");
  if (dataset_size < 2) throw DomainError("dynamic split needs at least two bursts");
  std::vector<std::size_t> perm(dataset_size);
  for (std::size_t i = 0; i < dataset_size; ++i) perm[i] = i;
  Rng rng = Rng::stream(seed, epoch);
  rng.shuffle(perm);
  std::size_t nval = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(dataset_size) - 1e-9));
  nval = std::clamp<std::size_t>(nval, 1, dataset_size - 1);
  SplitView view;
  view.epoch = epoch;
  view.validation.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(nval));
  view.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(nval), perm.end());
  return view;
}

void save_dataset(const std::string& path, const BurstDataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  const int n = ds.dim;
  out.write(dataset_magic, sizeof dataset_magic);
  write_u32(out, static_cast<std::uint32_t>(n));
  write_u64(out, ds.bursts.size());
  write_u32(out, ds.normalized ? 1u : 0u);
  const NormStats& s = ds.stats;
  if (s.dim() != n) throw DimensionError("dataset", "normalization stats do not match dimension");
  for (int i = 0; i < n; ++i) write_f64(out, s.lo(i));
  for (int i = 0; i < n; ++i) write_f64(out, s.hi(i));
  for (int i = 0; i < n; ++i) write_u32(out, s.degenerate[static_cast<std::size_t>(i)] ? 1u : 0u);
  write_f64(out, s.delta_lo);
  write_f64(out, s.delta_hi);
  write_u32(out, s.delta_degenerate ? 1u : 0u);
  write_u32(out, s.log_delta ? 1u : 0u);
  write_string(out, ds.provenance.to_json());
  for (const Burst& b : ds.bursts) for (int i = 0; i < n; ++i) write_f64(out, b.u0(i));
  for (const Burst& b : ds.bursts) write_f64(out, b.d1);
  for (const Burst& b : ds.bursts) for (int i = 0; i < n; ++i) write_f64(out, b.u1(i));
  for (const Burst& b : ds.bursts) write_f64(out, b.d2);
  for (const Burst& b : ds.bursts) for (int i = 0; i < n; ++i) write_f64(out, b.u2(i));
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

BurstDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open dataset file");
  try {
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, dataset_magic, sizeof magic) != 0) {
      throw IoError(path, "not an OSGDAT1 dataset");
    }
    BurstDataset ds;
    ds.dim = static_cast<int>(read_u32(in));
    const std::uint64_t count = read_u64(in);
    if (ds.dim < 1 || ds.dim > 100000 || count > (1ull << 32)) {
      throw IoError(path, "corrupt dataset header");
    }
    ds.normalized = read_u32(in) != 0;
    const int n = ds.dim;
    NormStats& s = ds.stats;
    s.lo.resize(n);
    s.hi.resize(n);
    for (int i = 0; i < n; ++i) s.lo(i) = read_f64(in);
    for (int i = 0; i < n; ++i) s.hi(i) = read_f64(in);
    s.degenerate.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s.degenerate[static_cast<std::size_t>(i)] = read_u32(in) != 0;
    s.delta_lo = read_f64(in);
    s.delta_hi = read_f64(in);
    s.delta_degenerate = read_u32(in) != 0;
    s.log_delta = read_u32(in) != 0;
    ds.provenance = Provenance::from_json(read_string(in));
    ds.bursts.resize(count);
    for (auto& b : ds.bursts) {
      b.u0.resize(n);
      for (int i = 0; i < n; ++i) b.u0(i) = read_f64(in);
    }
    for (auto& b : ds.bursts) b.d1 = read_f64(in);
    for (auto& b : ds.bursts) {
      b.u1.resize(n);
      for (int i = 0; i < n; ++i) b.u1(i) = read_f64(in);
    }
    for (auto& b : ds.bursts) b.d2 = read_f64(in);
    for (auto& b : ds.bursts) {
      b.u2.resize(n);
      for (int i = 0; i < n; ++i) b.u2(i) = read_f64(in);
    }
    return ds;
  } catch (const IoError& e) {
    if (e.path() == path) throw;
    throw IoError(path, e.what());
  }
}

void export_csv(const std::string& path, const BurstDataset& ds) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  const int n = ds.dim;
  for (int i = 0; i < n; ++i) out << "u0_" << i << ',';
  out << "d1,";
  for (int i = 0; i < n; ++i) out << "u1_" << i << ',';
  out << "d2";
  for (int i = 0; i < n; ++i) out << ",u2_" << i;
  out << '\n' << std::setprecision(17);
  for (const Burst& b : ds.bursts) {
    for (int i = 0; i < n; ++i) out << b.u0(i) << ',';
    out << b.d1 << ',';
    for (int i = 0; i < n; ++i) out << b.u1(i) << ',';
    out << b.d2;
    for (int i = 0; i < n; ++i) out << ',' << b.u2(i);
    out << '\n';
  }
  if (!out) throw IoError(path, "write failed");
}

}  // namespace deeposg
