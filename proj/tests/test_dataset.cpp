#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "deeposg/dataset.hpp"
#include "deeposg/error.hpp"
#include "deeposg/rng.hpp"
#include "deeposg/systems.hpp"

using namespace deeposg;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector linear_expm_oracle(const Vector& u0, double t) {
  Matrix a(2, 2);
  a << 1, -4, 4, -7;
  const Vector fixed = vec2(1, 1);
  return fixed + (a * t).exp() * (u0 - fixed);
}

BurstDataset linear_dataset(std::size_t count, std::uint64_t seed) {
  BurstSpec spec;
  spec.count = count;
  return make_bursts(make_system("linear"), spec, Box{}, seed, IntegratorSpec{});
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

/// One-channel dataset; consecutive triples of `values` become u0, u1, u2.
BurstDataset channel_dataset(const std::vector<double>& values) {
  BurstDataset ds;
  ds.dim = 1;
  for (std::size_t i = 0; i + 2 < values.size(); i += 3) {
    Burst b;
    b.u0 = Vector::Constant(1, values[i]);
    b.u1 = Vector::Constant(1, values[i + 1]);
    b.u2 = Vector::Constant(1, values[i + 2]);
    b.d1 = 0.1;
    b.d2 = 0.2;
    ds.bursts.push_back(b);
  }
  ds.stats = NormStats::identity(1);
  return ds;
}

}  // namespace

TEST(MakeBursts, FixedPointDomainGivesConstantBursts) {
  BurstSpec spec;
  spec.count = 1;
  const Box point{vec2(1, 1), vec2(1, 1)};
  const BurstDataset ds = make_bursts(make_system("linear"), spec, point, 3, IntegratorSpec{});
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.bursts[0].u0, vec2(1, 1));
  EXPECT_EQ(ds.bursts[0].u1, vec2(1, 1));
  EXPECT_EQ(ds.bursts[0].u2, vec2(1, 1));
}

TEST(MakeBursts, SameSeedGivesByteIdenticalFiles) {
  const std::string a = temp_path("det_a.osgdat"), b = temp_path("det_b.osgdat");
  save_dataset(a, linear_dataset(20, 77));
  save_dataset(b, linear_dataset(20, 77));
  EXPECT_EQ(slurp(a), slurp(b));
  save_dataset(b, linear_dataset(20, 78));
  EXPECT_NE(slurp(a), slurp(b));
}

TEST(MakeBursts, LagsAndStatesWithinConfiguredRanges) {
  const BurstDataset ds = linear_dataset(200, 5);
  const OdeSystem sys = make_system("linear");
  for (const Burst& b : ds.bursts) {
    EXPECT_TRUE(sys.box.contains(b.u0));
    EXPECT_GE(b.d1, 0.05);
    EXPECT_LE(b.d1, 0.15);
    EXPECT_GE(b.d2, 0.05);
    EXPECT_LE(b.d2, 0.15);
  }
}

TEST(MakeBursts, LinearBurstsObeySemigroupOracle) {
  for (const Burst& b : linear_dataset(50, 9).bursts) {
    EXPECT_LT((b.u1 - linear_expm_oracle(b.u0, b.d1)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((b.u2 - linear_expm_oracle(b.u0, b.d1 + b.d2)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(MakeBursts, LogUniformLagsCoverTheDecades) {
  BurstSpec spec;
  spec.count = 2000;
  spec.delta_min = std::pow(10.0, -4.9);
  spec.delta_max = std::pow(10.0, 0.1);
  spec.log_delta = true;
  const FlowFn still = [](const Vector& u, double) { return u; };
  const StateSampler origin = [](Rng&) { return Vector(Vector::Zero(1)); };
  const BurstDataset ds = make_bursts_with(1, spec, origin, still, 1);
  int below = 0;
  for (const Burst& b : ds.bursts) {
    EXPECT_GE(b.d1, spec.delta_min * (1 - 1e-12));
    EXPECT_LE(b.d1, spec.delta_max * (1 + 1e-12));
    if (b.d1 < 1e-3) ++below;
  }
  // log10(1e-3) sits at 38% of [-4.9, 0.1].
  EXPECT_NEAR(below / 2000.0, 0.38, 0.04);
}

TEST(MakeBursts, RobertsonDataConservesMass) {
  const OdeSystem sys = make_system("robertson");
  IntegratorSpec integ;
  integ.kind = IntegratorSpec::Kind::stiff;
  integ.tol = 1e-7;
  BurstSpec spec;
  spec.count = 8;
  spec.delta_min = std::pow(10.0, -4.9);
  spec.delta_max = std::pow(10.0, 0.1);
  spec.log_delta = true;
  for (const Burst& b : make_bursts(sys, spec, Box{}, 11, integ).bursts) {
    for (const Vector* u : {&b.u0, &b.u1, &b.u2}) EXPECT_NEAR(u->sum(), 1.0, 1e-6);
  }
  spec.count = 3;
  spec.delta_min = 5.0;
  spec.delta_max = 15.0;
  spec.log_delta = false;
  for (const Burst& b : make_bursts(sys, spec, Box{}, 12, integ).bursts) {
    EXPECT_NEAR(b.u2.sum(), 1.0, 1e-6);
  }
}

TEST(MakeBursts, InvalidSpecRejected) {
  BurstSpec spec;
  spec.count = 0;
  EXPECT_THROW(make_bursts(make_system("linear"), spec, Box{}, 1, IntegratorSpec{}), DomainError);
  spec.count = 3;
  spec.delta_min = 0.0;
  EXPECT_THROW(make_bursts(make_system("linear"), spec, Box{}, 1, IntegratorSpec{}), DomainError);
}

TEST(Noise, ZeroLevelLeavesDataUnchanged) {
  const BurstDataset ds = linear_dataset(10, 2);
  const BurstDataset noisy = add_noise(ds, 0.0, 99);
  for (std::size_t j = 0; j < ds.size(); ++j) {
    EXPECT_EQ(noisy.bursts[j].u0, ds.bursts[j].u0);
    EXPECT_EQ(noisy.bursts[j].u2, ds.bursts[j].u2);
  }
}

TEST(Noise, ZeroComponentStaysZeroAndLagsUntouched) {
  const BurstDataset ds = channel_dataset(std::vector<double>(30, 0.0));
  const BurstDataset noisy = add_noise(ds, 0.05, 4);
  for (std::size_t j = 0; j < ds.size(); ++j) {
    EXPECT_EQ(noisy.bursts[j].u1(0), 0.0);
    EXPECT_EQ(noisy.bursts[j].d1, ds.bursts[j].d1);
    EXPECT_EQ(noisy.bursts[j].d2, ds.bursts[j].d2);
  }
  EXPECT_EQ(noisy.provenance.noise, 0.05);
}

TEST(Noise, UniformStatisticsOnUnitValues) {
  const BurstDataset ds = channel_dataset(std::vector<double>(9999, 1.0));
  const BurstDataset noisy = add_noise(ds, 0.02, 5);
  double sum = 0.0;
  std::size_t count = 0;
  for (const Burst& b : noisy.bursts) {
    for (const Vector* u : {&b.u0, &b.u1, &b.u2}) {
      EXPECT_GE((*u)(0), 0.98);
      EXPECT_LE((*u)(0), 1.02);
      sum += (*u)(0);
      ++count;
    }
  }
  const double se = (0.04 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(count));
  EXPECT_LT(std::abs(sum / count - 1.0), 3 * se);
  EXPECT_THROW(add_noise(ds, -0.1, 1), DomainError);
}

TEST(Normalize, UnitRangeChannelUnchanged) {
  const BurstDataset n = normalize(channel_dataset({-1.0, 1.0, 0.5}));
  EXPECT_DOUBLE_EQ(n.bursts[0].u0(0), -1.0);
  EXPECT_DOUBLE_EQ(n.bursts[0].u1(0), 1.0);
  EXPECT_DOUBLE_EQ(n.bursts[0].u2(0), 0.5);
}

TEST(Normalize, AffineMapToUnitRange) {
  const BurstDataset n = normalize(channel_dataset({0.0, 2.0, 1.0}));
  EXPECT_DOUBLE_EQ(n.bursts[0].u0(0), -1.0);
  EXPECT_DOUBLE_EQ(n.bursts[0].u1(0), 1.0);
  EXPECT_DOUBLE_EQ(n.bursts[0].u2(0), 0.0);
}

TEST(Normalize, ConstantChannelMapsToZeroAndIsFlagged) {
  const BurstDataset n = normalize(channel_dataset({5.0, 5.0, 5.0, 5.0, 5.0, 5.0}));
  EXPECT_TRUE(n.stats.degenerate[0]);
  for (const Burst& b : n.bursts) EXPECT_EQ(b.u1(0), 0.0);
  EXPECT_EQ(denormalize(n).bursts[0].u0(0), 5.0);
}

TEST(Normalize, AllChannelsInUnitRangeAndRoundTrip) {
  const BurstDataset ds = linear_dataset(100, 13);
  const BurstDataset n = normalize(ds);
  for (const Burst& b : n.bursts) {
    for (const Vector* u : {&b.u0, &b.u1, &b.u2}) {
      EXPECT_LE(u->cwiseAbs().maxCoeff(), 1.0 + 1e-15);
    }
  }
  const BurstDataset back = denormalize(n);
  for (std::size_t j = 0; j < ds.size(); ++j) {
    for (int i = 0; i < 2; ++i) {
      const double ref = ds.bursts[j].u2(i);
      EXPECT_NEAR(back.bursts[j].u2(i), ref, 1e-12 * std::abs(ref));
    }
  }
  EXPECT_THROW(normalize(n), DomainError);
}

TEST(Normalize, LagChannelAndTimeFeature) {
  const NormStats s = compute_norm_stats(linear_dataset(100, 14), false);
  EXPECT_DOUBLE_EQ(s.normalize_delta(s.delta_lo), -1.0);
  EXPECT_DOUBLE_EQ(s.normalize_delta(s.delta_hi), 1.0);
  const TimeFeature f = s.time_feature(BlockVariant::standard, 1);
  EXPECT_NEAR(f.scale * s.delta_lo + f.offset, -1.0, 1e-12);
  EXPECT_NEAR(f.scale * s.delta_hi + f.offset, 1.0, 1e-12);
  // Each of four blocks sees a quarter of the lag; the feature still spans [-1, 1].
  const TimeFeature f4 = s.time_feature(BlockVariant::standard, 4);
  EXPECT_NEAR(f4.scale * s.delta_hi / 4 + f4.offset, 1.0, 1e-12);
}

TEST(Normalize, LogLagChannel) {
  BurstDataset ds = channel_dataset({0.0, 1.0, 2.0, 0.0, 1.0, 2.0});
  ds.bursts[0].d1 = 1e-4;
  ds.bursts[1].d2 = 1.0;
  const NormStats s = compute_norm_stats(ds, true);
  EXPECT_DOUBLE_EQ(s.delta_lo, 0.0);
  EXPECT_DOUBLE_EQ(s.delta_hi, 4.0);
  const TimeFeature f = s.time_feature(BlockVariant::multiscale, 1);
  EXPECT_NEAR(f.scale * 4.0 + f.offset, 1.0, 1e-12);
  EXPECT_NEAR(f.offset, -1.0, 1e-12);
}

TEST(Split, TenPercentOfTen) {
  const SplitView v = dynamic_split(10, 0.1, 0, 42);
  EXPECT_EQ(v.validation.size(), 1u);
  EXPECT_EQ(v.train.size(), 9u);
}

TEST(Split, SameSeedAndEpochSameSplit) {
  const SplitView a = dynamic_split(50, 0.1, 7, 42);
  const SplitView b = dynamic_split(50, 0.1, 7, 42);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_NE(dynamic_split(50, 0.1, 8, 42).validation, a.validation);
}

TEST(Split, DisjointAndCovering) {
  for (std::uint64_t epoch = 0; epoch < 20; ++epoch) {
    const SplitView v = dynamic_split(37, 0.2, epoch, 3);
    std::vector<int> seen(37, 0);
    for (auto i : v.train) ++seen[i];
    for (auto i : v.validation) ++seen[i];
    for (int c : seen) EXPECT_EQ(c, 1);
    EXPECT_EQ(v.validation.size(), 8u);
  }
}

TEST(Split, EveryBurstValidatesWithinHundredEpochs) {
  int covered_runs = 0;
  const int runs = 200;
  for (int seed = 0; seed < runs; ++seed) {
    std::vector<bool> seen(10, false);
    for (std::uint64_t epoch = 0; epoch < 100; ++epoch) {
      for (auto i : dynamic_split(10, 0.1, epoch, 1000 + seed).validation) seen[i] = true;
    }
    if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) ++covered_runs;
  }
  EXPECT_GE(covered_runs, runs * 99 / 100);
}

TEST(Split, InvalidArgumentsRejected) {
  EXPECT_THROW(dynamic_split(10, 0.0, 0, 1), DomainError);
  EXPECT_THROW(dynamic_split(10, 1.0, 0, 1), DomainError);
  EXPECT_THROW(dynamic_split(1, 0.1, 0, 1), DomainError);
  EXPECT_EQ(dynamic_split(2, 0.9, 0, 1).train.size(), 1u);
}

TEST(DatasetFile, SaveLoadRoundTripIsExact) {
  BurstDataset ds = normalize(add_noise(linear_dataset(25, 15), 0.02, 3));
  ds.provenance.system = "linear";
  const std::string path = temp_path("roundtrip.osgdat");
  save_dataset(path, ds);
  EXPECT_EQ(slurp(path).substr(0, 7), "OSGDAT1");
  const BurstDataset back = load_dataset(path);
  EXPECT_EQ(back.dim, 2);
  EXPECT_TRUE(back.normalized);
  EXPECT_EQ(back.provenance.system, "linear");
  EXPECT_EQ(back.provenance.noise, 0.02);
  EXPECT_EQ(back.stats.lo, ds.stats.lo);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t j = 0; j < ds.size(); ++j) {
    EXPECT_EQ(back.bursts[j].u0, ds.bursts[j].u0);
    EXPECT_EQ(back.bursts[j].d2, ds.bursts[j].d2);
    EXPECT_EQ(back.bursts[j].u2, ds.bursts[j].u2);
  }
}

TEST(DatasetFile, MissingAndCorruptFilesAreIoErrors) {
  try {
    load_dataset(temp_path("does_not_exist.osgdat"));
    FAIL() << "expected an I/O error";
  } catch (const IoError& e) {
    EXPECT_NE(e.path().find("does_not_exist.osgdat"), std::string::npos);
  }
  const std::string bad = temp_path("bad.osgdat");
  std::ofstream(bad) << "garbage";
  EXPECT_THROW(load_dataset(bad), IoError);
  const std::string truncated = temp_path("truncated.osgdat");
  save_dataset(truncated, linear_dataset(5, 1));
  const std::string bytes = slurp(truncated);
  std::ofstream(truncated, std::ios::binary | std::ios::trunc) << bytes.substr(0, bytes.size() - 9);
  EXPECT_THROW(load_dataset(truncated), IoError);
}

TEST(DatasetFile, CsvHasOneRowPerBurst) {
  const BurstDataset ds = linear_dataset(4, 16);
  const std::string path = temp_path("bursts.csv");
  export_csv(path, ds);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "u0_0,u0_1,d1,u1_0,u1_1,d2,u2_0,u2_1");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (rows == 1) {
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
      ASSERT_EQ(cells.size(), 8u);
      EXPECT_EQ(cells[0], ds.bursts[0].u0(0));
      EXPECT_EQ(cells[2], ds.bursts[0].d1);
      EXPECT_EQ(cells[7], ds.bursts[0].u2(1));
    }
  }
  EXPECT_EQ(rows, 4);
}
