#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string output;
};

CliRun osg(const std::string& args) {
  const std::string cmd = std::string(OSG_BINARY) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* tiny_config = R"({
  "name": "tiny",
  "problem": "linear",
  "dataset": {"bursts": 10},
  "network": {"hidden": [8, 8]},
  "training": {"epochs": 6, "history_interval": 2, "probe_tuples": 10},
  "evaluation": {"trajectories": 4, "steps": 5, "partitions": 5,
                 "consistency_probes": 4, "consistency_partitions": 3}
})";

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    root_ = fs::path(::testing::TempDir()) /
            (std::string("osgcli-") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
    config_ = (root_ / "tiny.json").string();
    std::ofstream(config_) << tiny_config;
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string args(const std::string& sub, const std::string& dir) const {
    return sub + " --config " + config_ + " --out-dir " + (root_ / dir).string();
  }

  fs::path root_;
  std::string config_;
};

}  // namespace

TEST_F(Cli, ListsBundledConfigs) {
  const CliRun r = osg("--list-configs");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("advection-k4"), std::string::npos);
}

TEST_F(Cli, GenerateIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(osg(args("generate", "a")).code, 0);
  ASSERT_EQ(osg(args("generate", "b")).code, 0);
  const std::string a = slurp(root_ / "a" / "dataset.osgdat");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(root_ / "b" / "dataset.osgdat"));
  EXPECT_FALSE(fs::exists(root_ / "a" / ".lock"));
}

TEST_F(Cli, SeedOverrideChangesTheDataset) {
  ASSERT_EQ(osg(args("generate", "a")).code, 0);
  ASSERT_EQ(osg(args("generate", "b") + " --seed-override dataset=99").code, 0);
  EXPECT_NE(slurp(root_ / "a" / "dataset.osgdat"), slurp(root_ / "b" / "dataset.osgdat"));
  EXPECT_EQ(osg(args("generate", "c") + " --seed-override bogus=1").code, 2);
}

TEST_F(Cli, MissingDatasetIsReportedWithItsPath) {
  const CliRun r = osg(args("train", "empty"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find((root_ / "empty" / "dataset.osgdat").string()), std::string::npos)
      << r.output;
}

TEST_F(Cli, ConfigErrorsExitWithTwo) {
  const std::string bad = (root_ / "bad.json").string();
  std::ofstream(bad) << R"({"name": "bad", "dataset": {"bursts": 0}})";
  const CliRun r = osg("generate --config " + bad + " --out-dir " + (root_ / "bad").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("dataset.bursts"), std::string::npos) << r.output;
  EXPECT_EQ(osg("generate --config no-such-config").code, 2);
  EXPECT_NE(osg("frobnicate").code, 0);
}

TEST_F(Cli, OracleEvaluationIsExact) {
  const CliRun r = osg(args("evaluate", "oracle") + " --oracle");
  ASSERT_EQ(r.code, 0) << r.output;
  std::ifstream in(root_ / "oracle" / "eval-oracle.curve.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,mean_rel_error");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_LE(std::stod(line.substr(line.find(',') + 1)), 1e-8) << line;
  }
  EXPECT_EQ(rows, 5);
}

TEST_F(Cli, FullPipelineRerunIsByteIdentical) {
  for (const char* dir : {"a", "b"}) {
    ASSERT_EQ(osg(args("generate", dir)).code, 0);
    const CliRun t = osg(args("train", dir));
    ASSERT_EQ(t.code, 0) << t.output;
    const CliRun c = osg(args("compare", dir));
    ASSERT_EQ(c.code, 0) << c.output;
  }
  for (const char* file : {"dataset.osgdat", "history-baseline.csv", "history-lisg.csv",
                           "history-gdsg.csv", "model-gdsg.osgmdl", "compare.csv",
                           "eval-gdsg.curve.csv", "eval-lisg.curve.csv"}) {
    const std::string a = slurp(root_ / "a" / file);
    EXPECT_FALSE(a.empty()) << file;
    EXPECT_EQ(a, slurp(root_ / "b" / file)) << file;
  }
}

TEST_F(Cli, EvaluateReportsMissingModels) {
  ASSERT_EQ(osg(args("generate", "a")).code, 0);
  const CliRun r = osg(args("evaluate", "a"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("missing model"), std::string::npos) << r.output;
}

TEST_F(Cli, VerifyRunsOnTrainedModels) {
  ASSERT_EQ(osg(args("generate", "a")).code, 0);
  ASSERT_EQ(osg(args("train", "a") + " --method gdsg").code, 0);
  const CliRun r = osg(args("verify", "a") + " --method gdsg");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("gdsg: Consistency check: holds"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("random-init: Consistency check: holds"), std::string::npos);
  EXPECT_TRUE(fs::exists(root_ / "a" / "verify.txt"));
}
