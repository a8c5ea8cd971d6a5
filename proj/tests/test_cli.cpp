// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0
//
// Runs the smokegrid executable end to end on small worlds.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "smokegrid/config.hpp"

namespace fs = std::filesystem;
using namespace smokegrid;

namespace {

const char* kToy =
    "# small world for fast runs\n"
    "sim.rows = 16\n"
    "sim.cols = 16\n"
    "frames = 12\n"
    "sim.stations = 6\n"
    "net.backbone = 3x4:relu,3x4:relu\n"
    "net.head_fw = 3x1:none\n"
    "net.head_bscan = 3x1:none\n"
    "net.head_pm25 = 3x1:none\n"
    "epochs = 2\n";

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("smokegrid_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "toy.conf") << kToy;
  }
  void TearDown() override {
    if (!HasFailure()) fs::remove_all(dir_);
  }

  CliRun run(const std::string& args, const fs::path& where = {}) const {
    const fs::path cwd = where.empty() ? dir_ : where;
    const std::string cmd = "cd '" + cwd.string() + "' && '" SMOKEGRID_CLI "' " + args + " > '" +
                            (dir_ / "stdout.txt").string() + "' 2> '" + (dir_ / "stderr.txt").string() + "'";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(dir_ / "stdout.txt");
    r.err = slurp(dir_ / "stderr.txt");
    return r;
  }

  fs::path dir_;
};

}  // namespace

TEST(RunConfig, UnknownKeyRejectedAndDefaultsDocumented) {
  RunConfig c;
  EXPECT_THROW(c.set("no_such_key", "1"), Error);
  EXPECT_EQ(c.get("seed"), "7");
  EXPECT_EQ(c.get("split.train"), "0.8");
  for (const auto& k : config_keys()) {
    EXPECT_NE(std::string(k.help), "") << k.name;
    EXPECT_EQ(c.get(k.name), k.default_value);
  }
}

TEST(RunConfig, TypedAccessorsValidate) {
  RunConfig c;
  c.set("epochs", "abc");
  EXPECT_THROW(c.train_config(), Error);
  c.set("epochs", "3");
  EXPECT_EQ(c.train_config().epochs, 3u);
  c.set("precision", "float16");
  EXPECT_THROW(c.precision(), Error);
  c.set("split.train", "0.9");
  EXPECT_THROW(c.split_ratios(), Error);
  const auto spec = RunConfig{}.network_spec(9);
  EXPECT_EQ(spec, NetworkSpec::defaults(9));
}

TEST_F(Cli, ListKeys) {
  const auto r = run("--list-keys");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("gradcheck.tolerance"), std::string::npos);
}

TEST_F(Cli, UnknownKeyIsAnError) {
  const auto r = run("synth --no_such_key 3");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no_such_key"), std::string::npos);
}

TEST_F(Cli, ConfigFileErrorsNameTheLine) {
  std::ofstream(dir_ / "bad.conf") << "seed = 3\nthis line is wrong\n";
  const auto r = run("synth --config bad.conf");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.conf:2"), std::string::npos) << r.err;
}

TEST_F(Cli, SynthZeroFrames) {
  const auto r = run("synth --config toy.conf --frames 0");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("wrote 0 frames"), std::string::npos);
}

TEST_F(Cli, SynthIsDeterministic) {
  ASSERT_EQ(run("synth --config toy.conf --archive a").code, 0);
  ASSERT_EQ(run("synth --config toy.conf --archive=b").code, 0);
  for (const auto& e : fs::directory_iterator(dir_ / "a")) {
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / e.path().filename())) << e.path();
  }
  ASSERT_EQ(run("synth --config toy.conf --archive c --seed 8").code, 0);
  EXPECT_NE(slurp(dir_ / "a" / "input.wft"), slurp(dir_ / "c" / "input.wft"));
}

TEST_F(Cli, CommandLineOverridesConfigFile) {
  const auto r = run("synth --config toy.conf --frames 3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("wrote 3 frames (16x16)"), std::string::npos) << r.out;
}

TEST_F(Cli, IngestCsv) {
  std::ofstream(dir_ / "obs.csv") << "timestamp,lat,lon,variable,value\n"
                                     "2018-07-02T00:00:00Z,55.0,-125.0,pm25,12.0\n"
                                     "2018-07-01T00:00:00Z,55.0,-125.0,frp,300\n"
                                     "2018-07-01T00:00:00Z,10.0,10.0,aod,0.3\n";
  const auto r = run("ingest --inputs obs.csv --archive ingested");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("wrote 1 frames"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("skipped observations 1"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "ingested" / "manifest.txt"));

  std::ofstream(dir_ / "broken.csv") << "timestamp,lat,lon,variable,value\n"
                                        "2018-07-02T00:00:00Z,55.0,-125.0,pm25,12.0\n"
                                        "2018-07-02T00:00:00Z,55.0,pm25,12.0\n";
  const auto bad = run("ingest --inputs broken.csv --archive broken");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("broken.csv:3"), std::string::npos) << bad.err;
}

TEST_F(Cli, TrainMissingArchive) {
  const auto r = run("train --config toy.conf --archive nowhere");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nowhere"), std::string::npos) << r.err;
}

TEST_F(Cli, TrainResumeAndEval) {
  ASSERT_EQ(run("synth --config toy.conf").code, 0);
  const auto t1 = run("train --config toy.conf --epochs 1");
  ASSERT_EQ(t1.code, 0) << t1.err;
  EXPECT_TRUE(fs::exists(dir_ / "runs" / "model.ckpt"));
  const std::string h1 = slurp(dir_ / "runs" / "history.csv");
  EXPECT_EQ(h1.substr(0, h1.find('\n')), "epoch,train_loss,val_loss,step");
  EXPECT_EQ(std::count(h1.begin(), h1.end(), '\n'), 2);

  const auto t2 = run("train --config toy.conf --epochs 1 --resume");
  ASSERT_EQ(t2.code, 0) << t2.err;
  EXPECT_NE(t2.err.find("resuming"), std::string::npos);
  const std::string h2 = slurp(dir_ / "runs" / "history.csv");
  const auto last_step = [](const std::string& h) {
    const std::string line = h.substr(h.rfind('\n', h.size() - 2) + 1);
    return std::stoull(line.substr(line.rfind(',') + 1));
  };
  EXPECT_GT(last_step(h2), last_step(h1));

  const auto e = run("eval --config toy.conf --heatmaps 3 --eval.subset all");
  ASSERT_EQ(e.code, 0) << e.err;
  const std::string csv = slurp(dir_ / "runs" / "report" / "report.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "system,bucket,mae,record_count,dense_mae,dense_non_station_mae");
  for (const char* sys : {"Model,", "FireWork,", "BlueSky,", "NearestStation,"})
    EXPECT_NE(csv.find(sys), std::string::npos) << sys;
  std::size_t pgm = 0;
  for (const auto& f : fs::directory_iterator(dir_ / "runs" / "report"))
    if (f.path().extension() == ".pgm") ++pgm;
  EXPECT_EQ(pgm, 3u);
  EXPECT_TRUE(fs::exists(dir_ / "runs" / "report" / "report.txt"));
}

TEST_F(Cli, ResumeWithDifferentSpecRejected) {
  ASSERT_EQ(run("synth --config toy.conf").code, 0);
  ASSERT_EQ(run("train --config toy.conf --epochs 1").code, 0);
  const auto r = run("train --config toy.conf --epochs 1 --resume --net.backbone 3x8:relu");
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, TrainingIsDeterministic) {
  ASSERT_EQ(run("synth --config toy.conf").code, 0);
  ASSERT_EQ(run("train --config toy.conf --checkpoint one.ckpt --history one.csv").code, 0);
  ASSERT_EQ(run("train --config toy.conf --checkpoint two.ckpt --history two.csv").code, 0);
  EXPECT_EQ(slurp(dir_ / "one.ckpt"), slurp(dir_ / "two.ckpt"));
  EXPECT_EQ(slurp(dir_ / "one.csv"), slurp(dir_ / "two.csv"));
}

TEST_F(Cli, DoublePrecisionTraining) {
  ASSERT_EQ(run("synth --config toy.conf --frames 5").code, 0);
  const auto r = run("train --config toy.conf --precision float64 --epochs 1");
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(run("eval --config toy.conf --eval.subset all").code, 0);
}

TEST_F(Cli, Gradcheck) {
  const auto ok = run("gradcheck");
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  EXPECT_NE(ok.out.find("network total_loss"), std::string::npos);
  const auto again = run("gradcheck");
  EXPECT_EQ(ok.out, again.out);
  const auto bad = run("gradcheck --gradcheck.inject_fault");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos) << bad.out;
}
