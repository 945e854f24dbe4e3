#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slump/checkpoint.hpp"
#include "slump/cli.hpp"
#include "slump/pipeline.hpp"
#include "slump/synthgen.hpp"
#include "slump/train.hpp"

using namespace slump;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result slump_cmd(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("slump_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string run_dir(const std::string& sub = "") const { return (dir / sub).string(); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, ParamsReportsExactTotals) {
  const auto r = slump_cmd({"params", "all", "--run-dir", run_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("total                   277,601  (278K)  expected 277,601: match"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("70,817  (71K)  expected 70,817: match"), std::string::npos);
  EXPECT_NE(r.out.find("315,969  (316K)  expected 315,969: match"), std::string::npos);
  EXPECT_EQ(slump_cmd({"params", "D", "--run-dir", run_dir()}).code, cli::kExitInput);
}

TEST_F(Cli, HelpEnumeratesEveryKey) {
  const auto r = slump_cmd({"--help"});
  ASSERT_EQ(r.code, 0);
  for (const std::string key : {"--run-dir", "--threads", "--config", "--n", "--seed", "--preset", "--ratios",
                                "--slump-min", "--slump-max", "--out", "--model", "--manifest", "--epochs",
                                "--batch-size", "--lr", "--weight-decay", "--seeds", "--eval-every", "--output-init",
                                "--deterministic", "--cache", "--checkpoint", "--split", "--scale", "--coords",
                                "--tolerance", "--log", "SLUMP_BATCH_SIZE", "[1e-4]", "[standardize]"})
    EXPECT_NE(r.out.find(key), std::string::npos) << key;
  EXPECT_EQ(slump_cmd({}).code, cli::kExitInput);
  EXPECT_EQ(slump_cmd({"frobnicate"}).code, cli::kExitInput);
}

TEST_F(Cli, SynthSplitsAndDeterminism) {
  auto r = slump_cmd({"synth", "--n", "3", "--run-dir", run_dir("a")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("train 1, val 1, test 1"), std::string::npos) << r.out;

  r = slump_cmd({"synth", "--n", "255", "--seed", "1", "--run-dir", run_dir("b")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("train 185, val 35, test 35"), std::string::npos) << r.out;
  r = slump_cmd({"synth", "--n", "255", "--seed", "1", "--run-dir", run_dir("c")});
  ASSERT_EQ(r.code, 0);
  const auto m1 = slurp(dir / "b/data/manifest.csv"), m2 = slurp(dir / "c/data/manifest.csv");
  EXPECT_EQ(count_lines(m1), 256u);
  EXPECT_EQ(m1, m2);
  EXPECT_EQ(slurp(dir / "b/data/clip_0100.cwv"), slurp(dir / "c/data/clip_0100.cwv"));

  r = slump_cmd({"synth", "--run-dir", run_dir("d")});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("wrote 96 desk clips"), std::string::npos);
  EXPECT_NE(r.out.find("train 64, val 16, test 16"), std::string::npos);
}

TEST_F(Cli, InputErrorsExitTwo) {
  EXPECT_EQ(slump_cmd({"synth", "--n", "3", "--run-dir", "/proc/slump-nope"}).code, cli::kExitInput);
  EXPECT_EQ(slump_cmd({"synth", "--n", "2", "--run-dir", run_dir()}).code, cli::kExitInput);
  EXPECT_EQ(slump_cmd({"synth", "--n", "three", "--run-dir", run_dir()}).code, cli::kExitInput);
  EXPECT_EQ(slump_cmd({"synth", "--n", "3", "--out", "../escape", "--run-dir", run_dir()}).code, cli::kExitInput);
  EXPECT_EQ(slump_cmd({"synth", "--preset", "huge", "--run-dir", run_dir()}).code, cli::kExitInput);
  EXPECT_EQ(slump_cmd({"train", "--run-dir", run_dir(), "--manifest", "/nonexistent.csv"}).code, cli::kExitInput);
  EXPECT_EQ(slump_cmd({"train", "--model", "all", "--run-dir", run_dir()}).code, cli::kExitInput);
  EXPECT_EQ(slump_cmd({"train", "--unknown-flag", "1", "--run-dir", run_dir()}).code, cli::kExitInput);
}

TEST_F(Cli, ConfigFileEnvAndFlagPrecedence) {
  fs::create_directories(dir);
  const auto cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# synth settings\nn = 4\nseed = 9   # trailing comment\n\nslump-min = 50\n";
  auto r = slump_cmd({"synth", "--config", cfg.string(), "--run-dir", run_dir("x")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("wrote 4 desk clips"), std::string::npos) << r.out;
  const auto log = slurp(dir / "x/run.log");
  EXPECT_NE(log.find("n = 4  # config"), std::string::npos) << log;
  EXPECT_NE(log.find("slump_min = 50  # config"), std::string::npos);
  EXPECT_NE(log.find("preset = desk  # default"), std::string::npos);

  ::setenv("SLUMP_N", "5", 1);
  r = slump_cmd({"synth", "--config", cfg.string(), "--run-dir", run_dir("y")});
  EXPECT_NE(r.out.find("wrote 5 desk clips"), std::string::npos) << r.out;
  r = slump_cmd({"synth", "--config", cfg.string(), "--n", "3", "--run-dir", run_dir("z")});
  EXPECT_NE(r.out.find("wrote 3 desk clips"), std::string::npos) << r.out;
  ::unsetenv("SLUMP_N");

  std::ofstream(cfg) << "n = 4\nnum_clips = 4\n";
  r = slump_cmd({"synth", "--config", cfg.string(), "--run-dir", run_dir("w")});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find("unknown key 'num_clips'"), std::string::npos) << r.err;
  std::ofstream(cfg) << "n 4\n";
  EXPECT_EQ(slump_cmd({"synth", "--config", cfg.string(), "--run-dir", run_dir("w")}).code, cli::kExitInput);
  EXPECT_EQ(slump_cmd({"synth", "--config", (dir / "missing.cfg").string(), "--run-dir", run_dir("w")}).code,
            cli::kExitInput);
}

TEST_F(Cli, TrainSmokeDeterminismEvalAndCurves) {
  ASSERT_EQ(slump_cmd({"synth", "--n", "6", "--run-dir", run_dir()}).code, 0);
  auto r = slump_cmd({"train", "--epochs", "1", "--n", "1", "--run-dir", run_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  // A 1-sample run memorizes its sample.
  ASSERT_EQ(slump_cmd({"train", "--epochs", "5", "--n", "1", "--run-dir", run_dir("memo"), "--manifest",
                       (dir / "data/manifest.csv").string()})
                .code,
            0);
  ASSERT_EQ(slump_cmd({"eval", "--split", "train", "--n", "1", "--run-dir", run_dir("memo"), "--manifest",
                       (dir / "data/manifest.csv").string()})
                .code,
            0);
  const auto memo = slurp(dir / "memo/metrics.csv");
  const auto row = memo.substr(memo.find("\n0,train,1,") + 11);
  EXPECT_LT(std::stod(row.substr(0, row.find('\n'))), 2.0) << memo;

  // Two seeded runs in sibling directories read the same manifest.
  const std::string manifest = (dir / "data/manifest.csv").string();
  for (const char* sub : {"r1", "r2"}) {
    r = slump_cmd({"train", "--model", "B", "--epochs", "2", "--seed", "5", "--manifest", manifest, "--threads", "1",
                   "--run-dir", run_dir(sub)});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(dir / "r1/train_log.csv"), slurp(dir / "r2/train_log.csv"));
  EXPECT_EQ(slurp(dir / "r1/checkpoint.ckpt"), slurp(dir / "r2/checkpoint.ckpt"));
  EXPECT_EQ(count_lines(slurp(dir / "r1/train_log.csv")), 3u);

  r = slump_cmd({"curves", "--run-dir", run_dir("r1")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 5u);  // header + 2 train + 2 val
  const auto log = TrainLog::from_csv(slurp(dir / "r1/train_log.csv"));
  std::istringstream rows(r.out);
  std::string line;
  std::getline(rows, line);
  EXPECT_EQ(line, "series,epoch,value");
  std::vector<double> train_vals, val_vals;
  while (std::getline(rows, line)) {
    const auto a = line.find(','), b = line.rfind(',');
    (line.substr(0, a) == "train" ? train_vals : val_vals).push_back(std::stod(line.substr(b + 1)));
  }
  ASSERT_EQ(train_vals.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(train_vals[i], log.records[i].train_loss);
    EXPECT_EQ(val_vals[i], log.records[i].val_mae);
  }
  std::ofstream(dir / "r1/broken.csv") << "epoch,train_loss\n1,2\n";
  EXPECT_EQ(slump_cmd({"curves", "broken.csv", "--run-dir", run_dir("r1")}).code, cli::kExitInput);

  r = slump_cmd({"eval", "--manifest", manifest, "--split", "val", "--run-dir", run_dir("r1")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("MAE results on 1 validation video clips."), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("Model-B    "), std::string::npos);
  EXPECT_EQ(slump_cmd({"eval", "--preset", "paper-shape", "--manifest", manifest, "--run-dir", run_dir("r1")}).code,
            cli::kExitInput);
}

TEST_F(Cli, EvalSeedsWritesOneRowPerSeed) {
  ASSERT_EQ(slump_cmd({"synth", "--n", "6", "--run-dir", run_dir()}).code, 0);
  ASSERT_EQ(slump_cmd({"train", "--model", "A", "--epochs", "1", "--seeds", "3", "--run-dir", run_dir()}).code, 0);
  for (int s = 0; s < 3; ++s) EXPECT_TRUE(fs::exists(dir / ("seed_" + std::to_string(s)) / "checkpoint.ckpt"));
  const auto r = slump_cmd({"eval", "--seeds", "3", "--run-dir", run_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto metrics = slurp(dir / "metrics.csv");
  EXPECT_EQ(count_lines(metrics), 6u);  // header, 3 seeds, mean, std
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')), "seed,split,samples,mae_cm");
  EXPECT_NE(r.out.find("MAE results on 1 testing video clips."), std::string::npos);
  EXPECT_NE(r.out.find("cm ±"), std::string::npos);
  EXPECT_EQ(slump_cmd({"eval", "--seeds", "4", "--run-dir", run_dir()}).code, cli::kExitInput);
}

TEST_F(Cli, ConstantPredictorCheckpoint) {
  fs::create_directories(dir / "data");
  const auto preset = SynthPreset::desk();
  std::vector<ManifestRow> rows;
  const std::pair<double, Split> clips[] = {{100.0, Split::kTrain}, {40.0, Split::kTest}, {190.0, Split::kTest}};
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string name = "c" + std::to_string(i) + ".cwv";
    cwv::write(dir / "data" / name, generate_clip(preset.params_for({i, clips[i].first, clips[i].second, 10 + i})));
    rows.push_back({name, clips[i].first, clips[i].second, 10 + i});
  }
  write_manifest(dir / "data/manifest.csv", rows);
  auto m = build_model<float>(ModelId::kC, RngStream(0), PipelineConfig::desk().input_shape());
  auto w = m.head().weights.mutable_data();
  std::fill(w.begin(), w.end(), 0.0f);
  m.head().bias.mutable_data()[0] = 70.0f;
  Checkpoint::from_model(m).save(dir / "const.ckpt");
  const auto r = slump_cmd({"eval", "--checkpoint", "const.ckpt", "--run-dir", run_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto metrics = slurp(dir / "metrics.csv");
  EXPECT_NE(metrics.find("0,test,2,75\n"), std::string::npos) << metrics;  // (30 + 120) / 2
  EXPECT_NE(r.out.find("75.0cm ±0.0cm"), std::string::npos);
}

TEST_F(Cli, GradcheckExitCodes) {
  auto r = slump_cmd({"gradcheck", "B", "--run-dir", run_dir()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("end-to-end"), std::string::npos);
  r = slump_cmd({"gradcheck", "A", "--tolerance", "0", "--run-dir", run_dir()});
  EXPECT_EQ(r.code, cli::kExitVerify);
  EXPECT_NE(r.err.find("model A layer block1.conv2d"), std::string::npos) << r.err;
  EXPECT_EQ(slump_cmd({"gradcheck", "Z", "--run-dir", run_dir()}).code, cli::kExitInput);
}

TEST_F(Cli, NonFiniteLossExitsThree) {
  ASSERT_EQ(slump_cmd({"synth", "--n", "6", "--run-dir", run_dir()}).code, 0);
  const auto r = slump_cmd({"train", "--model", "A", "--epochs", "3", "--lr", "1e30", "--run-dir", run_dir()});
  EXPECT_EQ(r.code, cli::kExitNumeric);
  EXPECT_NE(r.err.find("non-finite"), std::string::npos) << r.err;
}
