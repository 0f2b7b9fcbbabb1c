// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "mlstm/checkpoint.hpp"
#include "mlstm/cli.hpp"
#include "mlstm/error.hpp"
#include "mlstm/run_config.hpp"

namespace mlstm {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "mlstm");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Workspace : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mlstm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

// About 1000 tokens of repetitive text.
std::string small_corpus(int lines, int shift) {
  const std::vector<std::string> words{"the", "cat", "sat", "on", "a", "mat", "and", "dog", "ran", "far"};
  std::ostringstream text;
  for (int k = 0; k < lines; ++k) {
    for (int w = 0; w < 9; ++w) text << words[static_cast<std::size_t>((k * 3 + w + shift) % 10)] << ' ';
    text << '\n';
  }
  return text.str();
}

TEST(RunConfig, PresetsCarryTheirHyperparameters) {
  const RunConfig large = preset_config(Preset::large);
  EXPECT_EQ(large.model.hidden_dim, 1500u);
  EXPECT_EQ(large.model.embed_dim, 1500u);
  EXPECT_EQ(large.model.dropout_rate, 0.65);
  EXPECT_EQ(large.train.initial_lr, 1.2);
  EXPECT_EQ(large.train.clip_norm, 10.0);
  const RunConfig medium = preset_config(Preset::medium);
  EXPECT_EQ(medium.model.hidden_dim, 650u);
  EXPECT_EQ(medium.model.dropout_rate, 0.5);
  const RunConfig small = preset_config(Preset::small);
  EXPECT_EQ(small.model.hidden_dim, 200u);
  EXPECT_EQ(small.model.dropout_rate, 0.4);
  EXPECT_EQ(small.train.initial_lr, 1.0);
  for (const RunConfig& rc : {small, medium, large}) {
    EXPECT_EQ(rc.model.num_layers, 2u);
    EXPECT_EQ(rc.model.cells, 10u);
    EXPECT_EQ(rc.model.strategy, SelectionKind::max_pooling);
    EXPECT_EQ(rc.train.unroll, 35u);
    EXPECT_EQ(rc.train.batch_size, 20u);
  }
  EXPECT_EQ(parse_preset("large"), Preset::large);
  EXPECT_THROW(parse_preset("huge"), Error);
}

TEST_F(Workspace, ConfigFileAndFlagsLayerOverThePreset) {
  const std::string ini = write("run.ini", "preset = large\nm = 4\nstrategy = min_max_pooling\nlr = 0.3\n");
  const RunConfig from_file = parse_config(ini);
  EXPECT_EQ(from_file.model.hidden_dim, 1500u);
  EXPECT_EQ(from_file.model.cells, 4u);
  EXPECT_EQ(from_file.model.strategy, SelectionKind::min_max_pooling);
  EXPECT_EQ(from_file.train.initial_lr, 0.3);

  RunOverrides flags;
  flags.config_path = ini;
  flags.cells = 6;
  flags.seed = 11;
  const RunConfig merged = resolve_run_config(flags);
  EXPECT_EQ(merged.model.cells, 6u);
  EXPECT_EQ(merged.model.seed, 11u);
  EXPECT_EQ(merged.train.seed, 11u);
  EXPECT_EQ(merged.model.dropout_rate, 0.65);

  // The printed form parses back to the same configuration.
  const std::string echoed = write("echo.ini", format_run_config(merged));
  const RunConfig again = parse_config(echoed);
  EXPECT_EQ(again.model, merged.model);
  EXPECT_EQ(again.train, merged.train);
}

ErrorKind config_error(const std::string& file) {
  try {
    parse_config(file);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << file;
  return ErrorKind::io;
}

TEST_F(Workspace, BadConfigurationsAreRejected) {
  EXPECT_EQ(config_error(write("a.ini", "dropout_rate = 1.5\n")), ErrorKind::config);
  EXPECT_EQ(config_error(write("b.ini", "hiden_dim = 10\n")), ErrorKind::config);
  EXPECT_EQ(config_error(write("c.ini", "hidden_dim = many\n")), ErrorKind::config);
  EXPECT_EQ(config_error(write("d.ini", "strategy = median\n")), ErrorKind::config);
  EXPECT_EQ(config_error(write("e.ini", "m = 0\n")), ErrorKind::config);
  EXPECT_EQ(config_error(path("missing.ini")), ErrorKind::io);
}

TEST_F(Workspace, ExitCodesAndErrorLine) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"fly"}).code, kExitUsage);
  EXPECT_EQ(run({"train", "--no-such-flag"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);

  const std::string train = write("train.txt", small_corpus(20, 0));
  const CliResult bad = run({"train", "--config", write("bad.ini", "dropout_rate = 1.5\n"), "--train", train,
                             "--valid", train, "--checkpoint", path("m.ckpt")});
  EXPECT_EQ(bad.code, kExitConfig);
  EXPECT_TRUE(std::regex_search(bad.err, std::regex("^error: kind=config exit=2 message=.*dropout")))
      << bad.err;

  EXPECT_EQ(run({"train", "--config", path("none.ini")}).code, kExitIo);
  EXPECT_EQ(run({"train", "--train", train, "--valid", train}).code, kExitConfig);
  EXPECT_EQ(run({"train", "--train", path("none.txt"), "--valid", train, "--checkpoint", path("m.ckpt")}).code,
            kExitIo);
  EXPECT_EQ(run({"evaluate", "--checkpoint", path("none.ckpt"), "--valid", train}).code, kExitIo);

  std::ofstream(path("junk.ckpt")) << "not a checkpoint";
  const CliResult junk = run({"evaluate", "--checkpoint", path("junk.ckpt"), "--valid", train});
  EXPECT_EQ(junk.code, kExitIo);
  EXPECT_NE(junk.err.find("kind=corrupt"), std::string::npos);
}

TEST(Cli, GradcheckSucceeds) {
  const CliResult r = run({"gradcheck", "--strategy", "max_pooling"});
  EXPECT_EQ(r.code, kExitOk) << r.out << r.err;
  EXPECT_NE(r.out.find("gradcheck PASS"), std::string::npos);
}

TEST_F(Workspace, TrainEvaluateGenerate) {
  const std::string train = write("train.txt", small_corpus(100, 0));
  const std::string valid = write("valid.txt", small_corpus(12, 4));
  const std::string ckpt = path("runs/model.ckpt");
  const auto start = std::chrono::steady_clock::now();
  const CliResult trained = run({"train", "--preset", "small", "--hidden_dim", "24", "--m", "3",
                                 "--max_epochs", "3", "--batch_size", "4", "--unroll", "10", "--train", train,
                                 "--valid", valid, "--test", valid, "--checkpoint", ckpt, "--seed", "5"});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(trained.code, kExitOk) << trained.err;
  EXPECT_LT(seconds, 60.0);
  EXPECT_NE(trained.out.find("# hidden_dim = 24"), std::string::npos);
  EXPECT_NE(trained.out.find("epoch,lr,train_ppl,valid_ppl,given_chances"), std::string::npos);
  ASSERT_TRUE(fs::exists(ckpt));
  ASSERT_TRUE(fs::exists(ckpt + ".log"));

  std::smatch best;
  ASSERT_TRUE(std::regex_search(trained.out, best, std::regex("best_valid_ppl=([0-9.]+)")));
  const Checkpoint loaded = load_checkpoint(ckpt);
  EXPECT_EQ(loaded.model.hidden_dim, 24u);
  EXPECT_EQ(loaded.model.cells, 3u);

  const CliResult evaluated = run({"evaluate", "--checkpoint", ckpt, "--valid", valid});
  ASSERT_EQ(evaluated.code, kExitOk) << evaluated.err;
  std::smatch ppl;
  ASSERT_TRUE(std::regex_search(evaluated.out, ppl, std::regex("^valid tokens=\\d+ nll=[0-9.]+ ppl=([0-9.]+)")));
  EXPECT_EQ(ppl[1].str(), best[1].str());

  const std::vector<std::string> greedy{"generate", "--checkpoint", ckpt, "--prompt", "the cat",
                                        "--length", "12", "--temperature", "0"};
  const CliResult generated = run(greedy);
  ASSERT_EQ(generated.code, kExitOk) << generated.err;
  EXPECT_EQ(generated.out, run(greedy).out);

  const CliResult sampled = run({"generate", "--checkpoint", ckpt, "--prompt", "the cat", "--length", "40",
                                 "--temperature", "1", "--seed", "3"});
  ASSERT_EQ(sampled.code, kExitOk) << sampled.err;
  std::istringstream words(sampled.out);
  std::size_t known = 0;
  for (std::string w; words >> w;) known += loaded.vocab.find(w).has_value() ? 1 : 0;
  EXPECT_GE(known, 1u);
  EXPECT_EQ(run({"generate", "--checkpoint", ckpt, "--temperature", "-1"}).code, kExitConfig);
}

}  // namespace
}  // namespace mlstm
