/**
 * Copyright (c) The introspect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include <unistd.h>
#include <zlib.h>

#include <fmt/format.h>

#include "introspect/app/checkpoint.hpp"
#include "introspect/app/commands.hpp"
#include "introspect/app/config.hpp"
#include "introspect/app/io.hpp"
#include "introspect/app/pipeline.hpp"

namespace introspect::app {
namespace {

using nn::Index;
using nn::Rng;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / fmt::format("introspect-test-{}-{}", ::getpid(), counter++);
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string bytes_of(const fs::path& p) { return read_text_file(p); }

RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.output_dir = out;
  c.seed = 3;
  c.stages.episodes = 20;
  c.collect_episodes = 10;
  c.vae_training.epochs = 3;
  c.actor_critic.episodes = 30;
  c.exp2_seeds = {1};
  return c;
}

TEST(Config, DefaultsParseFromEmptyText) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.vae.input, 256);
  EXPECT_EQ(c.vae.latent, 50);
  EXPECT_EQ(c.actor_critic.episodes, 2000);
  EXPECT_EQ(c.adam.learning_rate, 1e-3);
}

TEST(Config, ParsesSections) {
  const RunConfig c = parse_config(
      "[run]\nseed = 42\nvariant = means-only\nnoise_level = 0.1\n"
      "[vae]\nencoder_hidden = 300, 100\n[actor_critic]\ngamma = 0.9\n");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.variant, introspection::WiringVariant::MeansOnly);
  EXPECT_EQ(c.noise_level, 0.1);
  EXPECT_EQ(c.vae.encoder_hidden, (std::vector<Index>{300, 100}));
  EXPECT_EQ(c.actor_critic.gamma, 0.9);
}

TEST(Config, RoundTripsThroughIni) {
  RunConfig c = small_config("some/dir");
  c.variant = introspection::WiringVariant::ConcatFeaturesMeans;
  c.noise_level = 0.05;
  c.env.align_rate = 0.123456789012345;
  c.exp3_noise_levels = {0.01, 0.2, 0.3};
  const std::string ini = to_ini(c);
  EXPECT_EQ(to_ini(parse_config(ini)), ini);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config("[run]\nseeed = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("[nope]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[run]\nseed = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("[run]\nvariant = fancy\n"), ConfigError);
  EXPECT_THROW(parse_config("[network]\nfe_hidden1 = 100\n"), ConfigError);
  EXPECT_THROW(parse_config("[actor_critic]\nbehaviour_timeout = 0\n"), ConfigError);
}

Matrix random_block(Rng& rng) {
  std::uniform_int_distribution<int> size(0, 6);
  const Index r = size(rng), c = size(rng);
  return nn::standard_normal(r, c, rng);
}

TEST(Checkpoint, RoundTripFuzz) {
  Rng rng = nn::make_rng(12, 0);
  for (int trial = 0; trial < 100; ++trial) {
    Checkpoint ck;
    ck.config = fmt::format("[run]\nseed = {}\n", trial);
    std::uniform_int_distribution<int> count(0, 5);
    const int n = count(rng);
    for (int b = 0; b < n; ++b) ck.add(fmt::format("block{}", b), random_block(rng));
    const std::string bytes = serialize(ck);
    const Checkpoint back = deserialize(bytes);
    ASSERT_EQ(back.config, ck.config);
    ASSERT_EQ(back.blocks.size(), ck.blocks.size());
    for (std::size_t b = 0; b < ck.blocks.size(); ++b) {
      EXPECT_EQ(back.blocks[b].name, ck.blocks[b].name);
      EXPECT_EQ(back.blocks[b].value.rows(), ck.blocks[b].value.rows());
      EXPECT_EQ(back.blocks[b].value.cols(), ck.blocks[b].value.cols());
      EXPECT_TRUE(back.blocks[b].value == ck.blocks[b].value);
    }
    EXPECT_EQ(serialize(back), bytes);
  }
}

TEST(Checkpoint, DetectsCorruption) {
  Checkpoint ck;
  ck.config = "x";
  ck.add("w", Matrix::Ones(3, 2));
  const std::string bytes = serialize(ck);

  try {
    deserialize(bytes.substr(0, bytes.size() - 5));
    FAIL() << "truncated checkpoint accepted";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
  }

  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  EXPECT_THROW(deserialize(flipped), CheckpointError);

  std::string magic = bytes;
  magic[0] = 'X';
  try {
    deserialize(magic);
    FAIL() << "bad magic accepted";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
}

TEST(Checkpoint, RejectsOtherVersions) {
  Checkpoint ck;
  ck.add("w", Matrix::Ones(1, 1));
  std::string bytes = serialize(ck);
  bytes[8] = 2;  // first byte of the little-endian version field
  // Re-seal so only the version is wrong.
  bytes.resize(bytes.size() - 4);
  const std::uint32_t crc = static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<unsigned>(bytes.size())));
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((crc >> (8 * i)) & 0xff));
  try {
    deserialize(bytes);
    FAIL() << "version 2 accepted";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Checkpoint, RestoreChecksShapes) {
  Param p{"w", Matrix::Zero(2, 2)};
  Checkpoint ck;
  ck.add("w", Matrix::Ones(2, 3));
  Param* params[] = {&p};
  EXPECT_THROW(ck.restore(params), CheckpointError);
  Param q{"missing", Matrix::Zero(1, 1)};
  Param* others[] = {&q};
  EXPECT_THROW(ck.restore(others), CheckpointError);
}

TEST(TrainingLogCsv, RoundTrips) {
  bbrl::TrainingLog log;
  log.seed = 9;
  log.variant = introspection::WiringVariant::MeansLogvar;
  log.noise_level = 0.1;
  for (int i = 0; i < 5; ++i) {
    bbrl::EpisodeRecord e;
    e.episode = i;
    e.success = i % 2 == 1;
    e.episode_return = -0.01 * i + (e.success ? 1.0 : 0.0);
    e.steps = 10 + i;
    e.decisions = 3;
    e.mean_value[0] = 0.1 * i;
    if (i > 2) e.mean_value[2] = 1.0 / 3.0;
    e.behaviour_counts = {1, i % 2, 2 - i % 2};
    e.actor_loss = 1e-17 * i;
    e.critic_loss = 0.5;
    e.update_count = i + 1;
    log.episodes.push_back(e);
  }
  const std::string csv = training_log_csv(log);
  const bbrl::TrainingLog back = parse_training_log_csv(csv);
  EXPECT_EQ(training_log_csv(back), csv);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(back.episodes[4].mean_value[2], 1.0 / 3.0);
  EXPECT_FALSE(back.episodes[1].mean_value[2].has_value());

  std::string broken = csv;
  broken.insert(broken.find('\n', broken.find('\n', broken.find('\n') + 1) + 1) + 1, "1,2,3\n");
  try {
    parse_training_log_csv(broken);
    FAIL() << "malformed log accepted";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

// The whole command chain on a tiny configuration. Shared because stage
// training dominates the cost.
class Commands : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    config_ = small_config(dir_->path() / "a");
    cmd_train_stages(config_);
    cmd_collect(config_, config_.output_dir / "stages.ckpt");
    cmd_train_vae(config_, config_.output_dir / "activations.jsonl");
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static TempDir* dir_;
  static RunConfig config_;
};
TempDir* Commands::dir_ = nullptr;
RunConfig Commands::config_;

TEST_F(Commands, VaeCurveHasOneRowPerEpoch) {
  const std::string csv = bytes_of(config_.output_dir / "vae_loss.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), config_.vae_training.epochs + 1);
  EXPECT_TRUE(fs::exists(config_.output_dir / "embedding.csv"));
  EXPECT_TRUE(fs::exists(config_.output_dir / "latent_structure.csv"));
}

TEST_F(Commands, RerunsAreByteIdentical) {
  const char* stage_files[] = {"stages.ckpt", "stage_loss.csv", "activations.jsonl",
                               "vae.ckpt", "vae_loss.csv", "embedding.csv", "latent_structure.csv"};
  std::map<std::string, std::string> before;
  for (const char* f : stage_files) before[f] = bytes_of(config_.output_dir / f);
  cmd_train_stages(config_);
  cmd_collect(config_, config_.output_dir / "stages.ckpt");
  cmd_train_vae(config_, config_.output_dir / "activations.jsonl");
  for (const char* f : stage_files) EXPECT_EQ(before[f], bytes_of(config_.output_dir / f)) << f;

  RunConfig ac = config_;
  ac.variant = introspection::WiringVariant::MeansLogvar;
  ac.output_dir = dir_->path() / "ac";
  const char* ac_files[] = {"training_log.csv", "success_curve.csv", "actor_critic.ckpt"};
  cmd_train_ac(ac, config_.output_dir / "stages.ckpt", config_.output_dir / "vae.ckpt");
  for (const char* f : ac_files) before[f] = bytes_of(ac.output_dir / f);
  cmd_train_ac(ac, config_.output_dir / "stages.ckpt", config_.output_dir / "vae.ckpt");
  for (const char* f : ac_files) EXPECT_EQ(before[f], bytes_of(ac.output_dir / f)) << f;
}

TEST_F(Commands, MissingInputsFailBeforeWork) {
  RunConfig c = config_;
  c.output_dir = dir_->path() / "missing";
  EXPECT_THROW(cmd_collect(c, dir_->path() / "nope.ckpt"), std::runtime_error);
  EXPECT_THROW(cmd_train_vae(c, dir_->path() / "nope.jsonl"), std::runtime_error);
  c.variant = introspection::WiringVariant::MeansOnly;
  EXPECT_THROW(cmd_train_ac(c, config_.output_dir / "stages.ckpt", std::nullopt), std::invalid_argument);
  EXPECT_FALSE(fs::exists(c.output_dir / "training_log.csv"));
}

TEST_F(Commands, CorruptDatasetLineIsNamed) {
  std::string text = bytes_of(config_.output_dir / "activations.jsonl");
  std::size_t pos = 0;
  for (int i = 0; i < 2; ++i) pos = text.find('\n', pos) + 1;
  text.insert(pos, "{not json\n");
  const fs::path bad = dir_->path() / "bad.jsonl";
  write_text_file(bad, text);
  RunConfig c = config_;
  c.output_dir = dir_->path() / "bad";
  try {
    cmd_train_vae(c, bad);
    FAIL() << "corrupt dataset accepted";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST_F(Commands, ReportAggregatesLogs) {
  std::vector<fs::path> logs;
  for (std::uint64_t seed : {1, 2}) {
    RunConfig c = config_;
    c.seed = seed;
    c.output_dir = dir_->path() / fmt::format("report-{}", seed);
    cmd_train_ac(c, config_.output_dir / "stages.ckpt", std::nullopt);
    logs.push_back(c.output_dir / "training_log.csv");
  }
  RunConfig r = config_;
  r.output_dir = dir_->path() / "report";
  cmd_report(r, logs);
  const std::string comparison = bytes_of(r.output_dir / "comparison.csv");
  EXPECT_EQ(std::count(comparison.begin(), comparison.end(), '\n'), 2);
  const std::string reports = bytes_of(r.output_dir / "reports.csv");
  EXPECT_EQ(std::count(reports.begin(), reports.end(), '\n'), 3);
}

TEST(Experiment, Exp2TableAndNoOverwrite) {
  TempDir dir;
  RunConfig c = small_config(dir.path());
  EXPECT_EQ(cmd_experiment(c, Suite::Exp2, std::nullopt), 0);
  const std::string comparison = read_text_file(dir.path() / "exp2" / "comparison.csv");
  EXPECT_EQ(std::count(comparison.begin(), comparison.end(), '\n'), 6);
  EXPECT_TRUE(fs::exists(dir.path() / "exp2" / "config.ini"));
  EXPECT_THROW(cmd_experiment(c, Suite::Exp2, std::nullopt), std::runtime_error);
  EXPECT_THROW(suite_from_string("exp4"), std::invalid_argument);
}

}  // namespace
}  // namespace introspect::app
