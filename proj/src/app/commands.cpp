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

#include "introspect/app/commands.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "introspect/analysis/embedding.hpp"
#include "introspect/analysis/metrics.hpp"
#include "introspect/app/io.hpp"
#include "introspect/app/pipeline.hpp"
#include "introspect/introspection/dataset.hpp"
#include "introspect/introspection/vae_training.hpp"

namespace introspect::app {

namespace {

constexpr int kStructureNeighbours = 15;

void require_file(const fs::path& path, std::string_view what) {
  if (!fs::is_regular_file(path)) throw std::runtime_error(fmt::format("{} '{}' not found", what, path.string()));
}

fs::path prepare_output(const RunConfig& config) {
  fs::create_directories(config.output_dir);
  return config.output_dir;
}

void progress(const std::string& message) { fmt::print(stderr, "{}\n", message); }

std::string noise_dir(double level) { return fmt::format("noise-{}", level); }

}  // namespace

void cmd_train_stages(const RunConfig& config) {
  config.validate();
  const fs::path out = prepare_output(config);
  const StageOutcome outcome = run_stages(config);

  std::vector<std::string> columns;
  std::vector<std::vector<double>> series;
  for (const auto& s : outcome.stages) {
    columns.push_back(std::string(env::to_string(s.behaviour)));
    series.push_back(s.loss_curve);
  }
  write_text_file(out / "stage_loss.csv", series_csv("episode", columns, series));
  save_checkpoint(networks_checkpoint(config, outcome.nets), out / "stages.ckpt");

  const auto stats = bbrl::evaluate_reactive(make_env(config), outcome.nets, 200, config.seed, config.noise_level);
  progress(fmt::format("train-stages: scripted rollout success {:.3f}", stats.success_rate()));
}

void cmd_collect(const RunConfig& config, const fs::path& stages_checkpoint) {
  config.validate();
  require_file(stages_checkpoint, "checkpoint");
  const auto nets = networks_from_checkpoint(config, load_checkpoint(stages_checkpoint));
  const fs::path out = prepare_output(config);
  auto ds = introspection::collect_activation_dataset(make_env(config), nets.fe, config.collect_episodes,
                                                      config.noise_level, config.seed);
  ds.provenance.fe_checkpoint = stages_checkpoint.string();
  introspection::write_dataset_jsonl(ds, out / "activations.jsonl");
  progress(fmt::format("collect: {} records", ds.size()));
}

void cmd_train_vae(const RunConfig& config, const fs::path& dataset) {
  config.validate();
  require_file(dataset, "dataset");
  const auto ds = introspection::read_dataset_jsonl(dataset);
  if (ds.dim() != config.vae.input) {
    throw std::runtime_error(fmt::format("dataset activations have {} entries, VAE input is {}", ds.dim(), config.vae.input));
  }
  const fs::path out = prepare_output(config);
  const auto trained = introspection::train_vae(ds, config.vae, config.vae_config(), config.seed);

  write_text_file(out / "vae_loss.csv",
                  series_csv("epoch", {"train", "validation"}, {trained.train_loss, trained.validation_loss}));
  save_checkpoint(vae_checkpoint(config, trained.model), out / "vae.ckpt");

  std::vector<analysis::LabelledLatent> latents;
  latents.reserve(trained.validation.size());
  for (const auto& r : trained.validation.records)
    latents.push_back({trained.model.encode(r.activations).mu(), r.behaviour_label});
  if (latents.size() > kStructureNeighbours) {
    const auto points = analysis::embed_latents(latents, analysis::EmbeddingMethod::Pca);
    write_text_file(out / "embedding.csv", embedding_csv(points));
    const double score = analysis::label_structure_score(points, kStructureNeighbours);
    write_text_file(out / "latent_structure.csv",
                    fmt::format("method,k,points,score\npca,{},{},{}\n", kStructureNeighbours, points.size(), score));
    progress(fmt::format("train-vae: validation loss {:.4f}, label structure {:.3f}", trained.validation_loss.back(),
                         score));
  }
}

void cmd_train_ac(const RunConfig& config, const fs::path& stages_checkpoint,
                  const std::optional<fs::path>& vae_checkpoint) {
  config.validate();
  const bool needs_vae = introspection::requires_vae(config.variant);
  if (needs_vae && !vae_checkpoint) {
    throw std::invalid_argument(
        fmt::format("variant '{}' needs a VAE checkpoint", introspection::to_string(config.variant)));
  }
  require_file(stages_checkpoint, "checkpoint");
  if (needs_vae) require_file(*vae_checkpoint, "VAE checkpoint");

  const auto nets = networks_from_checkpoint(config, load_checkpoint(stages_checkpoint));
  std::optional<introspection::VaeModel> vae;
  if (needs_vae) vae = vae_from_checkpoint(config, load_checkpoint(*vae_checkpoint));

  const fs::path out = prepare_output(config);
  auto ac = make_actor_critic(config, config.variant, config.seed);
  const auto log = bbrl::train_actor_critic(make_env(config), nets, ac, config.variant, vae ? &*vae : nullptr,
                                            config.ac_config(), config.seed);

  write_text_file(out / "training_log.csv", training_log_csv(log));
  write_text_file(out / "success_curve.csv", analysis::curve_csv(analysis::moving_average_success(log)));
  save_checkpoint(actor_critic_checkpoint(config, ac), out / "actor_critic.ckpt");
  const auto report = analysis::make_report(log);
  progress(fmt::format("train-ac: {} seed {} noise {}: final success {:.1f}%, 80% at {}",
                       introspection::to_string(config.variant), config.seed, config.noise_level, report.final_success,
                       report.episodes_to_threshold ? fmt::format("{}", *report.episodes_to_threshold) : "never"));
}

void cmd_report(const RunConfig& config, const std::vector<fs::path>& training_logs) {
  config.validate();
  if (training_logs.empty()) throw std::invalid_argument("report: no training logs given");
  std::vector<analysis::ConvergenceReport> reports;
  for (const auto& path : training_logs) {
    require_file(path, "training log");
    try {
      reports.push_back(analysis::make_report(parse_training_log_csv(read_text_file(path))));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(fmt::format("{}: {}", path.string(), e.what()));
    }
  }
  const fs::path out = prepare_output(config);
  write_text_file(out / "reports.csv", analysis::reports_csv(reports));
  write_text_file(out / "comparison.csv", analysis::comparison_csv(analysis::compare_runs(reports)));
}

std::string_view to_string(Suite suite) {
  switch (suite) {
    case Suite::Exp1: return "exp1";
    case Suite::Exp2: return "exp2";
    case Suite::Exp3: return "exp3";
  }
  throw std::invalid_argument("unknown suite");
}

Suite suite_from_string(std::string_view name) {
  for (Suite s : {Suite::Exp1, Suite::Exp2, Suite::Exp3})
    if (to_string(s) == name) return s;
  throw std::invalid_argument(fmt::format("unknown experiment suite '{}' (expected exp1, exp2 or exp3)", name));
}

int cmd_experiment(const RunConfig& config, Suite suite, const std::optional<std::vector<std::uint64_t>>& seeds) {
  config.validate();
  const fs::path root = config.output_dir / std::string(to_string(suite));
  if (fs::exists(root)) {
    throw std::runtime_error(fmt::format("refusing to overwrite existing experiment directory '{}'", root.string()));
  }
  fs::create_directories(root);
  write_text_file(root / "config.ini", to_ini(config));

  if (suite == Suite::Exp1) {
    const auto seed_list = seeds.value_or(std::vector<std::uint64_t>{config.seed});
    for (auto seed : seed_list) {
      RunConfig run = config;
      run.seed = seed;
      run.output_dir = root / fmt::format("seed-{}", seed);
      cmd_train_stages(run);
      cmd_collect(run, run.output_dir / "stages.ckpt");
      cmd_train_vae(run, run.output_dir / "activations.jsonl");
    }
    return 0;
  }

  const auto seed_list = seeds.value_or(suite == Suite::Exp2 ? config.exp2_seeds : config.exp3_seeds);
  const std::vector<double> levels = suite == Suite::Exp2 ? std::vector<double>{0.0} : config.exp3_noise_levels;

  RunConfig shared = config;
  shared.noise_level = 0.0;
  shared.output_dir = root / "shared";
  cmd_train_stages(shared);
  const fs::path stages = shared.output_dir / "stages.ckpt";

  std::vector<analysis::ConvergenceReport> reports;
  int failures = 0;
  for (double level : levels) {
    RunConfig vae_run = shared;
    vae_run.noise_level = level;
    vae_run.output_dir = shared.output_dir / noise_dir(level);
    cmd_collect(vae_run, stages);
    cmd_train_vae(vae_run, vae_run.output_dir / "activations.jsonl");
    const fs::path vae = vae_run.output_dir / "vae.ckpt";

    for (auto variant : introspection::kAllVariants) {
      // The sampled variant is only run at the higher noise level.
      if (suite == Suite::Exp3 && variant == introspection::WiringVariant::SampledLatent &&
          std::abs(level - 0.05) < 1e-12) {
        continue;
      }
      for (auto seed : seed_list) {
        RunConfig run = config;
        run.seed = seed;
        run.variant = variant;
        run.noise_level = level;
        run.output_dir = root / std::string(introspection::to_string(variant)) / noise_dir(level) / fmt::format("seed-{}", seed);
        try {
          cmd_train_ac(run, stages, introspection::requires_vae(variant) ? std::optional<fs::path>(vae) : std::nullopt);
          reports.push_back(
              analysis::make_report(parse_training_log_csv(read_text_file(run.output_dir / "training_log.csv"))));
        } catch (const std::exception& e) {
          ++failures;
          progress(fmt::format("run {} failed: {}", run.output_dir.string(), e.what()));
          fs::create_directories(run.output_dir);
          write_text_file(run.output_dir / "FAILED", std::string(e.what()) + "\n");
          reports.push_back(analysis::failed_report(variant, level, seed, e.what()));
        }
      }
    }
  }
  write_text_file(root / "reports.csv", analysis::reports_csv(reports));
  write_text_file(root / "comparison.csv", analysis::comparison_csv(analysis::compare_runs(reports)));
  return failures;
}

}  // namespace introspect::app
