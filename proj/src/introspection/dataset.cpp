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

#include "introspect/introspection/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

namespace introspect::introspection {

using nlohmann::json;

void ActivationDataset::validate() const {
  if (records.empty()) throw std::invalid_argument("activation dataset is empty");
  const Index d = dim();
  std::set<std::pair<int, int>> keys;
  for (const auto& r : records) {
    if (r.activations.size() != d) {
      throw std::invalid_argument(fmt::format("record ({}, {}) has dimension {}, expected {}", r.episode, r.timestep,
                                              r.activations.size(), d));
    }
    if (!keys.emplace(r.episode, r.timestep).second) {
      throw std::invalid_argument(fmt::format("duplicate record key ({}, {})", r.episode, r.timestep));
    }
  }
}

nn::Matrix ActivationDataset::matrix() const {
  nn::Matrix m(dim(), static_cast<Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) m.col(static_cast<Index>(i)) = records[i].activations;
  return m;
}

ActivationDataset collect_activation_dataset(const env::PickPlaceEnv& env, const bbrl::FeatureExtractor& fe,
                                             int episodes, double noise_level, std::uint64_t seed) {
  if (episodes <= 0) throw std::invalid_argument("collect_activation_dataset: episodes must be positive");
  Rng reset_rng = nn::make_rng(seed, 21);
  Rng noise_rng = nn::make_rng(seed, 22);
  ActivationDataset ds;
  ds.provenance.noise_level = noise_level;
  ds.provenance.episodes = episodes;
  ds.provenance.seed = seed;
  for (int e = 0; e < episodes; ++e) {
    auto [state, obs] = env.reset(reset_rng);
    while (!state.done) {
      const BehaviourId b = env.scripted_behaviour_schedule(state);
      const auto seen = env::inject_noise(obs, noise_level, env.config().noise_std, noise_rng);
      ds.records.push_back(ActivationRecord{fe.forward(seen).activations, b, e, state.step_index});
      auto next = env.step(state, b, env.expert_action(state, b));
      state = next.state;
      obs = next.observation;
    }
  }
  return ds;
}

std::pair<ActivationDataset, ActivationDataset> split_dataset(const ActivationDataset& ds, double train_fraction,
                                                              Rng& rng) {
  if (ds.empty()) throw std::invalid_argument("split_dataset: empty dataset");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split_dataset: train_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(ds.size()) * train_fraction));
  ActivationDataset train, validation;
  train.provenance = validation.provenance = ds.provenance;
  train.records.reserve(n_train);
  validation.records.reserve(ds.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? train : validation).records.push_back(ds.records[order[i]]);
  }
  return {std::move(train), std::move(validation)};
}

DatasetFormatError::DatasetFormatError(std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("dataset line {}: {}", line, what)), line_(line) {}

void write_dataset_jsonl(const ActivationDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  json header = {{"provenance",
                  {{"noise_level", ds.provenance.noise_level},
                   {"fe_checkpoint", ds.provenance.fe_checkpoint},
                   {"episodes", ds.provenance.episodes},
                   {"seed", ds.provenance.seed}}}};
  out << header.dump() << '\n';
  for (const auto& r : ds.records) {
    json line = {{"episode", r.episode},
                 {"timestep", r.timestep},
                 {"behaviour", std::string(env::to_string(r.behaviour_label))},
                 {"activations", std::vector<double>(r.activations.data(), r.activations.data() + r.activations.size())}};
    out << line.dump() << '\n';
  }
  if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

ActivationDataset read_dataset_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open dataset '{}'", path.string()));
  ActivationDataset ds;
  std::string text;
  std::size_t line_no = 0;
  Index dim = -1;
  std::set<std::pair<int, int>> keys;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    try {
      const json j = json::parse(text);
      if (line_no == 1) {
        const json& p = j.at("provenance");
        ds.provenance.noise_level = p.at("noise_level").get<double>();
        ds.provenance.fe_checkpoint = p.at("fe_checkpoint").get<std::string>();
        ds.provenance.episodes = p.at("episodes").get<int>();
        ds.provenance.seed = p.at("seed").get<std::uint64_t>();
        continue;
      }
      ActivationRecord r;
      r.episode = j.at("episode").get<int>();
      r.timestep = j.at("timestep").get<int>();
      r.behaviour_label = env::behaviour_from_string(j.at("behaviour").get<std::string>());
      const auto values = j.at("activations").get<std::vector<double>>();
      r.activations = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
      if (dim < 0) dim = r.activations.size();
      if (r.activations.size() != dim || dim == 0) {
        throw std::invalid_argument(fmt::format("activation length {} differs from {}", r.activations.size(), dim));
      }
      if (!r.activations.allFinite()) throw std::invalid_argument("non-finite activation");
      if (!keys.emplace(r.episode, r.timestep).second) throw std::invalid_argument("duplicate (episode, timestep)");
      ds.records.push_back(std::move(r));
    } catch (const DatasetFormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw DatasetFormatError(line_no, e.what());
    }
  }
  if (line_no == 0) throw DatasetFormatError(1, "missing provenance header");
  if (ds.records.empty()) throw DatasetFormatError(line_no, "dataset has no records");
  return ds;
}

}  // namespace introspect::introspection
