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

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "introspect/bbrl/networks.hpp"
#include "introspect/env/pick_place.hpp"

namespace introspect::introspection {

using env::BehaviourId;
using nn::Index;
using nn::Rng;
using nn::Vector;

/// One timestep of captured FE activations with the behaviour being executed.
struct ActivationRecord {
  Vector activations;
  BehaviourId behaviour_label = BehaviourId::Approach;
  int episode = 0;
  int timestep = 0;
};

struct DatasetProvenance {
  double noise_level = 0.0;
  std::string fe_checkpoint;
  int episodes = 0;
  std::uint64_t seed = 0;
};

struct ActivationDataset {
  std::vector<ActivationRecord> records;
  DatasetProvenance provenance;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  Index dim() const { return records.empty() ? 0 : records.front().activations.size(); }
  /// Throws std::invalid_argument on an empty dataset, ragged dimensions or
  /// duplicate (episode, timestep) keys.
  void validate() const;
  /// Activations as columns.
  nn::Matrix matrix() const;
};

/// Rolls out the scripted schedule with expert actions and records the FE
/// activations of every visited (noised) observation.
ActivationDataset collect_activation_dataset(const env::PickPlaceEnv& env, const bbrl::FeatureExtractor& fe,
                                             int episodes, double noise_level, std::uint64_t seed);

/// Shuffled, disjoint split with floor(n * train_fraction) training records.
std::pair<ActivationDataset, ActivationDataset> split_dataset(const ActivationDataset& ds, double train_fraction,
                                                              Rng& rng);

class DatasetFormatError : public std::runtime_error {
 public:
  DatasetFormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// JSONL: a provenance header line, then one record per line.
void write_dataset_jsonl(const ActivationDataset& ds, const std::filesystem::path& path);
/// Throws DatasetFormatError carrying the 1-based line number of the first bad line.
ActivationDataset read_dataset_jsonl(const std::filesystem::path& path);

}  // namespace introspect::introspection
