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

#include <filesystem>
#include <string>
#include <vector>

#include "introspect/analysis/embedding.hpp"
#include "introspect/bbrl/training.hpp"

namespace introspect::app {

/// One row per episode:
/// seed,variant,noise_level,episode,success,return,steps,decisions,
/// value_approach,value_grasp,value_retract,count_approach,count_grasp,
/// count_retract,actor_loss,critic_loss,update_count
/// Critic values are left empty for behaviours not chosen in the episode.
std::string training_log_csv(const bbrl::TrainingLog& log);
/// Inverse of training_log_csv. Errors name the offending line.
bbrl::TrainingLog parse_training_log_csv(const std::string& text);

/// epoch/episode index and one column per named series.
std::string series_csv(const std::string& index_name, const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& series);

std::string embedding_csv(const std::vector<analysis::EmbeddedPoint>& points);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace introspect::app
