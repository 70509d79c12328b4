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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "introspect/bbrl/training.hpp"

namespace introspect::analysis {

using bbrl::TrainingLog;
using introspection::WiringVariant;

inline constexpr int kSuccessWindow = 100;
inline constexpr double kConvergenceThreshold = 80.0;
inline constexpr int kValueTail = 200;

struct CurvePoint {
  int episode = 0;
  double value = 0.0;
};

using Curve = std::vector<CurvePoint>;
using BehaviourValues = std::array<std::optional<double>, env::kNumBehaviours>;

/// Trailing-window success rate in percent. The first window-1 episodes use
/// the mean over the available prefix.
Curve moving_average_success(const TrainingLog& log, int window = kSuccessWindow);

std::optional<int> episodes_to_threshold(const Curve& curve, double threshold_percent = kConvergenceThreshold);

/// Mean over the final `tail_episodes` of each behaviour's per-episode mean
/// critic value. Behaviours never chosen in the tail stay empty.
BehaviourValues state_value_summary(const TrainingLog& log, int tail_episodes = kValueTail);

struct ConvergenceReport {
  WiringVariant variant = WiringVariant::Baseline;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  int total_episodes = 0;
  std::optional<int> episodes_to_threshold;
  double final_success = 0.0;
  BehaviourValues final_state_value{};
  bool failed = false;
  std::string failure_reason;
};

ConvergenceReport make_report(const TrainingLog& log, int window = kSuccessWindow,
                              double threshold_percent = kConvergenceThreshold, int tail_episodes = kValueTail);

/// Placeholder for a run that did not complete.
ConvergenceReport failed_report(WiringVariant variant, double noise_level, std::uint64_t seed, std::string reason);

/// Episodes-to-threshold with runs that never got there charged the full
/// episode budget.
double charged_episodes_to_threshold(const ConvergenceReport& report);

struct ComparisonRow {
  WiringVariant variant = WiringVariant::Baseline;
  double noise_level = 0.0;
  int runs = 0;
  int failed_runs = 0;
  int reached = 0;
  double threshold_mean = 0.0;
  double threshold_std = 0.0;
  double success_mean = 0.0;
  double success_std = 0.0;
};

/// Aggregates completed runs per (variant, noise level) with population
/// standard deviations. Rows are sorted by variant, then noise level.
std::vector<ComparisonRow> compare_runs(const std::vector<ConvergenceReport>& reports);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::string curve_csv(const Curve& curve);
std::string reports_csv(const std::vector<ConvergenceReport>& reports);

}  // namespace introspect::analysis
