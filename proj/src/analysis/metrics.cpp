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

#include "introspect/analysis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

namespace introspect::analysis {

Curve moving_average_success(const TrainingLog& log, int window) {
  if (window < 1) throw std::invalid_argument("moving_average_success: window must be >= 1");
  Curve curve;
  curve.reserve(log.episodes.size());
  int in_window = 0;
  for (std::size_t i = 0; i < log.episodes.size(); ++i) {
    in_window += log.episodes[i].success ? 1 : 0;
    if (i >= static_cast<std::size_t>(window)) in_window -= log.episodes[i - static_cast<std::size_t>(window)].success ? 1 : 0;
    const auto span = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    curve.push_back({log.episodes[i].episode, 100.0 * in_window / static_cast<double>(span)});
  }
  return curve;
}

std::optional<int> episodes_to_threshold(const Curve& curve, double threshold_percent) {
  for (const auto& point : curve)
    if (point.value >= threshold_percent) return point.episode;
  return std::nullopt;
}

BehaviourValues state_value_summary(const TrainingLog& log, int tail_episodes) {
  if (tail_episodes < 0 || static_cast<std::size_t>(tail_episodes) > log.episodes.size()) {
    throw std::invalid_argument(fmt::format("state_value_summary: tail of {} episodes exceeds the {} logged",
                                            tail_episodes, log.episodes.size()));
  }
  std::array<double, env::kNumBehaviours> sum{};
  std::array<int, env::kNumBehaviours> count{};
  for (auto it = log.episodes.end() - tail_episodes; it != log.episodes.end(); ++it) {
    for (std::size_t b = 0; b < sum.size(); ++b) {
      if (it->mean_value[b]) {
        sum[b] += *it->mean_value[b];
        count[b] += 1;
      }
    }
  }
  BehaviourValues out{};
  for (std::size_t b = 0; b < sum.size(); ++b)
    if (count[b] > 0) out[b] = sum[b] / count[b];
  return out;
}

ConvergenceReport make_report(const TrainingLog& log, int window, double threshold_percent, int tail_episodes) {
  const Curve curve = moving_average_success(log, window);
  ConvergenceReport r;
  r.variant = log.variant;
  r.noise_level = log.noise_level;
  r.seed = log.seed;
  r.total_episodes = static_cast<int>(log.episodes.size());
  r.episodes_to_threshold = episodes_to_threshold(curve, threshold_percent);
  r.final_success = curve.empty() ? 0.0 : curve.back().value;
  r.final_state_value = state_value_summary(log, std::min<int>(tail_episodes, r.total_episodes));
  return r;
}

ConvergenceReport failed_report(WiringVariant variant, double noise_level, std::uint64_t seed, std::string reason) {
  ConvergenceReport r;
  r.variant = variant;
  r.noise_level = noise_level;
  r.seed = seed;
  r.failed = true;
  r.failure_reason = std::move(reason);
  return r;
}

double charged_episodes_to_threshold(const ConvergenceReport& report) {
  return report.episodes_to_threshold ? *report.episodes_to_threshold : report.total_episodes;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

std::string optional_cell(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : ""; }

}  // namespace

std::vector<ComparisonRow> compare_runs(const std::vector<ConvergenceReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("compare_runs: no reports");
  std::map<std::pair<int, double>, std::vector<const ConvergenceReport*>> groups;
  for (const auto& r : reports) groups[{static_cast<int>(r.variant), r.noise_level}].push_back(&r);

  std::vector<ComparisonRow> rows;
  for (const auto& [key, members] : groups) {
    ComparisonRow row;
    row.variant = static_cast<WiringVariant>(key.first);
    row.noise_level = key.second;
    std::vector<double> thresholds;
    std::vector<double> successes;
    for (const auto* r : members) {
      row.runs += 1;
      if (r->failed) {
        row.failed_runs += 1;
        continue;
      }
      if (r->episodes_to_threshold) row.reached += 1;
      thresholds.push_back(charged_episodes_to_threshold(*r));
      successes.push_back(r->final_success);
    }
    std::tie(row.threshold_mean, row.threshold_std) = mean_std(thresholds);
    std::tie(row.success_mean, row.success_std) = mean_std(successes);
    rows.push_back(row);
  }
  return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out =
      "variant,noise_level,runs,failed_runs,reached,episodes_to_threshold_mean,episodes_to_threshold_std,"
      "final_success_mean,final_success_std\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", introspection::to_string(r.variant), r.noise_level, r.runs,
                       r.failed_runs, r.reached, r.threshold_mean, r.threshold_std, r.success_mean, r.success_std);
  }
  return out;
}

std::string curve_csv(const Curve& curve) {
  std::string out = "episode,value\n";
  for (const auto& p : curve) out += fmt::format("{},{}\n", p.episode, p.value);
  return out;
}

std::string reports_csv(const std::vector<ConvergenceReport>& reports) {
  std::string out =
      "variant,noise_level,seed,status,total_episodes,episodes_to_threshold,final_success,"
      "value_approach,value_grasp,value_retract\n";
  for (const auto& r : reports) {
    if (r.failed) {
      out += fmt::format("{},{},{},failed,,,,,,\n", introspection::to_string(r.variant), r.noise_level, r.seed);
      continue;
    }
    out += fmt::format("{},{},{},ok,{},{},{},{},{},{}\n", introspection::to_string(r.variant), r.noise_level, r.seed,
                       r.total_episodes, r.episodes_to_threshold ? fmt::format("{}", *r.episodes_to_threshold) : "",
                       r.final_success, optional_cell(r.final_state_value[0]), optional_cell(r.final_state_value[1]),
                       optional_cell(r.final_state_value[2]));
  }
  return out;
}

}  // namespace introspect::analysis
