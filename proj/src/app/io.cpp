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

#include "introspect/app/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace introspect::app {

namespace {

constexpr std::string_view kLogHeader =
    "seed,variant,noise_level,episode,success,return,steps,decisions,value_approach,value_grasp,value_retract,"
    "count_approach,count_grasp,count_retract,actor_loss,critic_loss,update_count";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

template <typename T>
T cell(const std::string& text, std::size_t line, std::string_view column) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::runtime_error(fmt::format("training log line {}: bad {} '{}'", line, column, text));
  }
  return value;
}

}  // namespace

std::string training_log_csv(const bbrl::TrainingLog& log) {
  std::string out(kLogHeader);
  out += '\n';
  const auto variant = introspection::to_string(log.variant);
  for (const auto& e : log.episodes) {
    out += fmt::format("{},{},{},{},{},{},{},{}", log.seed, variant, log.noise_level, e.episode, e.success ? 1 : 0,
                       e.episode_return, e.steps, e.decisions);
    for (const auto& v : e.mean_value) out += v ? fmt::format(",{}", *v) : ",";
    for (int c : e.behaviour_counts) out += fmt::format(",{}", c);
    out += fmt::format(",{},{},{}\n", e.actor_loss, e.critic_loss, e.update_count);
  }
  return out;
}

bbrl::TrainingLog parse_training_log_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kLogHeader) throw std::runtime_error("training log line 1: unexpected header");
  bbrl::TrainingLog log;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 17) {
      throw std::runtime_error(fmt::format("training log line {}: expected 17 columns, got {}", number, c.size()));
    }
    const auto seed = cell<std::uint64_t>(c[0], number, "seed");
    const auto noise = cell<double>(c[2], number, "noise_level");
    introspection::WiringVariant variant;
    try {
      variant = introspection::variant_from_string(c[1]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(fmt::format("training log line {}: {}", number, e.what()));
    }
    if (log.episodes.empty()) {
      log.seed = seed;
      log.variant = variant;
      log.noise_level = noise;
    } else if (seed != log.seed || variant != log.variant || noise != log.noise_level) {
      throw std::runtime_error(fmt::format("training log line {}: run metadata changes mid-file", number));
    }
    bbrl::EpisodeRecord e;
    e.episode = cell<int>(c[3], number, "episode");
    e.success = cell<int>(c[4], number, "success") != 0;
    e.episode_return = cell<double>(c[5], number, "return");
    e.steps = cell<int>(c[6], number, "steps");
    e.decisions = cell<int>(c[7], number, "decisions");
    for (std::size_t b = 0; b < 3; ++b) {
      if (!c[8 + b].empty()) e.mean_value[b] = cell<double>(c[8 + b], number, "value");
      e.behaviour_counts[b] = cell<int>(c[11 + b], number, "count");
    }
    e.actor_loss = cell<double>(c[14], number, "actor_loss");
    e.critic_loss = cell<double>(c[15], number, "critic_loss");
    e.update_count = cell<std::int64_t>(c[16], number, "update_count");
    if (e.episode != static_cast<int>(log.episodes.size())) {
      throw std::runtime_error(fmt::format("training log line {}: episode {} out of sequence", number, e.episode));
    }
    log.episodes.push_back(e);
  }
  return log;
}

std::string series_csv(const std::string& index_name, const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& series) {
  if (columns.size() != series.size()) throw std::invalid_argument("series_csv: column/series count mismatch");
  std::string out = index_name;
  for (const auto& c : columns) out += "," + c;
  out += '\n';
  const std::size_t rows = series.empty() ? 0 : series.front().size();
  for (const auto& s : series)
    if (s.size() != rows) throw std::invalid_argument("series_csv: series lengths differ");
  for (std::size_t r = 0; r < rows; ++r) {
    out += fmt::format("{}", r);
    for (const auto& s : series) out += fmt::format(",{}", s[r]);
    out += '\n';
  }
  return out;
}

std::string embedding_csv(const std::vector<analysis::EmbeddedPoint>& points) {
  std::string out = "z1,z2,label\n";
  for (const auto& p : points) out += fmt::format("{},{},{}\n", p.z1, p.z2, env::to_string(p.behaviour_label));
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace introspect::app
