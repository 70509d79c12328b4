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

#include "introspect/app/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

namespace introspect::app {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw ConfigError(fmt::format("{}: cannot parse '{}'", key, text));
  return value;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, text));
  } else if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
    return std::filesystem::path(text);
  } else if constexpr (std::is_same_v<T, introspection::WiringVariant>) {
    try {
      return introspection::variant_from_string(text);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("{}: {}", key, e.what()));
    }
  } else if constexpr (requires(T v) { v.push_back(v.front()); }) {
    T out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos) throw ConfigError(fmt::format("{}: empty list element in '{}'", key, text));
      out.push_back(parse_number<typename T::value_type>(key, item.substr(b, e - b + 1)));
    }
    return out;
  } else {
    return parse_number<T>(key, text);
  }
}

template <typename T>
std::string format_value(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
    return v.string();
  } else if constexpr (std::is_same_v<T, introspection::WiringVariant>) {
    return std::string(introspection::to_string(v));
  } else if constexpr (requires(T x) { x.push_back(x.front()); }) {
    return fmt::format("{}", fmt::join(v, ","));
  } else {
    return fmt::format("{}", v);
  }
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T, typename Access>
Field field(std::string section, std::string key, Access access) {
  const std::string full = section + "." + key;
  return Field{std::move(section), std::move(key),
               [access](const RunConfig& c) { return format_value<T>(access(const_cast<RunConfig&>(c))); },
               [access, full](RunConfig& c, const std::string& text) { access(c) = parse_value<T>(full, text); }};
}

#define INTROSPECT_FIELD(section, key, member) \
  field<std::remove_cvref_t<decltype(std::declval<RunConfig&>().member)>>( \
      section, key, [](RunConfig& c) -> auto& { return c.member; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      INTROSPECT_FIELD("run", "seed", seed),
      INTROSPECT_FIELD("run", "variant", variant),
      INTROSPECT_FIELD("run", "noise_level", noise_level),
      INTROSPECT_FIELD("run", "output_dir", output_dir),

      INTROSPECT_FIELD("env", "horizon", env.horizon),
      INTROSPECT_FIELD("env", "max_step", env.max_step),
      INTROSPECT_FIELD("env", "contact_eps", env.contact_eps),
      INTROSPECT_FIELD("env", "grasp_threshold", env.grasp_threshold),
      INTROSPECT_FIELD("env", "align_rate", env.align_rate),
      INTROSPECT_FIELD("env", "align_threshold", env.align_threshold),
      INTROSPECT_FIELD("env", "success_eps", env.success_eps),
      INTROSPECT_FIELD("env", "gripper_rate", env.gripper_rate),
      INTROSPECT_FIELD("env", "spawn_extent", env.spawn_extent),
      INTROSPECT_FIELD("env", "min_separation", env.min_separation),
      INTROSPECT_FIELD("env", "step_reward", env.step_reward),
      INTROSPECT_FIELD("env", "success_reward", env.success_reward),
      INTROSPECT_FIELD("env", "noise_std", env.noise_std),

      INTROSPECT_FIELD("network", "obs_dim", network.obs_dim),
      INTROSPECT_FIELD("network", "fe_hidden1", network.fe_hidden1),
      INTROSPECT_FIELD("network", "fe_hidden2", network.fe_hidden2),
      INTROSPECT_FIELD("network", "reactive_hidden", network.reactive_hidden),
      INTROSPECT_FIELD("network", "ac_hidden", network.ac_hidden),

      INTROSPECT_FIELD("vae", "input_dim", vae.input),
      INTROSPECT_FIELD("vae", "encoder_hidden", vae.encoder_hidden),
      INTROSPECT_FIELD("vae", "latent_dim", vae.latent),
      INTROSPECT_FIELD("vae", "decoder_hidden", vae.decoder_hidden),
      INTROSPECT_FIELD("vae", "epochs", vae_training.epochs),
      INTROSPECT_FIELD("vae", "batch_size", vae_training.batch_size),
      INTROSPECT_FIELD("vae", "train_fraction", vae_training.train_fraction),
      INTROSPECT_FIELD("vae", "standardize_inputs", vae_training.standardize_inputs),
      INTROSPECT_FIELD("vae", "collect_episodes", collect_episodes),

      INTROSPECT_FIELD("stages", "episodes", stages.episodes),
      INTROSPECT_FIELD("stages", "updates_per_episode", stages.updates_per_episode),
      INTROSPECT_FIELD("stages", "batch_size", stages.batch_size),

      INTROSPECT_FIELD("actor_critic", "episodes", actor_critic.episodes),
      INTROSPECT_FIELD("actor_critic", "gamma", actor_critic.gamma),
      INTROSPECT_FIELD("actor_critic", "entropy_coef", actor_critic.entropy_coef),
      INTROSPECT_FIELD("actor_critic", "value_coef", actor_critic.value_coef),
      INTROSPECT_FIELD("actor_critic", "behaviour_timeout", actor_critic.behaviour_timeout),

      INTROSPECT_FIELD("adam", "learning_rate", adam.learning_rate),
      INTROSPECT_FIELD("adam", "beta1", adam.beta1),
      INTROSPECT_FIELD("adam", "beta2", adam.beta2),
      INTROSPECT_FIELD("adam", "epsilon", adam.epsilon),

      INTROSPECT_FIELD("experiment", "exp2_seeds", exp2_seeds),
      INTROSPECT_FIELD("experiment", "exp3_seeds", exp3_seeds),
      INTROSPECT_FIELD("experiment", "exp3_noise_levels", exp3_noise_levels),
  };
  return table;
}

#undef INTROSPECT_FIELD

}  // namespace

void RunConfig::validate() const {
  try {
    env.validate();
    vae.validate();
    nn::AdamState probe(adam, {});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (network.obs_dim != env::kObsDim) {
    throw ConfigError(fmt::format("network.obs_dim must be {}, got {}", env::kObsDim, network.obs_dim));
  }
  if (network.fe_hidden1 < 1 || network.fe_hidden2 < 1 || network.reactive_hidden < 1 || network.ac_hidden < 1) {
    throw ConfigError("network sizes must be positive");
  }
  if (network.activation_dim() != vae.input) {
    throw ConfigError(fmt::format("network.fe_hidden1 + network.fe_hidden2 = {} must equal vae.input_dim = {}",
                                  network.activation_dim(), vae.input));
  }
  if (!(noise_level >= 0.0)) throw ConfigError("run.noise_level must be >= 0");
  if (output_dir.empty()) throw ConfigError("run.output_dir must not be empty");
  if (stages.episodes < 1 || stages.updates_per_episode < 1 || stages.batch_size < 1) {
    throw ConfigError("stages.episodes, updates_per_episode and batch_size must be positive");
  }
  if (collect_episodes < 1) throw ConfigError("vae.collect_episodes must be positive");
  if (vae_training.epochs < 1 || vae_training.batch_size < 1) {
    throw ConfigError("vae.epochs and vae.batch_size must be positive");
  }
  if (!(vae_training.train_fraction > 0.0 && vae_training.train_fraction < 1.0)) {
    throw ConfigError("vae.train_fraction must lie in (0, 1)");
  }
  if (actor_critic.episodes < 1) throw ConfigError("actor_critic.episodes must be positive");
  if (!(actor_critic.gamma > 0.0 && actor_critic.gamma <= 1.0)) throw ConfigError("actor_critic.gamma must lie in (0, 1]");
  if (!(actor_critic.entropy_coef >= 0.0) || !(actor_critic.value_coef >= 0.0)) {
    throw ConfigError("actor_critic coefficients must be >= 0");
  }
  if (actor_critic.behaviour_timeout < 1) throw ConfigError("actor_critic.behaviour_timeout must be >= 1");
  if (exp2_seeds.empty() || exp3_seeds.empty() || exp3_noise_levels.empty()) {
    throw ConfigError("experiment seed and noise lists must not be empty");
  }
  for (double level : exp3_noise_levels)
    if (!(level >= 0.0)) throw ConfigError("experiment.exp3_noise_levels must be >= 0");
}

bbrl::StageConfig RunConfig::stage_config() const {
  bbrl::StageConfig c = stages;
  c.adam = adam;
  c.noise_level = noise_level;
  return c;
}

introspection::VaeTrainConfig RunConfig::vae_config() const {
  introspection::VaeTrainConfig c = vae_training;
  c.adam = adam;
  return c;
}

bbrl::ActorCriticConfig RunConfig::ac_config() const {
  bbrl::ActorCriticConfig c = actor_critic;
  c.adam = adam;
  c.noise_level = noise_level;
  return c;
}

RunConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }

  std::set<std::string> known;
  for (const auto& f : fields()) known.insert(f.section + "." + f.key);
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(fmt::format("config key '{}' outside any section", section));
    for (const auto& [key, value] : body) {
      if (!known.contains(section + "." + key)) throw ConfigError(fmt::format("unknown config key '{}.{}'", section, key));
    }
  }

  RunConfig config;
  for (const auto& f : fields()) {
    if (auto value = tree.get_optional<std::string>(boost::property_tree::ptree::path_type(f.section + "." + f.key, '.'))) {
      f.set(config, *value);
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string to_ini(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      out += fmt::format("{}[{}]\n", section.empty() ? "" : "\n", f.section);
      section = f.section;
    }
    out += fmt::format("{} = {}\n", f.key, f.get(config));
  }
  return out;
}

}  // namespace introspect::app
