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

#include "introspect/nn/adam.hpp"

#include <cmath>

#include <fmt/format.h>

namespace introspect::nn {

AdamState::AdamState(AdamConfig cfg, std::span<Param* const> params) : config(cfg) {
  if (!(cfg.learning_rate > 0.0) || !(cfg.beta1 > 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 > 0.0 && cfg.beta2 < 1.0) || !(cfg.epsilon > 0.0)) {
    throw std::invalid_argument("AdamState: hyperparameters out of range");
  }
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (const Param* p : params) {
    first_moment.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    second_moment.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void adam_step(std::span<Param* const> params, AdamState& state) {
  require_dim(static_cast<Index>(state.first_moment.size()), static_cast<Index>(params.size()),
              "adam_step parameter blocks");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Param& p = *params[i];
    require_dim(p.grad.size(), p.value.size(), fmt::format("adam_step gradient for '{}'", p.name));
    require_dim(state.first_moment[i].size(), p.value.size(), fmt::format("adam_step state for '{}'", p.name));
    if (!p.grad.allFinite()) {
      throw NumericError(fmt::format("adam_step: non-finite gradient in parameter block '{}'", p.name));
    }
  }

  const AdamConfig& c = state.config;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = c.beta1 * m + (1.0 - c.beta1) * p.grad;
    v = c.beta2 * v + (1.0 - c.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= c.learning_rate * (m.array() / correction1) /
                       ((v.array() / correction2).sqrt() + c.epsilon);
    if (!p.value.allFinite()) {
      throw NumericError(fmt::format("adam_step: parameter block '{}' became non-finite", p.name));
    }
  }
}

}  // namespace introspect::nn
