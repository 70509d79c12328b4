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
#include <optional>
#include <vector>

#include "introspect/env/pick_place.hpp"
#include "introspect/nn/types.hpp"

namespace introspect::analysis {

using env::BehaviourId;
using nn::Index;
using nn::Matrix;
using nn::Rng;
using nn::Vector;

struct EmbeddedPoint {
  double z1 = 0.0;
  double z2 = 0.0;
  BehaviourId behaviour_label = BehaviourId::Approach;
};

struct LabelledLatent {
  Vector mu;
  BehaviourId label = BehaviourId::Approach;
};

enum class EmbeddingMethod { Pca, Tsne };

std::string_view to_string(EmbeddingMethod method);
EmbeddingMethod embedding_method_from_string(std::string_view name);

/// Exact (O(n^2)) t-SNE settings.
struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  /// Unset means max(n / early_exaggeration / 4, 50).
  std::optional<double> learning_rate;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  std::uint64_t seed = 0;
};

/// Projects latents to 2-D. PCA components are sign-normalised so that the
/// entry of largest magnitude in each principal axis is positive.
std::vector<EmbeddedPoint> embed_latents(const std::vector<LabelledLatent>& latents, EmbeddingMethod method,
                                         const TsneConfig& tsne = {});

/// Projection of the columns of `x` onto its top two principal components.
/// Returns a 2 x n matrix.
Matrix pca_2d(const Matrix& x);

Matrix tsne_2d(const Matrix& x, const TsneConfig& config);

/// Fraction of points whose k nearest neighbours (excluding the point itself)
/// vote for the point's own label. Vote ties go to the tied label whose
/// member is nearest.
double label_structure_score(const std::vector<EmbeddedPoint>& points, int k);

}  // namespace introspect::analysis
