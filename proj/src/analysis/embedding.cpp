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

#include "introspect/analysis/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace introspect::analysis {

std::string_view to_string(EmbeddingMethod method) {
  return method == EmbeddingMethod::Pca ? "pca" : "tsne";
}

EmbeddingMethod embedding_method_from_string(std::string_view name) {
  if (name == "pca") return EmbeddingMethod::Pca;
  if (name == "tsne") return EmbeddingMethod::Tsne;
  throw std::invalid_argument(fmt::format("unknown embedding method '{}'", name));
}

Matrix pca_2d(const Matrix& x) {
  const Index n = x.cols();
  const Vector mean = x.rowwise().mean();
  const Matrix centered = x.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("pca: eigendecomposition failed");

  // Eigenvalues come back ascending.
  const Index d = x.rows();
  Matrix axes(d, 2);
  for (Index c = 0; c < 2; ++c) {
    Vector axis = d - 1 - c >= 0 ? Vector(solver.eigenvectors().col(d - 1 - c)) : Vector::Zero(d);
    Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis[arg] < 0.0) axis = -axis;
    axes.col(c) = axis;
  }
  return axes.transpose() * centered;
}

namespace {

Matrix squared_distances(const Matrix& x) {
  const Vector sq = x.colwise().squaredNorm().transpose();
  Matrix d = (-2.0 * x.transpose() * x).colwise() + sq;
  d.rowwise() += sq.transpose();
  return d.cwiseMax(0.0);
}

// Row-conditional affinities with the Gaussian bandwidth found by bisection
// so that each row's entropy matches log(perplexity).
Matrix conditional_affinities(const Matrix& d2, double perplexity) {
  const Index n = d2.rows();
  const double target = std::log(perplexity);
  Matrix p = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 100; ++iter) {
      double sum = 0.0;
      double weighted = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double w = std::exp(-beta * d2(i, j));
        p(i, j) = w;
        sum += w;
        weighted += w * d2(i, j);
      }
      if (sum <= 0.0) {
        hi = beta;
        beta = (lo + hi) / 2.0;
        continue;
      }
      const double entropy = std::log(sum) + beta * weighted / sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0.0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (lo + hi) / 2.0;
      } else {
        hi = beta;
        beta = (lo + hi) / 2.0;
      }
    }
    const double total = p.row(i).sum();
    if (total > 0.0) p.row(i) /= total;
  }
  return p;
}

}  // namespace

Matrix tsne_2d(const Matrix& x, const TsneConfig& config) {
  const Index n = x.cols();
  if (!(config.perplexity > 0.0) || config.perplexity >= static_cast<double>(n - 1)) {
    throw std::invalid_argument(fmt::format("tsne: perplexity {} needs more than {} points", config.perplexity, n));
  }
  if (config.iterations < 0 || config.exaggeration_iterations < 0 || (config.learning_rate && !(*config.learning_rate > 0.0))) {
    throw std::invalid_argument("tsne: iterations must be non-negative and learning rate positive");
  }

  const Matrix conditional = conditional_affinities(squared_distances(x), config.perplexity);
  Matrix p = (conditional + conditional.transpose()) / (2.0 * static_cast<double>(n));
  p = p.cwiseMax(1e-12);
  p.diagonal().setZero();

  const double rate =
      config.learning_rate.value_or(std::max(static_cast<double>(n) / config.early_exaggeration / 4.0, 50.0));
  Rng rng = nn::make_rng(config.seed, 0);
  Matrix y = 1e-4 * nn::standard_normal(2, n, rng);
  Matrix velocity = Matrix::Zero(2, n);
  Matrix gains = Matrix::Ones(2, n);

  for (int it = 0; it < config.iterations; ++it) {
    const double exaggeration = it < config.exaggeration_iterations ? config.early_exaggeration : 1.0;
    const double momentum = it < config.exaggeration_iterations ? 0.5 : 0.8;

    Matrix num = (1.0 + squared_distances(y).array()).inverse().matrix();
    num.diagonal().setZero();
    const double z = num.sum();
    const Matrix stiffness = ((exaggeration * p.array() - num.array() / z) * num.array()).matrix();
    // grad_i = 4 * sum_j s_ij (y_i - y_j)
    const Vector row_sums = stiffness.rowwise().sum();
    const Matrix grad = 4.0 * (y * row_sums.asDiagonal() - y * stiffness);

    for (Index j = 0; j < n; ++j) {
      for (Index r = 0; r < 2; ++r) {
        const bool same_sign = (grad(r, j) > 0.0) == (velocity(r, j) > 0.0);
        gains(r, j) = std::max(same_sign ? gains(r, j) * 0.8 : gains(r, j) + 0.2, 0.01);
      }
    }
    velocity = momentum * velocity - rate * gains.cwiseProduct(grad);
    y += velocity;
    y = y.colwise() - y.rowwise().mean();
  }
  return y;
}

std::vector<EmbeddedPoint> embed_latents(const std::vector<LabelledLatent>& latents, EmbeddingMethod method,
                                         const TsneConfig& tsne) {
  if (latents.size() < 3) {
    throw std::invalid_argument(fmt::format("embed_latents: need at least 3 points, got {}", latents.size()));
  }
  const Index dim = latents.front().mu.size();
  Matrix x(dim, static_cast<Index>(latents.size()));
  for (std::size_t i = 0; i < latents.size(); ++i) {
    nn::require_dim(latents[i].mu.size(), dim, "embed_latents: latent");
    x.col(static_cast<Index>(i)) = latents[i].mu;
  }
  const Matrix y = method == EmbeddingMethod::Pca ? pca_2d(x) : tsne_2d(x, tsne);

  std::vector<EmbeddedPoint> out(latents.size());
  for (std::size_t i = 0; i < latents.size(); ++i) {
    const auto c = static_cast<Index>(i);
    out[i] = {y(0, c), y(1, c), latents[i].label};
  }
  return out;
}

double label_structure_score(const std::vector<EmbeddedPoint>& points, int k) {
  const std::size_t n = points.size();
  if (k < 1 || static_cast<std::size_t>(k) >= n) {
    throw std::invalid_argument(fmt::format("label_structure_score: k = {} needs 1 <= k < {}", k, n));
  }
  std::vector<std::size_t> order(n);
  std::vector<double> dist(n);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dz1 = points[j].z1 - points[i].z1;
      const double dz2 = points[j].z2 - points[i].z2;
      dist[j] = dz1 * dz1 + dz2 * dz2;
    }
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    std::erase(order, i);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](std::size_t a, std::size_t b) {
      return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
    });

    std::array<int, env::kNumBehaviours> votes{};
    std::array<int, env::kNumBehaviours> first_seen{};
    first_seen.fill(k);
    for (int r = 0; r < k; ++r) {
      const auto label = static_cast<std::size_t>(env::index_of(points[order[static_cast<std::size_t>(r)]].behaviour_label));
      votes[label] += 1;
      first_seen[label] = std::min(first_seen[label], r);
    }
    std::size_t winner = 0;
    for (std::size_t l = 1; l < votes.size(); ++l) {
      if (votes[l] > votes[winner] || (votes[l] == votes[winner] && first_seen[l] < first_seen[winner])) winner = l;
    }
    if (winner == static_cast<std::size_t>(env::index_of(points[i].behaviour_label))) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(n);
}

}  // namespace introspect::analysis
