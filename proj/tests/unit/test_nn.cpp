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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "grad_check.hpp"
#include "introspect/nn/adam.hpp"
#include "introspect/nn/dense.hpp"
#include "introspect/nn/functional.hpp"
#include "introspect/nn/tape.hpp"

namespace introspect::nn {
namespace {

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a = make_rng(5, 1);
  Rng b = make_rng(5, 1);
  Rng c = make_rng(5, 2);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
}

TEST(Dense, ZeroWeightsReturnBiases) {
  DenseLayer layer("d", 3, 2);
  layer.biases().value << 0.5, -1.5;
  Vector x(3);
  x << 1.0, 2.0, 3.0;
  const Vector y = layer.forward(x);
  EXPECT_DOUBLE_EQ(y[0], 0.5);
  EXPECT_DOUBLE_EQ(y[1], -1.5);
}

TEST(Dense, IdentityWeightsPassInputThrough) {
  DenseLayer layer("d", 4, 4);
  layer.weights().value = Matrix::Identity(4, 4);
  Vector x(4);
  x << 0.1, -2.0, 3.5, 7.0;
  EXPECT_EQ(layer.forward(x), x);
}

TEST(Dense, UnitInputSelectsFirstColumnPlusBias) {
  Rng rng = make_rng(11, 0);
  DenseLayer layer = DenseLayer::glorot("d", 2, 3, rng);
  layer.biases().value << 1.0, 2.0, 3.0;
  Vector x(2);
  x << 1.0, 0.0;
  const Vector y = layer.forward(x);
  for (Index r = 0; r < 3; ++r) EXPECT_DOUBLE_EQ(y[r], layer.weights().value(r, 0) + layer.biases().value(r, 0));
}

TEST(Dense, GlorotBoundsAndZeroBias) {
  Rng rng = make_rng(3, 0);
  DenseLayer layer = DenseLayer::glorot("g", 30, 20, rng);
  const double bound = std::sqrt(6.0 / 50.0);
  EXPECT_LE(layer.weights().value.cwiseAbs().maxCoeff(), bound);
  EXPECT_TRUE(layer.biases().value.isZero());
  EXPECT_EQ(layer.weights().name, "g.weight");
  EXPECT_EQ(layer.biases().name, "g.bias");
}

TEST(Dense, DimensionMismatchThrows) {
  DenseLayer layer("d", 3, 2);
  EXPECT_THROW(layer.forward(Vector(Vector::Zero(4))), DimensionError);
}

TEST(Elu, KnownValues) {
  EXPECT_EQ(elu(0.0), 0.0);
  EXPECT_EQ(elu(1.0), 1.0);
  EXPECT_NEAR(elu(-20.0), -1.0, 1e-8);
}

TEST(Elu, MonotoneAndContinuous) {
  Rng rng = make_rng(1, 0);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    double a = u(rng);
    double b = u(rng);
    if (a > b) std::swap(a, b);
    EXPECT_LE(elu(a), elu(b));
  }
  EXPECT_NEAR(elu(1e-12), elu(-1e-12), 1e-11);
}

TEST(Mse, Examples) {
  Vector v(3);
  v << 1.0, 2.0, 3.0;
  EXPECT_EQ(mse(v, v), 0.0);
  EXPECT_DOUBLE_EQ(mse(Vector::Zero(2), Vector::Ones(2)), 1.0);
  EXPECT_DOUBLE_EQ(mse(v, Vector::Ones(3)), 5.0 / 3.0);
  EXPECT_THROW(mse(v, Vector::Ones(2)), DimensionError);
}

TEST(Kl, ClosedForms) {
  EXPECT_EQ(kl_std_normal(GaussianLatent(Vector::Zero(7), Vector::Zero(7))), 0.0);
  EXPECT_DOUBLE_EQ(kl_std_normal(GaussianLatent(Vector::Ones(1), Vector::Zero(1))), 0.5);
  const double ln2 = std::log(2.0);
  EXPECT_NEAR(kl_std_normal(GaussianLatent(Vector::Zero(2), Vector::Constant(2, ln2))), 1.0 - ln2, 1e-15);
  EXPECT_NEAR(1.0 - ln2, 0.3069, 1e-4);
}

TEST(Kl, NonNegativeOnRandomLatents) {
  Rng rng = make_rng(2, 0);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    Vector mu(8), lv(8);
    for (Index j = 0; j < 8; ++j) {
      mu[j] = u(rng);
      lv[j] = u(rng);
    }
    EXPECT_GE(kl_std_normal(GaussianLatent(mu, lv)), 0.0);
  }
}

TEST(GaussianLatent, RejectsMismatchedOrNonFinite) {
  EXPECT_THROW(GaussianLatent(Vector::Zero(2), Vector::Zero(3)), DimensionError);
  Vector bad = Vector::Zero(2);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(GaussianLatent(bad, Vector::Zero(2)), NumericError);
}

TEST(Reparameterize, FixedNoise) {
  const Vector z = reparameterize(GaussianLatent(Vector::Zero(2), Vector::Zero(2)), Vector::Ones(2));
  EXPECT_EQ(z, Vector::Ones(2));
}

TEST(Reparameterize, FloorClampedVarianceCollapsesToMean) {
  Vector mu(3);
  mu << 0.3, -1.0, 2.0;
  Rng rng = make_rng(4, 0);
  const Vector z = reparameterized_sample(GaussianLatent(mu, Vector::Constant(3, -1e6)), rng);
  EXPECT_LT((z - mu).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Reparameterize, GradientWrtMeanIsIdentity) {
  Tape tape;
  Var mu = tape.leaf(Matrix::Zero(3, 1));
  Var lv = tape.leaf(Matrix::Constant(3, 1, 0.4));
  Matrix eps(3, 1);
  eps << 0.7, -1.2, 0.1;
  Var z = tape.reparameterize(mu, lv, eps);
  tape.backward(tape.sum(tape.rows(z, 1, 1)));
  Matrix expected = Matrix::Zero(3, 1);
  expected(1, 0) = 1.0;
  EXPECT_EQ(tape.grad(mu), expected);
}

TEST(Tape, MseGradientClosedForm) {
  Param x("x", Matrix::Zero(4, 1));
  x.value << 1.0, -2.0, 0.5, 3.0;
  Matrix c(4, 1);
  c << 0.0, 1.0, 1.0, -1.0;
  Tape tape;
  tape.backward(tape.mse(tape.param(x), tape.constant(c)));
  const Matrix expected = 2.0 * (x.value - c) / 4.0;
  EXPECT_LT((x.grad - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Tape, UntouchedParameterHasZeroGradient) {
  Param used("u", Matrix::Ones(2, 1));
  Param unused("v", Matrix::Ones(2, 1));
  Tape tape;
  tape.backward(tape.sum(tape.square(tape.param(used))));
  EXPECT_TRUE(unused.grad.isZero());
  EXPECT_FALSE(used.grad.isZero());
}

TEST(Tape, SecondBackwardThrows) {
  Tape tape;
  Var loss = tape.sum(tape.leaf(Matrix::Ones(2, 2)));
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), std::logic_error);
}

TEST(Tape, ReplayIsBitIdentical) {
  Rng rng = make_rng(9, 0);
  DenseLayer layer = DenseLayer::glorot("d", 5, 4, rng);
  const Matrix x = standard_normal(5, 3, rng);
  auto run = [&] {
    Tape tape;
    return Matrix(tape.value(tape.elu(layer.forward(tape, tape.constant(x)))));
  };
  EXPECT_EQ(run(), run());
}

// Each primitive checked against central differences on a small random graph.
class PrimitiveGradient : public ::testing::TestWithParam<int> {};

TEST_P(PrimitiveGradient, MatchesFiniteDifferences) {
  Rng rng = make_rng(100 + static_cast<std::uint64_t>(GetParam()), 0);
  DenseLayer l1 = DenseLayer::glorot("l1", 3, 4, rng);
  DenseLayer l2 = DenseLayer::glorot("l2", 4, 4, rng);
  for (Param* p : l1.params()) p->value += 0.1 * standard_normal(p->value.rows(), p->value.cols(), rng);
  for (Param* p : l2.params()) p->value += 0.1 * standard_normal(p->value.rows(), p->value.cols(), rng);
  const Matrix x = standard_normal(3, 5, rng);
  const Matrix target = standard_normal(2, 5, rng);
  const Matrix eps = standard_normal(2, 5, rng);
  const Matrix mask = standard_normal(4, 5, rng);
  const std::vector<int> picks = {0, 3, 1, 2, 2};
  std::vector<Param*> params;
  for (Param* p : l1.params()) params.push_back(p);
  for (Param* p : l2.params()) params.push_back(p);

  auto loss = [&](Tape& t) {
    Var h = t.elu(l1.forward(t, t.constant(x)));
    Var g = l2.forward(t, h);
    Var mu = t.rows(g, 0, 2);
    Var lv = t.clamp(t.rows(g, 2, 2), -1.5, 1.5);
    Var z = t.reparameterize(mu, lv, eps);
    Var a = t.mse(t.tanh(z), t.constant(target));
    Var b = t.kl_std_normal(mu, lv);
    Var parts[] = {t.exp(t.scale(h, 0.3)), t.mul(g, g)};
    Var c = t.mean(t.mul_const(t.concat_rows(parts), Matrix::Ones(8, 5)));
    Var d = t.mean(t.pick(t.log_softmax(t.add(g, t.constant(mask))), picks));
    Var e = t.sum(t.sub(t.add_scalar(t.square(z), 1.0), t.mul_const(z, eps)));
    return t.add(t.add(t.add(a, b), t.scale(c, 0.1)), t.add(t.scale(d, -1.0), t.scale(e, 0.01)));
  };
  EXPECT_LT(testing::gradient_relative_error(params, loss), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(RandomNetworks, PrimitiveGradient, ::testing::Range(0, 20));

TEST(Adam, ZeroGradientLeavesParamsAndDecaysMoments) {
  Param p("p", Matrix::Constant(2, 2, 1.5));
  std::vector<Param*> params{&p};
  AdamState state(AdamConfig{}, params);
  adam_step(params, state);
  EXPECT_EQ(p.value, Matrix::Constant(2, 2, 1.5));
  EXPECT_EQ(state.step_count, 1);

  state.first_moment[0].setConstant(0.2);
  state.second_moment[0].setConstant(0.4);
  adam_step(params, state);
  EXPECT_DOUBLE_EQ(state.first_moment[0](0, 0), 0.9 * 0.2);
  EXPECT_DOUBLE_EQ(state.second_moment[0](0, 0), 0.999 * 0.4);
  EXPECT_EQ(state.step_count, 2);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Param p("p", Matrix::Zero(3, 1));
  p.grad << 5.0, -0.01, 300.0;
  std::vector<Param*> params{&p};
  AdamState state(AdamConfig{}, params);
  adam_step(params, state);
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(p.value(i, 0)), 1e-3, 1e-9);
  EXPECT_LT(p.value(0, 0), 0.0);
  EXPECT_GT(p.value(1, 0), 0.0);
}

TEST(Adam, MatchesScalarRecurrence) {
  const AdamConfig cfg{0.01, 0.8, 0.95, 1e-6};
  Param p("p", Matrix::Constant(1, 1, 0.7));
  std::vector<Param*> params{&p};
  AdamState state(cfg, params);
  double w = 0.7, m = 0.0, v = 0.0;
  const double g = 0.3;
  for (int t = 1; t <= 2; ++t) {
    p.grad(0, 0) = g;
    adam_step(params, state);
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    const double mh = m / (1 - std::pow(cfg.beta1, t));
    const double vh = v / (1 - std::pow(cfg.beta2, t));
    w -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.epsilon);
  }
  EXPECT_NEAR(p.value(0, 0), w, 1e-15);
  EXPECT_EQ(state.step_count, 2);
}

TEST(Adam, NonFiniteGradientNamesBlockAndChangesNothing) {
  Param a("first.weight", Matrix::Ones(1, 1));
  Param b("second.bias", Matrix::Ones(1, 1));
  a.grad(0, 0) = 1.0;
  b.grad(0, 0) = std::numeric_limits<double>::infinity();
  std::vector<Param*> params{&a, &b};
  AdamState state(AdamConfig{}, params);
  try {
    adam_step(params, state);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("second.bias"), std::string::npos);
  }
  EXPECT_EQ(a.value(0, 0), 1.0);
  EXPECT_EQ(state.step_count, 0);
}

TEST(Adam, RejectsBadHyperparameters) {
  std::vector<Param*> none;
  EXPECT_THROW(AdamState(AdamConfig{-1.0, 0.9, 0.999, 1e-8}, none), std::invalid_argument);
  EXPECT_THROW(AdamState(AdamConfig{1e-3, 1.0, 0.999, 1e-8}, none), std::invalid_argument);
}

TEST(Softmax, SumsToOneAndIsStable) {
  Vector logits(3);
  logits << 1000.0, 999.0, -1000.0;
  const Vector p = softmax(logits);
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  EXPECT_TRUE(all_finite(p));
}

}  // namespace
}  // namespace introspect::nn
