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

#include <array>
#include <cmath>

#include "introspect/bbrl/networks.hpp"
#include "introspect/bbrl/training.hpp"
#include "introspect/introspection/vae.hpp"

namespace introspect::bbrl {
namespace {

std::vector<Matrix> snapshot(const std::vector<const Param*>& params) {
  std::vector<Matrix> out;
  for (const Param* p : params) out.push_back(p->value);
  return out;
}

Vector logits3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

void zero_all(std::vector<Param*> params) {
  for (Param* p : params) p->value.setZero();
}

// Stage training is the slowest fixture; share one trained stack.
class TrainedStack : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    nets_ = new BbrlNetworks({}, 0.05, 7);
    for (BehaviourId b : env::kAllBehaviours) {
      results_[static_cast<std::size_t>(env::index_of(b))] = train_behaviour_stage(*nets_, b, *env_, StageConfig{}, 7);
    }
  }
  static void TearDownTestSuite() {
    delete nets_;
    nets_ = nullptr;
  }

  static inline const env::PickPlaceEnv* env_ = new env::PickPlaceEnv();
  static inline BbrlNetworks* nets_ = nullptr;
  static inline std::array<StageResult, 3> results_{};
};

TEST(FeatureExtractor, ActivationsConcatenateBothLayers) {
  Rng rng = nn::make_rng(1, 0);
  FeatureExtractor fe(NetworkSizes{}, rng);
  const FeOutput out = fe.forward(Vector(Vector::LinSpaced(env::kObsDim, -0.5, 0.5)));
  ASSERT_EQ(out.activations.size(), 256);
  ASSERT_EQ(out.features.size(), 128);
  EXPECT_EQ(Vector(out.activations.tail(128)), out.features);
}

TEST(FeatureExtractor, ZeroWeightsGiveZeroActivations) {
  Rng rng = nn::make_rng(1, 0);
  FeatureExtractor fe(NetworkSizes{}, rng);
  zero_all(fe.params());
  EXPECT_TRUE(fe.forward(Vector(Vector::Ones(env::kObsDim))).activations.isZero());
}

TEST(FeatureExtractor, RejectsWrongObservationLength) {
  Rng rng = nn::make_rng(1, 0);
  FeatureExtractor fe(NetworkSizes{}, rng);
  EXPECT_THROW(fe.forward(Vector(Vector::Zero(12))), nn::DimensionError);
}

TEST(Reactive, ZeroWeightsGiveZeroTranslation) {
  Rng rng = nn::make_rng(2, 0);
  ReactiveNetwork rn(NetworkSizes{}, 0.05, rng);
  zero_all(rn.params());
  for (BehaviourId b : env::kAllBehaviours) EXPECT_TRUE(rn.forward(Vector::Ones(128), b).delta_pos.isZero());
}

TEST(Reactive, OutputsRespectBounds) {
  Rng rng = nn::make_rng(3, 0);
  ReactiveNetwork rn(NetworkSizes{}, 0.05, rng);
  for (Param* p : rn.params()) p->value *= 50.0;
  for (int i = 0; i < 100; ++i) {
    const Vector f = 10.0 * nn::standard_normal(128, rng);
    for (BehaviourId b : env::kAllBehaviours) {
      const auto a = rn.forward(f, b);
      EXPECT_LE(a.delta_pos.cwiseAbs().maxCoeff(), 0.05);
      EXPECT_LE(std::abs(a.rotation), 1.0);
      EXPECT_GE(a.gripper_cmd, 0.0);
      EXPECT_LE(a.gripper_cmd, 1.0);
    }
  }
  EXPECT_EQ(head_outputs(BehaviourId::Grasp), 5);
  EXPECT_EQ(head_outputs(BehaviourId::Approach), 3);
  EXPECT_EQ(head_outputs(BehaviourId::Retract), 3);
}

TEST(ActorCritic, ZeroWeightsGiveUniformPolicy) {
  Rng rng = nn::make_rng(4, 0);
  ActorCritic ac(10, 64, rng);
  zero_all(ac.params());
  const AcOutput out = ac.forward(Vector::Ones(10));
  EXPECT_TRUE(out.logits.isZero());
  EXPECT_EQ(out.value, 0.0);
  const Vector p = nn::softmax(out.logits);
  for (Index i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(p[i], 1.0 / 3.0);
}

TEST(ActorCritic, SoftmaxSumsToOneAndIsDeterministic) {
  Rng rng = nn::make_rng(5, 0);
  ActorCritic ac(20, 64, rng);
  for (int i = 0; i < 100; ++i) {
    const Vector x = nn::standard_normal(20, rng);
    const AcOutput a = ac.forward(x);
    const AcOutput b = ac.forward(x);
    ASSERT_EQ(a.logits.size(), 3);
    EXPECT_NEAR(nn::softmax(a.logits).sum(), 1.0, 1e-6);
    EXPECT_EQ(a.logits, b.logits);
    EXPECT_EQ(a.value, b.value);
  }
}

TEST(ActorCritic, MismatchNamesVariant) {
  Rng rng = nn::make_rng(6, 0);
  ActorCritic ac(100, 64, rng);
  try {
    ac.forward(Vector::Zero(50), "means-logvar");
    FAIL() << "expected DimensionError";
  } catch (const nn::DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("means-logvar"), std::string::npos);
  }
}

TEST(SelectBehaviour, GreedyExamples) {
  Rng rng = nn::make_rng(7, 0);
  EXPECT_EQ(select_behaviour(logits3(10.0, 0.0, 0.0), SelectMode::Greedy, rng), BehaviourId::Approach);
  EXPECT_EQ(select_behaviour(logits3(5.0, 5.0, 0.0), SelectMode::Greedy, rng), BehaviourId::Approach);
  EXPECT_EQ(select_behaviour(logits3(0.0, 1.0, 3.0), SelectMode::Greedy, rng), BehaviourId::Retract);
}

TEST(SelectBehaviour, GreedyInvariantToLogitShift) {
  Rng rng = nn::make_rng(8, 0);
  for (int i = 0; i < 1000; ++i) {
    const Vector logits = nn::standard_normal(3, rng);
    const double shift = 100.0 * nn::standard_normal(1, rng)[0];
    EXPECT_EQ(select_behaviour(logits, SelectMode::Greedy, rng),
              select_behaviour(Vector(logits.array() + shift), SelectMode::Greedy, rng));
  }
}

TEST(SelectBehaviour, UniformSamplingFrequencies) {
  Rng rng = nn::make_rng(9, 0);
  std::array<int, 3> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(env::index_of(select_behaviour(Vector::Zero(3), SelectMode::Sample, rng)))]++;
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / n, 1.0 / 3.0, 0.01);
}

TEST(StageTraining, OrderIsEnforced) {
  env::PickPlaceEnv env;
  BbrlNetworks nets({}, 0.05, 1);
  StageConfig cfg;
  cfg.episodes = 2;
  EXPECT_THROW(train_behaviour_stage(nets, BehaviourId::Grasp, env, cfg, 1), std::logic_error);
  train_behaviour_stage(nets, BehaviourId::Approach, env, cfg, 1);
  EXPECT_THROW(train_behaviour_stage(nets, BehaviourId::Approach, env, cfg, 1), std::logic_error);
  EXPECT_THROW(train_behaviour_stage(nets, BehaviourId::Retract, env, cfg, 1), std::logic_error);
}

TEST(StageTraining, LaterStagesFreezeFeatureExtractor) {
  env::PickPlaceEnv env;
  BbrlNetworks nets({}, 0.05, 2);
  StageConfig cfg;
  cfg.episodes = 20;
  train_behaviour_stage(nets, BehaviourId::Approach, env, cfg, 2);
  const auto before = snapshot(std::as_const(nets.fe).params());
  train_behaviour_stage(nets, BehaviourId::Grasp, env, cfg, 2);
  train_behaviour_stage(nets, BehaviourId::Retract, env, cfg, 2);
  EXPECT_EQ(snapshot(std::as_const(nets.fe).params()), before);
}

TEST_F(TrainedStack, ApproachLossFallsBelowTenPercent) {
  const auto& curve = results_[0].loss_curve;
  ASSERT_EQ(curve.size(), 500u);
  EXPECT_LT(curve.back(), 0.1 * curve.front());
}

TEST_F(TrainedStack, ApproachHeadImitatesExpert) {
  // Held-out states from a seed the stage never saw.
  Rng rng = nn::make_rng(999, 0);
  std::vector<Vector> expert, predicted;
  for (int e = 0; e < 50; ++e) {
    auto [s, obs] = env_->reset(rng);
    while (!s.done) {
      const BehaviourId b = env_->scripted_behaviour_schedule(s);
      const auto a = env_->expert_action(s, b);
      if (b == BehaviourId::Approach) {
        expert.push_back(a.delta_pos);
        predicted.push_back(nets_->rn.forward(nets_->fe.forward(obs).features, b).delta_pos);
      }
      auto next = env_->step(s, b, a);
      s = next.state;
      obs = next.observation;
    }
  }
  Vector mean = Vector::Zero(3);
  for (const auto& v : expert) mean += v;
  mean /= static_cast<double>(expert.size());
  double variance = 0.0, error = 0.0;
  for (std::size_t i = 0; i < expert.size(); ++i) {
    variance += (expert[i] - mean).squaredNorm();
    error += (expert[i] - predicted[i]).squaredNorm();
  }
  EXPECT_LT(error, 0.1 * variance);
}

TEST_F(TrainedStack, ReactiveRolloutsSucceed) {
  EXPECT_GE(evaluate_reactive(*env_, *nets_, 200, 5).success_rate(), 0.9);
}

TEST_F(TrainedStack, ActorCriticLogContract) {
  const auto fe_before = snapshot(std::as_const(nets_->fe).params());
  const auto rn_before = snapshot(std::as_const(*nets_).rn.params());
  Rng rng = nn::make_rng(1, 60);
  ActorCritic ac(128, 64, rng);
  ActorCriticConfig cfg;
  cfg.episodes = 60;
  const TrainingLog log = train_actor_critic(*env_, *nets_, ac, WiringVariant::Baseline, nullptr, cfg, 3);
  ASSERT_EQ(log.episodes.size(), 60u);
  for (std::size_t i = 0; i < log.episodes.size(); ++i) {
    const auto& e = log.episodes[i];
    EXPECT_EQ(e.episode, static_cast<int>(i));
    EXPECT_EQ(e.update_count, static_cast<std::int64_t>(i + 1));
    int decisions = 0;
    for (std::size_t b = 0; b < 3; ++b) {
      decisions += e.behaviour_counts[b];
      EXPECT_EQ(e.mean_value[b].has_value(), e.behaviour_counts[b] > 0);
    }
    EXPECT_EQ(decisions, e.decisions);
    EXPECT_LE(e.decisions, e.steps);
    EXPECT_LE(e.steps, env_->config().horizon);
  }
  EXPECT_EQ(snapshot(std::as_const(nets_->fe).params()), fe_before);
  EXPECT_EQ(snapshot(std::as_const(*nets_).rn.params()), rn_before);
}

TEST_F(TrainedStack, ActorCriticIsDeterministic) {
  auto run = [&] {
    Rng rng = nn::make_rng(2, 60);
    ActorCritic ac(128, 64, rng);
    ActorCriticConfig cfg;
    cfg.episodes = 30;
    return train_actor_critic(*env_, *nets_, ac, WiringVariant::Baseline, nullptr, cfg, 4);
  };
  const TrainingLog a = run();
  const TrainingLog b = run();
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    EXPECT_EQ(a.episodes[i].episode_return, b.episodes[i].episode_return);
    EXPECT_EQ(a.episodes[i].actor_loss, b.episodes[i].actor_loss);
    EXPECT_EQ(a.episodes[i].mean_value, b.episodes[i].mean_value);
  }
}

TEST_F(TrainedStack, TimeoutOneChoosesEveryStep) {
  Rng rng = nn::make_rng(3, 60);
  ActorCritic ac(128, 64, rng);
  ActorCriticConfig cfg;
  cfg.episodes = 10;
  cfg.behaviour_timeout = 1;
  const TrainingLog log = train_actor_critic(*env_, *nets_, ac, WiringVariant::Baseline, nullptr, cfg, 5);
  for (const auto& e : log.episodes) EXPECT_EQ(e.decisions, e.steps);
}

TEST_F(TrainedStack, VaeVariantWithoutVaeThrows) {
  Rng rng = nn::make_rng(4, 60);
  ActorCritic ac(50, 64, rng);
  EXPECT_THROW(train_actor_critic(*env_, *nets_, ac, WiringVariant::MeansOnly, nullptr, {}, 1), std::invalid_argument);
}

TEST_F(TrainedStack, WrongInputWidthThrows) {
  Rng rng = nn::make_rng(5, 60);
  ActorCritic ac(50, 64, rng);
  EXPECT_THROW(train_actor_critic(*env_, *nets_, ac, WiringVariant::Baseline, nullptr, {}, 1), nn::DimensionError);
}

}  // namespace
}  // namespace introspect::bbrl
