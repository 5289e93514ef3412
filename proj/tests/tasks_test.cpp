#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fflp/coding.hpp"
#include "fflp/dataset.hpp"
#include "fflp/errors.hpp"
#include "fflp/runner.hpp"
#include "fflp/tasks.hpp"
#include "support/random_network.hpp"

using namespace fflp;

namespace {

double run_constant(Environment& env, std::size_t variant, const std::vector<double>& action) {
  env.reset(1, variant);
  double total = 0.0;
  for (;;) {
    const StepResult r = env.step(action);
    total += r.reward;
    if (r.done) return total;
  }
}

Dataset tiny_dataset(std::size_t n, std::uint8_t label_for_all = 255) {
  Dataset d;
  d.rows = d.cols = 8;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint8_t> img(64);
    for (std::size_t p = 0; p < 64; ++p) img[p] = static_cast<std::uint8_t>((i * 31 + p * 7) & 0xFF);
    d.images.push_back(img);
    d.labels.push_back(label_for_all == 255 ? static_cast<std::uint8_t>(i % 10) : label_for_all);
  }
  return d;
}

}  // namespace

// ------------------------------------------------------------------ coding

TEST(RateEncoder, ExtremeFeaturesAreDeterministic) {
  RateEncoder enc({{"a", 1.0, false}, {"b", 1.0, false}});
  std::mt19937_64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    const SpikeVector s = enc.encode(std::vector<double>{0.0, 1.0}, rng);
    EXPECT_EQ(s[0], 0);
    EXPECT_EQ(s[1], 1);
  }
}

TEST(RateEncoder, HalfRateConcentrates) {
  RateEncoder enc({{"a", 1.0, false}});
  std::mt19937_64 rng(77);
  int spikes = 0;
  for (int t = 0; t < 10000; ++t) spikes += enc.encode(std::vector<double>{0.5}, rng)[0];
  EXPECT_NEAR(spikes / 10000.0, 0.5, 0.02);
}

TEST(RateEncoder, SignedFeaturesUseAntitheticPair) {
  RateEncoder enc({{"x", 2.0, true}});
  EXPECT_EQ(enc.n_inputs(), 2u);
  const auto p = enc.probabilities(std::vector<double>{-1.0});
  EXPECT_DOUBLE_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(RateEncoder, ClipsAndCountsOutOfRange) {
  RateEncoder enc({{"x", 1.0, true}, {"u", 1.0, false}});
  const auto p = enc.probabilities(std::vector<double>{3.0, -0.5});
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[2], 0.0);
  EXPECT_EQ(enc.clipped_count(), 2u);
  enc.probabilities(std::vector<double>{std::nan(""), 0.2});
  EXPECT_EQ(enc.clipped_count(), 3u);
}

TEST(RateEncoder, SameStreamSameSpikes) {
  RateEncoder enc({{"x", 1.0, true}, {"y", 1.0, false}});
  std::mt19937_64 a(5), b(5);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> obs{std::sin(t * 0.1), 0.3};
    EXPECT_EQ(enc.encode(obs, a), enc.encode(obs, b));
  }
}

TEST(SpikeCountDecode, MapsRatesAffinely) {
  const std::vector<ActionSpec> actions{{"s", 2.0, true}, {"u", 0.5, false}};
  const std::vector<std::uint32_t> counts{12, 4, 8};
  const auto a = spike_count_decode(counts, 16, actions);
  EXPECT_DOUBLE_EQ(a[0], 1.0);
  EXPECT_DOUBLE_EQ(a[1], 0.25);
  EXPECT_THROW(spike_count_decode(std::vector<std::uint32_t>{1, 2}, 16, actions), std::invalid_argument);
  EXPECT_THROW(spike_count_decode(counts, 0, actions), std::invalid_argument);
}

// ------------------------------------------------------------------- tasks

TEST(PointMass, SplitMatchesCompassDirections) {
  PointMassDirectionTask task;
  const TaskSpec& s = task.spec();
  ASSERT_EQ(s.train_variants.size(), 8u);
  ASSERT_EQ(s.eval_variants.size(), 72u);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_NEAR(PointMassDirectionTask::heading(s.train_variants[k]), k * std::numbers::pi / 4.0, 1e-12);
  }
  EXPECT_EQ(s.n_inputs(), 8u);
  EXPECT_EQ(s.n_outputs(), 4u);
}

TEST(PointMass, ZeroActionGivesZeroReturn) {
  PointMassDirectionTask task;
  EXPECT_EQ(run_constant(task, 13, {0.0, 0.0}), 0.0);
}

TEST(PointMass, UnitVectorTowardTargetIsOptimal) {
  PointMassDirectionTask task;
  for (std::size_t v : {0u, 7u, 33u, 61u}) {
    const double th = PointMassDirectionTask::heading(v);
    const double best = run_constant(task, v, {std::cos(th), std::sin(th)});
    EXPECT_GT(best, 0.0);
    for (double off : {0.3, -0.6, 1.5, 3.0}) {
      EXPECT_LT(run_constant(task, v, {std::cos(th + off), std::sin(th + off)}), best);
    }
    // Oversized actions are clipped to the unit disk.
    EXPECT_DOUBLE_EQ(run_constant(task, v, {5 * std::cos(th), 5 * std::sin(th)}), best);
  }
}

TEST(PointMass, StepAfterDoneAndBadVariantRejected) {
  PointMassDirectionTask task;
  run_constant(task, 0, {0.0, 0.0});
  EXPECT_THROW(task.step(std::vector<double>{0.0, 0.0}), std::logic_error);
  EXPECT_THROW(task.reset(0, 80), std::out_of_range);
}

TEST(VelocityTracking, ZeroActionDriftsToMinusTarget) {
  VelocityTrackingTask task;
  task.reset(0, 40);
  StepResult r;
  for (int i = 0; i < 100; ++i) r = task.step(std::vector<double>{0.0});
  EXPECT_DOUBLE_EQ(r.reward, -VelocityTrackingTask::target_speed(40));
}

TEST(VelocityTracking, SteadyStateForceTracksPerfectly) {
  VelocityTrackingTask task;
  const double target = VelocityTrackingTask::target_speed(25);
  task.reset(0, 25);
  StepResult r;
  for (int i = 0; i < 100; ++i) r = task.step(std::vector<double>{target * VelocityTrackingTask::kDrag});
  // v_n = target * (1 - (1 - dt * drag)^n) approaches the target geometrically.
  EXPECT_NEAR(r.reward, -target * std::pow(0.95, 100), 1e-12);
  EXPECT_EQ(task.spec().train_variants.size(), 8u);
  EXPECT_EQ(task.spec().eval_variants.size(), 72u);
}

TEST(Reaching, GoalAtEndEffectorCostsNothing) {
  ReachingTask task;
  task.reset(3, 0);
  task.set_goal_at_end_effector();
  const StepResult r = task.step(std::vector<double>{0.0, 0.0});
  EXPECT_EQ(r.reward, 0.0);
}

TEST(Reaching, KinematicsAndGoalSampling) {
  const auto p = ReachingTask::forward_kinematics(0.0, std::numbers::pi / 2);
  EXPECT_NEAR(p.x, 0.5, 1e-12);
  EXPECT_NEAR(p.y, 0.5, 1e-12);
  ReachingTask task;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    task.reset(seed, 0);
    EXPECT_GE(task.segment_start_distance(), 0.2);
    const auto g = task.goal();
    EXPECT_LE(std::hypot(g.x, g.y), ReachingTask::kLink0 + ReachingTask::kLink1);
  }
  EXPECT_EQ(task.spec().n_inputs(), 4u);
  EXPECT_EQ(task.spec().n_outputs(), 4u);
}

TEST(Reaching, FrozenJointOnlyAffectsThatJoint) {
  ReachingTask a, b;
  b.set_perturbation(Perturbation::parse("joint-freeze@0", 400));
  a.reset(1, 0);
  b.reset(1, 0);
  a.step(std::vector<double>{0.0, 1.0});
  b.step(std::vector<double>{1.0, 1.0});
  EXPECT_EQ(a.end_effector().x, b.end_effector().x);
  EXPECT_EQ(a.end_effector().y, b.end_effector().y);
}

TEST(Perturbation, Parsing) {
  EXPECT_FALSE(Perturbation::parse("none", 400).has_value());
  const auto f = Perturbation::parse("joint-freeze", 400);
  ASSERT_TRUE(f);
  EXPECT_EQ(f->at_step, 200u);
  EXPECT_EQ(f->gain, 0.0);
  const auto g = Perturbation::parse("joint-gain:0.25@120#1", 400);
  ASSERT_TRUE(g);
  EXPECT_EQ(g->gain, 0.25);
  EXPECT_EQ(g->at_step, 120u);
  EXPECT_EQ(g->channel, 1u);
  EXPECT_THROW(Perturbation::parse("leg-failure", 400), std::invalid_argument);
  EXPECT_THROW(Perturbation::parse("joint-gain:abc", 400), std::invalid_argument);
}

TEST(Environments, ReplayReproducesRewards) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const char* name : {"point_mass_direction", "velocity_tracking", "reaching"}) {
    auto env = make_task(name);
    env->set_perturbation(Perturbation::parse("joint-gain:0.3@10", 100));
    const std::size_t n_act = env->spec().actions.size();
    std::vector<std::vector<double>> actions;
    std::vector<double> rewards;
    env->reset(42, 0);
    for (std::size_t i = 0; i < env->spec().episode_length; ++i) {
      std::vector<double> a(n_act);
      for (double& x : a) x = u(rng);
      actions.push_back(a);
      rewards.push_back(env->step(a).reward);
    }
    env->reset(42, 0);
    for (std::size_t i = 0; i < actions.size(); ++i) EXPECT_EQ(env->step(actions[i]).reward, rewards[i]) << name;
  }
  EXPECT_THROW(make_task("ant"), std::invalid_argument);
}

// ----------------------------------------------------------------- dataset

TEST(Dataset, RoundTripAndBundledDigits) {
  const Dataset d = tiny_dataset(23);
  std::stringstream ss;
  write_dataset(ss, d);
  const Dataset back = read_dataset(ss);
  EXPECT_EQ(back.images, d.images);
  EXPECT_EQ(back.labels, d.labels);

  const Dataset digits = load_dataset(default_digits_path());
  EXPECT_EQ(digits.size(), 1797u);
  EXPECT_EQ(digits.rows, 8u);
  EXPECT_EQ(digits.cols, 8u);
}

TEST(Dataset, MalformedRecordReportsIndex) {
  const Dataset d = tiny_dataset(10);
  std::stringstream ss;
  write_dataset(ss, d);
  std::string bytes = ss.str();

  std::string bad_label = bytes;
  bad_label[16 + 65 * 6 + 64] = 10;
  std::istringstream a(bad_label);
  try {
    read_dataset(a);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 6u);
  }

  std::istringstream b(bytes.substr(0, 16 + 65 * 4 + 30));
  try {
    read_dataset(b);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }

  std::istringstream c("FFDX" + bytes.substr(4));
  EXPECT_THROW(read_dataset(c), FormatError);
  EXPECT_THROW(load_dataset("/nonexistent/digits.ffds"), IoError);
}

TEST(MiniClassify, ZeroImagesGiveChanceAccuracy) {
  Dataset d;
  d.rows = d.cols = 8;
  for (int i = 0; i < 1000; ++i) {
    d.images.emplace_back(64, 0);
    d.labels.push_back(static_cast<std::uint8_t>(i % 10));
  }
  MiniClassifyTask task(d, 1000, 1000);
  auto net = NetworkState::zeros(network_for(task.spec(), 8));
  FunctionalBackend backend;
  EpisodeConfig cfg;
  run_episode(task, backend, net, PlasticityRule::zeros(net.config), cfg);
  EXPECT_DOUBLE_EQ(task.accuracy(), 0.1);
}

TEST(MiniClassify, SingleClassIsTriviallySolved) {
  MiniClassifyTask task(tiny_dataset(50, 0), 40, 30);
  auto net = NetworkState::zeros(network_for(task.spec(), 8));
  FunctionalBackend backend;
  run_episode(task, backend, net, PlasticityRule::zeros(net.config), EpisodeConfig{});
  EXPECT_DOUBLE_EQ(task.accuracy(), 1.0);
  EXPECT_EQ(MiniClassifyTask::predict(std::vector<double>{0.2, 0.5, 0.5}), 1u);
}

// ------------------------------------------------------------------ runner

TEST(Runner, ZeroRuleLeavesWeightsAndActionsAtZero) {
  ReachingTask task;
  const NetworkConfig cfg = network_for(task.spec(), 16);
  FunctionalBackend backend;
  EpisodeConfig ec;
  ec.seed = 4;
  ec.record = true;
  ec.perturbation = Perturbation::parse("joint-freeze", 400);
  const auto r = run_episode(task, backend, NetworkState::zeros(cfg), PlasticityRule::zeros(cfg), ec);
  EXPECT_EQ(backend.state().w_input_hidden, NetworkState::zeros(cfg).w_input_hidden);
  for (const auto& a : r.actions)
    for (double x : a) EXPECT_EQ(x, 0.0);
  // Without movement there is no progress, so nothing to recover.
  const auto rec = recovery(reaching_progress(r, ReachingTask::kSegmentLength), 200);
  EXPECT_LT(rec.fraction, 0.1);
}

TEST(Runner, DeterministicAndCsvShape) {
  PointMassDirectionTask task;
  std::mt19937_64 rng(12);
  const NetworkConfig cfg = network_for(task.spec(), 8);
  const PlasticityRule rule = testing_support::random_rule(rng, cfg, 0.05);
  EpisodeConfig ec;
  ec.seed = 99;
  ec.variant = 17;
  ec.record = true;
  FunctionalBackend b1, b2;
  const auto r1 = run_episode(task, b1, NetworkState::zeros(cfg), rule, ec);
  const auto r2 = run_episode(task, b2, NetworkState::zeros(cfg), rule, ec);
  EXPECT_EQ(r1.rewards, r2.rewards);
  EXPECT_EQ(r1.final_state_hash, r2.final_state_hash);
  EXPECT_EQ(r1.snn_timesteps, 16u * 100u);

  std::ostringstream os;
  write_episode_csv(os, task.spec(), r1);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "step,dir_cos,dir_sin,vx,vy,ax,ay,reward");
  std::size_t lines = 0;
  for (std::string line; std::getline(is, line);) ++lines;
  EXPECT_EQ(lines, 100u);
}

TEST(Runner, RejectsMismatchedNetwork) {
  PointMassDirectionTask task;
  NetworkConfig cfg{3, 4, 4};
  FunctionalBackend backend;
  EXPECT_THROW(run_episode(task, backend, NetworkState::zeros(cfg), PlasticityRule::zeros(cfg), {}),
               std::invalid_argument);
}

TEST(Recovery, Windows) {
  std::vector<double> p(400, 0.8);
  for (std::size_t i = 200; i < 400; ++i) p[i] = 0.2;
  for (std::size_t i = 350; i < 400; ++i) p[i] = 0.6;
  const auto r = recovery(p, 200);
  EXPECT_NEAR(r.pre, 0.8, 1e-12);
  EXPECT_NEAR(r.post, 0.6, 1e-12);
  EXPECT_NEAR(r.fraction, 0.75, 1e-12);
  EXPECT_THROW(recovery(p, 250), std::invalid_argument);
}
