#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "fflp/evolution.hpp"
#include "support/random_network.hpp"

using namespace fflp;

namespace {

EvolutionState state_with(std::vector<double> mu, std::vector<double> sigma) {
  EvolutionState es = EvolutionState::initial(mu.size(), 17);
  es.mu = std::move(mu);
  es.sigma = std::move(sigma);
  return es;
}

TrainConfig smoke_config() {
  TrainConfig tc;
  tc.net = network_for(PointMassDirectionTask().spec(), 4);
  tc.plan.variants = {0, 20};
  tc.plan.timesteps_per_step = 4;
  tc.generations = 5;
  tc.pop_size = 6;
  tc.seed = 5;
  return tc;
}

TaskFactory point_mass() {
  return [] { return std::make_unique<PointMassDirectionTask>(); };
}

}  // namespace

// ------------------------------------------------------------ sampling

TEST(SamplePopulation, MirroredPairsAroundMu) {
  const EvolutionState es = state_with({0.3, -1.0, 2.0}, {0.1, 0.2, 0.05});
  const SampledPopulation p = sample_population(es, 2);
  ASSERT_EQ(p.epsilon.size(), 1u);
  ASSERT_EQ(p.genomes.size(), 2u);
  for (std::size_t g = 0; g < 3; ++g) {
    EXPECT_EQ(p.genomes[0][g], es.mu[g] + p.epsilon[0][g]);
    EXPECT_EQ(p.genomes[1][g], es.mu[g] - p.epsilon[0][g]);
  }
}

TEST(SamplePopulation, VanishingSigmaCollapsesOntoMu) {
  const EvolutionState es = state_with({0.3, -1.0}, {1e-30, 1e-30});
  for (const auto& genome : sample_population(es, 8).genomes) EXPECT_EQ(genome, es.mu);
}

TEST(SamplePopulation, ReproducibleFromSeedAndGeneration) {
  EvolutionState es = EvolutionState::initial(50, 99);
  const auto a = sample_population(es, 10);
  const auto b = sample_population(es, 10);
  EXPECT_EQ(a.genomes, b.genomes);
  es.generation = 1;
  EXPECT_NE(sample_population(es, 10).genomes, a.genomes);
  EXPECT_THROW(sample_population(es, 7), std::invalid_argument);
  EXPECT_THROW(sample_population(es, 0), std::invalid_argument);
}

TEST(SamplePopulation, PerturbationScaleFollowsSigma) {
  const EvolutionState es = state_with(std::vector<double>(2000, 0.0), std::vector<double>(2000, 0.05));
  const auto p = sample_population(es, 20);
  double ss = 0.0;
  std::size_t n = 0;
  for (const auto& e : p.epsilon)
    for (double x : e) ss += x * x, ++n;
  EXPECT_NEAR(std::sqrt(ss / n), 0.05, 0.002);
}

// -------------------------------------------------------------- shaping

TEST(CenteredRanks, SpanAndTies) {
  EXPECT_EQ(centered_ranks({3.0, 1.0, 2.0}), (std::vector<double>{0.5, -0.5, 0.0}));
  EXPECT_EQ(centered_ranks({1.0, 1.0, 1.0, 1.0}), (std::vector<double>(4, 0.0)));
  const auto r = centered_ranks({5.0, 0.0, 5.0, 1.0});
  EXPECT_DOUBLE_EQ(r[0], 2.5 / 3.0 - 0.5);
  EXPECT_EQ(r[0], r[2]);
  EXPECT_DOUBLE_EQ(r[1], -0.5);
}

// --------------------------------------------------------------- update

TEST(PepgUpdate, EqualMirroredFitnessLeavesMuUnchanged) {
  std::mt19937_64 rng(4);
  const EvolutionState es = state_with({0.1, -0.7, 0.25, 3.0}, {0.05, 0.3, 0.01, 0.2});
  const auto pop = sample_population(es, 8);
  std::vector<MirroredFitness> f;
  for (int k = 0; k < 4; ++k) f.push_back({k * 1.5 - 2.0, k * 1.5 - 2.0});
  const EvolutionState next = pepg_update(es, pop.epsilon, f, PepgConfig{});
  EXPECT_EQ(next.mu, es.mu);
  EXPECT_EQ(next.generation, es.generation + 1);
}

TEST(PepgUpdate, FitnessAtBaselineLeavesSigmaUnchanged) {
  const EvolutionState es = state_with({0.1, -0.7, 0.25}, {0.05, 0.3, 0.01});
  const auto pop = sample_population(es, 6);
  const std::vector<MirroredFitness> f(3, MirroredFitness{4.2, 4.2});
  const EvolutionState next = pepg_update(es, pop.epsilon, f, PepgConfig{});
  EXPECT_EQ(next.sigma, es.sigma);
  EXPECT_EQ(next.mu, es.mu);
}

TEST(PepgUpdate, HandBuiltTwoPairCase) {
  // Raw fitness {3, 5, 0, 1} ranks to {1/6, 1/2, -1/2, -1/6}; baseline 0.
  // mu_g    += 0.2 * mean_k[(f+ - f-) / 2 * eps_kg]
  // sigma_g += 0.1 * mean_k[((f+ + f-) / 2) * (eps_kg^2 - sigma_g^2) / sigma_g]
  const EvolutionState es = state_with({0.1, -0.2}, {0.05, 0.1});
  const std::vector<std::vector<double>> eps{{0.02, -0.05}, {-0.04, 0.1}};
  const std::vector<MirroredFitness> f{{3.0, 5.0}, {0.0, 1.0}};
  const EvolutionState next = pepg_update(es, eps, f, PepgConfig{});
  EXPECT_NEAR(next.mu[0], 301.0 / 3000.0, 1e-15);
  EXPECT_NEAR(next.mu[1], -241.0 / 1200.0, 1e-15);
  EXPECT_NEAR(next.sigma[0], 31.0 / 625.0, 1e-15);
  EXPECT_NEAR(next.sigma[1], 79.0 / 800.0, 1e-15);
}

TEST(PepgUpdate, PairOrderDoesNotMatter) {
  const EvolutionState es = EvolutionState::initial(30, 3);
  const auto pop = sample_population(es, 10);
  std::vector<MirroredFitness> f;
  for (int k = 0; k < 5; ++k) f.push_back({std::sin(k * 1.3), std::cos(k * 0.7)});
  const EvolutionState a = pepg_update(es, pop.epsilon, f, PepgConfig{});
  std::vector<std::vector<double>> eps_r(pop.epsilon.rbegin(), pop.epsilon.rend());
  std::vector<MirroredFitness> f_r(f.rbegin(), f.rend());
  const EvolutionState b = pepg_update(es, eps_r, f_r, PepgConfig{});
  for (std::size_t g = 0; g < 30; ++g) {
    EXPECT_NEAR(a.mu[g], b.mu[g], 1e-15);
    EXPECT_NEAR(a.sigma[g], b.sigma[g], 1e-15);
  }
}

TEST(PepgUpdate, SigmaNeverBelowFloor) {
  const EvolutionState es = state_with({0.0, 0.0}, {0.002, 0.002});
  // Small perturbations on the better pair shrink sigma hard.
  const std::vector<std::vector<double>> eps{{0.0, 0.0}, {0.01, 0.01}};
  const std::vector<MirroredFitness> f{{10.0, 10.0}, {-10.0, -10.0}};
  PepgConfig cfg;
  cfg.eta_sigma = 50.0;
  const EvolutionState next = pepg_update(es, eps, f, cfg);
  for (double s : next.sigma) EXPECT_EQ(s, cfg.sigma_min);
  EXPECT_NO_THROW(next.check());
}

TEST(PepgUpdate, RejectsMismatchedPairs) {
  const EvolutionState es = EvolutionState::initial(4, 1);
  const auto pop = sample_population(es, 4);
  EXPECT_THROW(pepg_update(es, pop.epsilon, {{1.0, 2.0}}, PepgConfig{}), std::invalid_argument);
}

// --------------------------------------------------------------- genome

TEST(Genome, RoundTripsThroughRule) {
  std::mt19937_64 rng(8);
  const NetworkConfig cfg{5, 4, 3};
  const PlasticityRule rule = testing_support::random_rule(rng, cfg, 0.3);
  const auto genome = rule_to_genome(rule, cfg);
  ASSERT_EQ(genome.size(), genome_length(cfg));
  EXPECT_EQ(genome_to_rule(genome, cfg), rule);
  // Interleaved (alpha, beta, gamma, delta) per synapse, first layer first.
  EXPECT_EQ(genome[4 * 6 + 3], rule.input_hidden.delta(1, 1).to_double());
  EXPECT_EQ(genome[4 * 20 + 1], rule.hidden_output.beta(0, 0).to_double());
  EXPECT_THROW(genome_to_rule(std::vector<double>(3), cfg), std::invalid_argument);
}

// ----------------------------------------------------------- evaluation

TEST(EvaluateCandidate, ZeroGenomeOnReachingNeverMoves) {
  ReachingTask task;
  const NetworkConfig cfg = network_for(task.spec(), 8);
  EvaluationPlan plan;
  plan.variants = {0};
  const auto report = evaluate_candidate(std::vector<double>(genome_length(cfg), 0.0), cfg, task, plan, 3);
  EXPECT_FALSE(report.flagged);
  // The arm stays where it started, exactly as with explicit zero actions.
  ReachingTask idle;
  idle.reset(episode_seed(3, 0, 0), 0);
  double idle_return = 0.0;
  for (std::size_t t = 0; t < idle.spec().episode_length; ++t) idle_return += idle.step(std::vector<double>{0.0, 0.0}).reward;
  EXPECT_EQ(report.aggregate, idle_return);
  EXPECT_GT(report.aggregate, task.spec().fitness_floor);
}

TEST(EvaluateCandidate, DivergenceIsFlaggedAtFloor) {
  PointMassDirectionTask task;
  const NetworkConfig cfg = network_for(task.spec(), 4);
  std::vector<double> genome(genome_length(cfg), 0.0);
  for (std::size_t g = 3; g < genome.size(); g += 4) genome[g] = 60000.0;  // delta saturates to infinity quickly
  EvaluationPlan plan;
  plan.variants = {0};
  const auto report = evaluate_candidate(genome, cfg, task, plan, 1);
  EXPECT_TRUE(report.flagged);
  EXPECT_EQ(report.aggregate, task.spec().fitness_floor);
}

TEST(EvaluateCandidate, Deterministic) {
  PointMassDirectionTask task;
  const NetworkConfig cfg = network_for(task.spec(), 6);
  std::mt19937_64 rng(2);
  const auto genome = rule_to_genome(testing_support::random_rule(rng, cfg, 0.05), cfg);
  EvaluationPlan plan;
  plan.variants = {0, 30, 50};
  const auto a = evaluate_candidate(genome, cfg, task, plan, 11);
  const auto b = evaluate_candidate(genome, cfg, task, plan, 11);
  EXPECT_EQ(a.variant_returns, b.variant_returns);
  EXPECT_EQ(a.aggregate, b.aggregate);
  ASSERT_EQ(a.variant_returns.size(), 3u);
  EXPECT_DOUBLE_EQ(a.aggregate, (a.variant_returns[0] + a.variant_returns[1] + a.variant_returns[2]) / 3.0);
}

// -------------------------------------------------------------- training

TEST(TrainRule, ZeroGenerationsReturnsZeroRule) {
  TrainConfig tc = smoke_config();
  tc.generations = 0;
  const TrainResult r = train_rule(tc, point_mass());
  EXPECT_EQ(r.rule, PlasticityRule::zeros(tc.net));
  EXPECT_TRUE(r.state.history.empty());
}

TEST(TrainRule, SmokeRunBestSoFarIsMonotone) {
  const TrainConfig tc = smoke_config();
  std::ostringstream log;
  write_log_header(log);
  const TrainResult r = train_rule(tc, point_mass(), [&](const GenerationStats& s) { write_log_row(log, s); });
  ASSERT_EQ(r.state.history.size(), 5u);
  for (std::size_t g = 1; g < 5; ++g) {
    EXPECT_GE(r.state.history[g].best_so_far, r.state.history[g - 1].best_so_far);
    EXPECT_GE(r.state.history[g].best_so_far, r.state.history[g].best);
  }
  std::istringstream is(log.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "generation,best,mean,std");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 5u);
}

TEST(TrainRule, WorkerCountDoesNotChangeResults) {
  TrainConfig tc = smoke_config();
  tc.generations = 3;
  tc.workers = 1;
  const TrainResult serial = train_rule(tc, point_mass());
  tc.workers = 3;
  const TrainResult parallel = train_rule(tc, point_mass());
  EXPECT_EQ(serial.state.mu, parallel.state.mu);
  EXPECT_EQ(serial.state.sigma, parallel.state.sigma);
  EXPECT_EQ(serial.rule, parallel.rule);
  for (std::size_t g = 0; g < 3; ++g) {
    EXPECT_EQ(serial.state.history[g].mean, parallel.state.history[g].mean);
    EXPECT_EQ(serial.state.history[g].best, parallel.state.history[g].best);
  }
}

TEST(TrainRule, SigmaStaysPositive) {
  TrainConfig tc = smoke_config();
  tc.pepg.eta_sigma = 5.0;
  const TrainResult r = train_rule(tc, point_mass());
  for (double s : r.state.sigma) EXPECT_GE(s, tc.pepg.sigma_min);
}
