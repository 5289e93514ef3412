#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fflp/runner.hpp"
#include "fflp/snn.hpp"
#include "fflp/tasks.hpp"

namespace fflp {

/// Search hyperparameters for PEPG.
struct PepgConfig {
  double sigma_init = 0.05;
  double eta_mu = 0.2;
  double eta_sigma = 0.1;
  double sigma_min = 1e-3;
};

struct GenerationStats {
  std::uint64_t generation = 0;
  double best = 0.0;  // best aggregate fitness in this generation
  double mean = 0.0;
  double std = 0.0;
  double best_so_far = 0.0;
  std::size_t flagged = 0;  // candidates whose state diverged
  double wallclock_s = 0.0;
};

/// Search distribution over the plasticity genome: independent normals with
/// mean `mu` and standard deviation `sigma`, one per coefficient.
struct EvolutionState {
  std::vector<double> mu;
  std::vector<double> sigma;
  std::uint64_t generation = 0;
  std::uint64_t rng_seed = 0;
  std::vector<GenerationStats> history;

  static EvolutionState initial(std::size_t genome_length, std::uint64_t seed, const PepgConfig& config = {});
  /// Throws std::logic_error if lengths differ or any sigma is not positive.
  void check() const;
};

struct SampledPopulation {
  /// One perturbation per mirrored pair.
  std::vector<std::vector<double>> epsilon;
  /// genomes[2k] = mu + epsilon[k], genomes[2k + 1] = mu - epsilon[k].
  std::vector<std::vector<double>> genomes;
};

/// Draws pop_size / 2 perturbations from N(0, sigma^2), reproducible from
/// (rng_seed, generation). Throws std::invalid_argument for odd or zero sizes.
SampledPopulation sample_population(const EvolutionState& es, std::size_t pop_size);

struct MirroredFitness {
  double plus = 0.0;
  double minus = 0.0;
};

/// Centered ranks in [-0.5, 0.5]; tied values share their mean rank.
std::vector<double> centered_ranks(const std::vector<double>& values);

/// One PEPG step from raw pair fitness. Fitness is rank-shaped over the whole
/// population and the baseline is the population mean of the shaped fitness.
/// Sums run in pair order. Advances the generation counter; history is left
/// to the caller.
EvolutionState pepg_update(const EvolutionState& es, const std::vector<std::vector<double>>& epsilon,
                           const std::vector<MirroredFitness>& fitness, const PepgConfig& config);

/// Genome layout: per synapse (alpha, beta, gamma, delta), synapses in
/// [post][pre] order, input->hidden layer first.
std::size_t genome_length(const NetworkConfig& config);
PlasticityRule genome_to_rule(const std::vector<double>& genome, const NetworkConfig& config);
std::vector<double> rule_to_genome(const PlasticityRule& rule, const NetworkConfig& config);

using TaskFactory = std::function<std::unique_ptr<Environment>()>;

/// How a candidate is scored.
struct EvaluationPlan {
  std::vector<std::size_t> variants;
  std::size_t episodes_per_variant = 1;
  std::uint32_t timesteps_per_step = 16;
  std::optional<Perturbation> perturbation;
};

struct FitnessReport {
  std::size_t candidate = 0;
  /// Mean episode return per entry of EvaluationPlan::variants.
  std::vector<double> variant_returns;
  double aggregate = 0.0;
  /// Some episode left a NaN or infinite value in the network; the aggregate
  /// is then the task's fitness floor.
  bool flagged = false;
};

/// Seed of episode `episode` of the `variant_index`-th plan variant.
std::uint64_t episode_seed(std::uint64_t seed, std::size_t variant_index, std::size_t episode);

/// Runs the plan from zero weights with `genome` as the rule. Episode seeds
/// derive from `seed` only, so candidates sharing a seed face the same
/// episodes.
FitnessReport evaluate_candidate(const std::vector<double>& genome, const NetworkConfig& net, Environment& env,
                                 const EvaluationPlan& plan, std::uint64_t seed, std::size_t candidate = 0);

struct TrainConfig {
  NetworkConfig net;
  PepgConfig pepg;
  EvaluationPlan plan;
  std::size_t generations = 0;
  std::size_t pop_size = 16;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct TrainResult {
  PlasticityRule rule;
  EvolutionState state;
};

/// Called after every generation, e.g. to append to the training log.
using GenerationCallback = std::function<void(const GenerationStats&)>;

/// sample -> evaluate -> update for the requested generations and returns mu
/// as a rule. Results do not depend on `workers`.
TrainResult train_rule(const TrainConfig& config, const TaskFactory& make_env, const GenerationCallback& on_generation = {});

/// Training log: generation,best,mean,std where best is the best
/// fitness seen so far.
void write_log_header(std::ostream& os);
void write_log_row(std::ostream& os, const GenerationStats& stats);

}  // namespace fflp
