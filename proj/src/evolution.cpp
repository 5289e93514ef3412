#include "fflp/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace fflp {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

EvolutionState EvolutionState::initial(std::size_t genome_length, std::uint64_t seed, const PepgConfig& config) {
  if (!(config.sigma_init > 0.0) || !(config.sigma_min > 0.0)) throw std::invalid_argument("sigma must be positive");
  EvolutionState es;
  es.mu.assign(genome_length, 0.0);
  es.sigma.assign(genome_length, std::max(config.sigma_init, config.sigma_min));
  es.rng_seed = seed;
  return es;
}

void EvolutionState::check() const {
  if (mu.size() != sigma.size()) throw std::logic_error("mu/sigma length mismatch");
  for (double s : sigma)
    if (!(s > 0.0)) throw std::logic_error("sigma must stay positive");
}

SampledPopulation sample_population(const EvolutionState& es, std::size_t pop_size) {
  if (pop_size == 0 || pop_size % 2 != 0) throw std::invalid_argument("population size must be even and positive");
  es.check();
  std::mt19937_64 rng(mix(es.rng_seed ^ mix(es.generation)));
  std::normal_distribution<double> normal(0.0, 1.0);
  SampledPopulation p;
  for (std::size_t k = 0; k < pop_size / 2; ++k) {
    std::vector<double> eps(es.mu.size());
    for (std::size_t g = 0; g < eps.size(); ++g) eps[g] = es.sigma[g] * normal(rng);
    std::vector<double> plus(es.mu.size()), minus(es.mu.size());
    for (std::size_t g = 0; g < eps.size(); ++g) {
      plus[g] = es.mu[g] + eps[g];
      minus[g] = es.mu[g] - eps[g];
    }
    p.genomes.push_back(std::move(plus));
    p.genomes.push_back(std::move(minus));
    p.epsilon.push_back(std::move(eps));
  }
  return p;
}

std::vector<double> centered_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && values[order[hi]] == values[order[lo]]) ++hi;
    const double rank = 0.5 * static_cast<double>(lo + hi - 1);
    for (std::size_t k = lo; k < hi; ++k) out[order[k]] = rank / static_cast<double>(n - 1) - 0.5;
    lo = hi;
  }
  return out;
}

EvolutionState pepg_update(const EvolutionState& es, const std::vector<std::vector<double>>& epsilon,
                           const std::vector<MirroredFitness>& fitness, const PepgConfig& config) {
  es.check();
  if (epsilon.empty() || epsilon.size() != fitness.size()) throw std::invalid_argument("pair count mismatch");
  for (const auto& e : epsilon)
    if (e.size() != es.mu.size()) throw std::invalid_argument("perturbation length mismatch");

  const std::size_t pairs = fitness.size();
  std::vector<double> raw;
  raw.reserve(2 * pairs);
  for (const auto& f : fitness) {
    raw.push_back(f.plus);
    raw.push_back(f.minus);
  }
  const std::vector<double> shaped = centered_ranks(raw);
  double baseline = 0.0;
  for (double s : shaped) baseline += s;
  baseline /= static_cast<double>(shaped.size());

  EvolutionState next = es;
  const double inv = 1.0 / static_cast<double>(pairs);
  for (std::size_t g = 0; g < es.mu.size(); ++g) {
    const double sigma = es.sigma[g];
    double dmu = 0.0, dsigma = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
      const double fp = shaped[2 * k], fm = shaped[2 * k + 1];
      const double e = epsilon[k][g];
      dmu += (fp - fm) / 2.0 * e;
      dsigma += ((fp + fm) / 2.0 - baseline) * (e * e - sigma * sigma) / sigma;
    }
    next.mu[g] = es.mu[g] + config.eta_mu * (dmu * inv);
    next.sigma[g] = std::max(sigma + config.eta_sigma * (dsigma * inv), config.sigma_min);
  }
  ++next.generation;
  return next;
}

std::size_t genome_length(const NetworkConfig& config) { return 4 * config.synapse_count(); }

PlasticityRule genome_to_rule(const std::vector<double>& genome, const NetworkConfig& config) {
  if (genome.size() != genome_length(config)) throw std::invalid_argument("genome length does not match network");
  PlasticityRule rule = PlasticityRule::zeros(config);
  std::size_t g = 0;
  for (LayerRule* layer : {&rule.input_hidden, &rule.hidden_output}) {
    for (std::size_t i = 0; i < layer->rows(); ++i) {
      for (std::size_t j = 0; j < layer->cols(); ++j) {
        layer->alpha(i, j) = Half::from_double(genome[g++]);
        layer->beta(i, j) = Half::from_double(genome[g++]);
        layer->gamma(i, j) = Half::from_double(genome[g++]);
        layer->delta(i, j) = Half::from_double(genome[g++]);
      }
    }
  }
  return rule;
}

std::vector<double> rule_to_genome(const PlasticityRule& rule, const NetworkConfig& config) {
  rule.check_shape(config);
  std::vector<double> genome;
  genome.reserve(genome_length(config));
  for (const LayerRule* layer : {&rule.input_hidden, &rule.hidden_output}) {
    for (std::size_t i = 0; i < layer->rows(); ++i) {
      for (std::size_t j = 0; j < layer->cols(); ++j) {
        const SynapseCoefficients c = layer->at(i, j);
        for (Half h : {c.alpha, c.beta, c.gamma, c.delta}) genome.push_back(h.to_double());
      }
    }
  }
  return genome;
}

std::uint64_t episode_seed(std::uint64_t seed, std::size_t variant_index, std::size_t episode) {
  return mix(seed ^ mix(variant_index * 7919 + episode));
}

FitnessReport evaluate_candidate(const std::vector<double>& genome, const NetworkConfig& net, Environment& env,
                                 const EvaluationPlan& plan, std::uint64_t seed, std::size_t candidate) {
  if (plan.variants.empty() || plan.episodes_per_variant == 0) throw std::invalid_argument("empty evaluation plan");
  const PlasticityRule rule = genome_to_rule(genome, net);
  const NetworkState initial = NetworkState::zeros(net);
  FunctionalBackend backend;
  FitnessReport report;
  report.candidate = candidate;
  EpisodeConfig ec;
  ec.timesteps_per_step = plan.timesteps_per_step;
  ec.perturbation = plan.perturbation;
  for (std::size_t v = 0; v < plan.variants.size(); ++v) {
    double sum = 0.0;
    for (std::size_t e = 0; e < plan.episodes_per_variant; ++e) {
      ec.variant = plan.variants[v];
      ec.seed = episode_seed(seed, v, e);
      const EpisodeResult r = run_episode(env, backend, initial, rule, ec);
      if (r.non_finite || !std::isfinite(r.total_return)) report.flagged = true;
      sum += r.total_return;
    }
    report.variant_returns.push_back(sum / static_cast<double>(plan.episodes_per_variant));
  }
  if (report.flagged) {
    report.aggregate = env.spec().fitness_floor;
  } else {
    double total = 0.0;
    for (double r : report.variant_returns) total += r;
    report.aggregate = total / static_cast<double>(report.variant_returns.size());
  }
  return report;
}

namespace {

std::vector<FitnessReport> evaluate_population(const SampledPopulation& pop, const TrainConfig& config,
                                               const TaskFactory& make_env, std::uint64_t episode_seed) {
  std::vector<FitnessReport> reports(pop.genomes.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(std::max<std::size_t>(config.workers, 1));
  auto work = [&](std::size_t worker) {
    try {
      auto env = make_env();
      for (std::size_t c; (c = next.fetch_add(1)) < reports.size();) {
        reports[c] = evaluate_candidate(pop.genomes[c], config.net, *env, config.plan, episode_seed, c);
      }
    } catch (...) {
      errors[worker] = std::current_exception();
      next = reports.size();
    }
  };
  const std::size_t n_threads = std::min(errors.size(), reports.size());
  if (n_threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < n_threads; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

}  // namespace

TrainResult train_rule(const TrainConfig& config, const TaskFactory& make_env, const GenerationCallback& on_generation) {
  config.net.validate();
  EvolutionState es = EvolutionState::initial(genome_length(config.net), config.seed, config.pepg);
  if (config.generations > 0 && (config.pop_size == 0 || config.pop_size % 2 != 0)) {
    throw std::invalid_argument("population size must be even and positive");
  }
  const auto start = std::chrono::steady_clock::now();
  double best_so_far = -std::numeric_limits<double>::infinity();
  for (std::size_t gen = 0; gen < config.generations; ++gen) {
    const SampledPopulation pop = sample_population(es, config.pop_size);
    const std::uint64_t episode_seed = mix(config.seed ^ mix(0xE915ull + es.generation));
    const std::vector<FitnessReport> reports = evaluate_population(pop, config, make_env, episode_seed);

    std::vector<MirroredFitness> pairs(pop.epsilon.size());
    GenerationStats stats;
    stats.generation = es.generation;
    stats.best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      pairs[k] = {reports[2 * k].aggregate, reports[2 * k + 1].aggregate};
    }
    for (const auto& r : reports) {
      stats.best = std::max(stats.best, r.aggregate);
      stats.mean += r.aggregate;
      if (r.flagged) ++stats.flagged;
    }
    stats.mean /= static_cast<double>(reports.size());
    for (const auto& r : reports) stats.std += (r.aggregate - stats.mean) * (r.aggregate - stats.mean);
    stats.std = std::sqrt(stats.std / static_cast<double>(reports.size()));
    best_so_far = std::max(best_so_far, stats.best);
    stats.best_so_far = best_so_far;

    es = pepg_update(es, pop.epsilon, pairs, config.pepg);
    stats.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    es.history.push_back(stats);
    if (on_generation) on_generation(stats);
  }
  return {genome_to_rule(es.mu, config.net), std::move(es)};
}

void write_log_header(std::ostream& os) { os << "generation,best,mean,std\n"; }

void write_log_row(std::ostream& os, const GenerationStats& s) {
  os << s.generation << ',' << fmt(s.best_so_far) << ',' << fmt(s.mean) << ',' << fmt(s.std) << '\n';
}

}  // namespace fflp
