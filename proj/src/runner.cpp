#include "fflp/runner.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "fflp/coding.hpp"

namespace fflp {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

bool finite_all(std::span<const Half> xs) {
  for (Half h : xs)
    if (h.is_nan() || h.is_inf()) return false;
  return true;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void FunctionalBackend::load(const NetworkState& initial, const PlasticityRule& rule) {
  initial.config.validate();
  rule.check_shape(initial.config);
  state_ = initial;
  rule_ = rule;
}

SpikeVector FunctionalBackend::timestep(const SpikeVector& in_spikes) {
  return network_timestep(state_, rule_, in_spikes);
}

NetworkConfig network_for(const TaskSpec& task, std::uint32_t n_hidden) {
  NetworkConfig c;
  c.n_in = task.n_inputs();
  c.n_hidden = n_hidden;
  c.n_out = task.n_outputs();
  return c;
}

bool has_non_finite(const NetworkState& s) {
  return !(finite_all(s.w_input_hidden.values()) && finite_all(s.w_hidden_output.values()) &&
           finite_all(s.input_trace) && finite_all(s.hidden.v) && finite_all(s.hidden.trace) &&
           finite_all(s.output.v) && finite_all(s.output.trace));
}

EpisodeResult run_episode(Environment& env, NetworkBackend& backend, const NetworkState& initial,
                          const PlasticityRule& rule, const EpisodeConfig& config) {
  const TaskSpec& task = env.spec();
  if (initial.config.n_in != task.n_inputs() || initial.config.n_out != task.n_outputs()) {
    throw std::invalid_argument(task.name + ": network needs " + std::to_string(task.n_inputs()) + " inputs and " +
                                std::to_string(task.n_outputs()) + " outputs");
  }
  if (config.timesteps_per_step == 0) throw std::invalid_argument("timesteps_per_step must be positive");

  backend.load(initial, rule);
  env.set_perturbation(config.perturbation);
  RateEncoder encoder(task.features);
  std::mt19937_64 rng(splitmix(config.seed ^ splitmix(config.variant + 1)));

  EpisodeResult r;
  std::vector<double> obs = env.reset(config.seed, config.variant);
  const std::size_t steps = config.max_steps == 0 ? task.episode_length : std::min(config.max_steps, task.episode_length);
  std::vector<std::uint32_t> counts(task.n_outputs());
  for (std::size_t step = 0; step < steps; ++step) {
    const std::vector<double> probs = encoder.probabilities(obs);
    std::fill(counts.begin(), counts.end(), 0u);
    for (std::uint32_t t = 0; t < config.timesteps_per_step; ++t) {
      const SpikeVector out = backend.timestep(encoder.sample(probs, rng));
      for (std::size_t k = 0; k < out.size(); ++k) counts[k] += out[k];
    }
    r.snn_timesteps += config.timesteps_per_step;
    std::vector<double> action = spike_count_decode(counts, config.timesteps_per_step, task.actions);
    StepResult sr = env.step(action);
    r.total_return += sr.reward;
    r.rewards.push_back(sr.reward);
    if (config.record) {
      r.observations.push_back(std::move(obs));
      r.actions.push_back(std::move(action));
    }
    obs = std::move(sr.observation);
    if (sr.done) break;
  }
  r.clipped_observations = encoder.clipped_count();
  const NetworkState final_state = backend.snapshot();
  r.non_finite = has_non_finite(final_state);
  r.final_state_hash = state_hash(final_state);
  return r;
}

void write_episode_csv(std::ostream& os, const TaskSpec& task, const EpisodeResult& result) {
  if (result.observations.size() != result.rewards.size()) {
    throw std::invalid_argument("episode was not recorded");
  }
  os << "step";
  for (const auto& f : task.features) os << ',' << f.name;
  for (const auto& a : task.actions) os << ',' << a.name;
  os << ",reward\n";
  for (std::size_t i = 0; i < result.rewards.size(); ++i) {
    os << i;
    for (double x : result.observations[i]) os << ',' << format_double(x);
    for (double x : result.actions[i]) os << ',' << format_double(x);
    os << ',' << format_double(result.rewards[i]) << '\n';
  }
}

std::vector<double> reaching_progress(const EpisodeResult& result, std::size_t segment_length) {
  if (result.observations.size() != result.rewards.size()) throw std::invalid_argument("episode was not recorded");
  std::vector<double> p(result.rewards.size());
  double d0 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    // The first two observation features are the goal error vector.
    if (i % segment_length == 0) d0 = std::hypot(result.observations[i][0], result.observations[i][1]);
    p[i] = d0 > 0.0 ? 1.0 + result.rewards[i] / d0 : 0.0;
  }
  return p;
}

RecoveryReport recovery(const std::vector<double>& progress, std::size_t at_step) {
  if (at_step < 100 || at_step + 200 > progress.size()) throw std::invalid_argument("recovery windows out of range");
  const auto mean = [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += progress[i];
    return s / static_cast<double>(hi - lo);
  };
  RecoveryReport r;
  r.pre = mean(at_step - 100, at_step);
  r.post = mean(at_step + 150, at_step + 200);
  r.fraction = r.pre > 0.0 ? r.post / r.pre : 0.0;
  return r;
}

}  // namespace fflp
