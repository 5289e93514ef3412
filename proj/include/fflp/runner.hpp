#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fflp/snn.hpp"
#include "fflp/tasks.hpp"

namespace fflp {

/// Something that advances a plastic network by one timestep. The functional
/// model and the cycle-level simulator both implement it.
class NetworkBackend {
 public:
  virtual ~NetworkBackend() = default;
  virtual void load(const NetworkState& initial, const PlasticityRule& rule) = 0;
  virtual SpikeVector timestep(const SpikeVector& in_spikes) = 0;
  virtual NetworkState snapshot() const = 0;
  virtual std::string name() const = 0;
};

class FunctionalBackend final : public NetworkBackend {
 public:
  void load(const NetworkState& initial, const PlasticityRule& rule) override;
  SpikeVector timestep(const SpikeVector& in_spikes) override;
  NetworkState snapshot() const override { return state_; }
  std::string name() const override { return "functional"; }
  const NetworkState& state() const { return state_; }

 private:
  NetworkState state_;
  PlasticityRule rule_;
};

struct EpisodeConfig {
  std::uint64_t seed = 0;
  std::size_t variant = 0;
  /// SNN timesteps per control step; also the spike-count decode window.
  std::uint32_t timesteps_per_step = 16;
  /// Stop after this many control steps (0 = the task's episode length).
  std::size_t max_steps = 0;
  std::optional<Perturbation> perturbation;
  bool record = false;
};

struct EpisodeResult {
  double total_return = 0.0;
  std::vector<double> rewards;
  /// Present when EpisodeConfig::record is set: observation seen before each
  /// step and the action taken.
  std::vector<std::vector<double>> observations;
  std::vector<std::vector<double>> actions;
  /// Some weight, potential or trace became NaN or infinite.
  bool non_finite = false;
  std::uint64_t clipped_observations = 0;
  std::uint64_t final_state_hash = 0;
  std::uint64_t snn_timesteps = 0;
};

/// Runs one episode from `initial` with online plasticity. The encoder stream
/// is seeded from (seed, variant).
EpisodeResult run_episode(Environment& env, NetworkBackend& backend, const NetworkState& initial,
                          const PlasticityRule& rule, const EpisodeConfig& config);

/// Network shape for `task` with the given hidden width.
NetworkConfig network_for(const TaskSpec& task, std::uint32_t n_hidden);

bool has_non_finite(const NetworkState& state);

/// Header: step, one column per observation feature, one per action, reward.
void write_episode_csv(std::ostream& os, const TaskSpec& task, const EpisodeResult& result);

/// Normalized reaching progress for each step: 1 - d / d0 where d0 is the
/// distance at the start of that step's goal segment.
std::vector<double> reaching_progress(const EpisodeResult& result, std::size_t segment_length);

struct RecoveryReport {
  double pre = 0.0;
  double post = 0.0;
  /// post / pre, or 0 when the pre-perturbation score is not positive.
  double fraction = 0.0;
};

/// Mean progress over [at - 100, at) versus the window [at + 150, at + 200).
RecoveryReport recovery(const std::vector<double>& progress, std::size_t at_step);

}  // namespace fflp
