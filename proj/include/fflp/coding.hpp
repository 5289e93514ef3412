#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fflp/snn.hpp"

namespace fflp {

/// One observation feature. Signed features are scaled by `bound` into
/// [-1, 1] and drive an antithetic pair of input neurons (positive part,
/// negative part); unsigned features are scaled from [0, bound] into [0, 1]
/// and drive a single neuron.
struct FeatureSpec {
  std::string name;
  double bound = 1.0;
  bool is_signed = true;
};

/// One action channel. Signed actions are decoded from an antithetic pair of
/// output neurons as (rate+ - rate-) * bound; unsigned ones as rate * bound.
struct ActionSpec {
  std::string name;
  double bound = 1.0;
  bool is_signed = true;
};

std::size_t encoded_width(std::span<const FeatureSpec> features);
std::size_t decoded_width(std::span<const ActionSpec> actions);

/// Bernoulli rate coder. Stateless apart from the clipping diagnostic.
class RateEncoder {
 public:
  explicit RateEncoder(std::vector<FeatureSpec> features);

  std::size_t n_inputs() const { return n_inputs_; }
  const std::vector<FeatureSpec>& features() const { return features_; }

  /// Spike probabilities for one observation; out-of-range values are
  /// clipped and counted.
  std::vector<double> probabilities(std::span<const double> observation);

  /// One timestep of spikes drawn from `rng`.
  SpikeVector encode(std::span<const double> observation, std::mt19937_64& rng);
  SpikeVector sample(std::span<const double> probabilities, std::mt19937_64& rng) const;

  std::uint64_t clipped_count() const { return clipped_; }

 private:
  std::vector<FeatureSpec> features_;
  std::size_t n_inputs_ = 0;
  std::uint64_t clipped_ = 0;
};

/// Map per-neuron spike counts over a window of `window` timesteps to actions.
std::vector<double> spike_count_decode(std::span<const std::uint32_t> counts, std::uint32_t window,
                                       std::span<const ActionSpec> actions);

}  // namespace fflp
