#include "fflp/coding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fflp {

std::size_t encoded_width(std::span<const FeatureSpec> features) {
  std::size_t n = 0;
  for (const auto& f : features) n += f.is_signed ? 2 : 1;
  return n;
}

std::size_t decoded_width(std::span<const ActionSpec> actions) {
  std::size_t n = 0;
  for (const auto& a : actions) n += a.is_signed ? 2 : 1;
  return n;
}

RateEncoder::RateEncoder(std::vector<FeatureSpec> features) : features_(std::move(features)) {
  for (const auto& f : features_) {
    if (!(f.bound > 0.0)) throw std::invalid_argument("feature bound must be positive: " + f.name);
  }
  n_inputs_ = encoded_width(features_);
}

std::vector<double> RateEncoder::probabilities(std::span<const double> observation) {
  if (observation.size() != features_.size()) throw std::invalid_argument("observation size mismatch");
  std::vector<double> p;
  p.reserve(n_inputs_);
  for (std::size_t k = 0; k < features_.size(); ++k) {
    const FeatureSpec& f = features_[k];
    const double lo = f.is_signed ? -1.0 : 0.0;
    double x = observation[k] / f.bound;
    if (!(x >= lo && x <= 1.0)) {
      ++clipped_;
      x = std::clamp(std::isnan(x) ? 0.0 : x, lo, 1.0);
    }
    if (f.is_signed) {
      p.push_back(std::max(x, 0.0));
      p.push_back(std::max(-x, 0.0));
    } else {
      p.push_back(x);
    }
  }
  return p;
}

SpikeVector RateEncoder::sample(std::span<const double> probabilities, std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SpikeVector s(probabilities.size());
  // One uniform draw per neuron, so the stream position does not depend on p.
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = u(rng) < probabilities[k] ? 1 : 0;
  return s;
}

SpikeVector RateEncoder::encode(std::span<const double> observation, std::mt19937_64& rng) {
  const std::vector<double> p = probabilities(observation);
  return sample(p, rng);
}

std::vector<double> spike_count_decode(std::span<const std::uint32_t> counts, std::uint32_t window,
                                       std::span<const ActionSpec> actions) {
  if (counts.size() != decoded_width(actions)) throw std::invalid_argument("spike count width mismatch");
  if (window == 0) throw std::invalid_argument("decode window must be positive");
  std::vector<double> out;
  out.reserve(actions.size());
  std::size_t k = 0;
  const double w = static_cast<double>(window);
  for (const auto& a : actions) {
    if (a.is_signed) {
      out.push_back((static_cast<double>(counts[k]) - static_cast<double>(counts[k + 1])) / w * a.bound);
      k += 2;
    } else {
      out.push_back(static_cast<double>(counts[k]) / w * a.bound);
      k += 1;
    }
  }
  return out;
}

}  // namespace fflp
