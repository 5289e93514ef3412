#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fflp/half.hpp"

namespace fflp {

/// One entry per neuron, each strictly 0 or 1.
using SpikeVector = std::vector<std::uint8_t>;

/// Three-layer network shape plus the neuron/trace constants. The membrane
/// time constant is fixed at 2 and is not part of the configuration.
struct NetworkConfig {
  std::uint32_t n_in = 1;
  std::uint32_t n_hidden = 1;
  std::uint32_t n_out = 1;
  Half v_th = kHalfOne;
  Half lambda = Half::from_bits(half_bits::kHalf);

  /// Throws std::invalid_argument unless every count is >= 1, v_th > 0 and 0 < lambda < 1.
  void validate() const;

  std::size_t synapse_count() const {
    return std::size_t{n_in} * n_hidden + std::size_t{n_hidden} * n_out;
  }

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Row-major [post][pre] matrix of Half values.
class HalfMatrix {
 public:
  HalfMatrix() = default;
  HalfMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  Half& operator()(std::size_t post, std::size_t pre) { return data_[post * cols_ + pre]; }
  Half operator()(std::size_t post, std::size_t pre) const { return data_[post * cols_ + pre]; }

  std::span<Half> values() { return data_; }
  std::span<const Half> values() const { return data_; }

  void fill(Half value);

  friend bool operator==(const HalfMatrix&, const HalfMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Half> data_;
};

struct SynapseCoefficients {
  Half alpha;
  Half beta;
  Half gamma;
  Half delta;
};

/// Per-synapse coefficient tensors for one weight matrix.
struct LayerRule {
  HalfMatrix alpha;
  HalfMatrix beta;
  HalfMatrix gamma;
  HalfMatrix delta;

  static LayerRule zeros(std::size_t n_post, std::size_t n_pre);

  SynapseCoefficients at(std::size_t post, std::size_t pre) const {
    return {alpha(post, pre), beta(post, pre), gamma(post, pre), delta(post, pre)};
  }
  std::size_t rows() const { return alpha.rows(); }
  std::size_t cols() const { return alpha.cols(); }

  friend bool operator==(const LayerRule&, const LayerRule&) = default;
};

/// The complete learned rule: one LayerRule per weight matrix (input->hidden,
/// hidden->output). The trace decay constant lives in NetworkConfig.
struct PlasticityRule {
  LayerRule input_hidden;
  LayerRule hidden_output;

  static PlasticityRule zeros(const NetworkConfig& config);
  /// Throws std::invalid_argument if the tensor shapes do not match `config`.
  void check_shape(const NetworkConfig& config) const;

  friend bool operator==(const PlasticityRule&, const PlasticityRule&) = default;
};

/// Neurons driven by a weight matrix: membrane potentials, spike trace and the
/// most recent spike vector.
struct Population {
  std::vector<Half> v;
  std::vector<Half> trace;
  SpikeVector spikes;

  static Population zeros(std::size_t n);
  std::size_t size() const { return v.size(); }

  friend bool operator==(const Population&, const Population&) = default;
};

/// Full mutable state of the network. The hidden trace is stored once and
/// serves as the post-trace of the first layer and the pre-trace of the second.
struct NetworkState {
  NetworkConfig config;
  HalfMatrix w_input_hidden;   // [n_hidden][n_in]
  HalfMatrix w_hidden_output;  // [n_out][n_hidden]
  std::vector<Half> input_trace;
  Population hidden;
  Population output;

  static NetworkState zeros(const NetworkConfig& config);

  /// Zero potentials, traces and spikes; weights are left untouched.
  void reset_activity();

  friend bool operator==(const NetworkState&, const NetworkState&) = default;
};

/// A weight matrix together with the traces on either side of it.
struct LayerView {
  HalfMatrix& weights;
  std::span<Half> pre_trace;
  Population& post;
  /// The input layer owns its presynaptic trace; deeper layers read the
  /// trace their presynaptic population already advanced.
  bool advances_pre_trace = false;
};

LayerView input_layer(NetworkState& net);
LayerView output_layer(NetworkState& net);

/// S(t) = lambda * S(t-1) + s(t).
Half trace_step(Half trace, bool spike, Half lambda);

struct LifResult {
  Half v;
  bool spike = false;
};

/// V(t) = V(t-1) + (I(t) - V(t-1)) / 2, spike when V >= v_th, hard reset to zero.
LifResult lif_step(Half v, Half i_in, Half v_th);

/// ((alpha*S_j*S_i + beta*S_j) + (gamma*S_i + delta)), every product rounded.
Half plasticity_delta(const SynapseCoefficients& c, Half pre_trace, Half post_trace);

/// Spike-gated current accumulation, LIF update and trace update for one layer.
/// Throws std::invalid_argument on a size mismatch or a non-binary spike
/// before touching any state.
SpikeVector forward_layer(LayerView layer, const SpikeVector& in_spikes, const NetworkConfig& config);

/// w_ij += plasticity_delta(rule_ij, S_j, S_i) for every synapse.
void plasticity_layer(LayerView layer, const LayerRule& rule);

/// L1 forward, L1 plasticity, L2 forward, L2 plasticity. Returns output spikes.
SpikeVector network_timestep(NetworkState& net, const PlasticityRule& rule, const SpikeVector& in_spikes);

/// FNV-1a over every stored bit pattern; used for regression vectors.
std::uint64_t state_hash(const NetworkState& net);

void check_spikes(const SpikeVector& spikes, std::size_t expected_size, const char* what);

}  // namespace fflp
