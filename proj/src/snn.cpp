#include "fflp/snn.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fflp {

void NetworkConfig::validate() const {
  if (n_in == 0 || n_hidden == 0 || n_out == 0) {
    throw std::invalid_argument("network dimensions must all be >= 1");
  }
  if (!(v_th.to_double() > 0.0)) throw std::invalid_argument("v_th must be > 0");
  const double l = lambda.to_double();
  if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
}

void HalfMatrix::fill(Half value) { std::fill(data_.begin(), data_.end(), value); }

LayerRule LayerRule::zeros(std::size_t n_post, std::size_t n_pre) {
  return {HalfMatrix(n_post, n_pre), HalfMatrix(n_post, n_pre), HalfMatrix(n_post, n_pre),
          HalfMatrix(n_post, n_pre)};
}

PlasticityRule PlasticityRule::zeros(const NetworkConfig& config) {
  return {LayerRule::zeros(config.n_hidden, config.n_in), LayerRule::zeros(config.n_out, config.n_hidden)};
}

namespace {

void check_layer_rule(const LayerRule& r, std::size_t rows, std::size_t cols, const char* name) {
  for (const HalfMatrix* m : {&r.alpha, &r.beta, &r.gamma, &r.delta}) {
    if (m->rows() != rows || m->cols() != cols) {
      throw std::invalid_argument(std::string("plasticity rule shape mismatch in ") + name);
    }
  }
}

}  // namespace

void PlasticityRule::check_shape(const NetworkConfig& config) const {
  check_layer_rule(input_hidden, config.n_hidden, config.n_in, "input->hidden");
  check_layer_rule(hidden_output, config.n_out, config.n_hidden, "hidden->output");
}

Population Population::zeros(std::size_t n) {
  return {std::vector<Half>(n), std::vector<Half>(n), SpikeVector(n, 0)};
}

NetworkState NetworkState::zeros(const NetworkConfig& config) {
  config.validate();
  NetworkState net;
  net.config = config;
  net.w_input_hidden = HalfMatrix(config.n_hidden, config.n_in);
  net.w_hidden_output = HalfMatrix(config.n_out, config.n_hidden);
  net.input_trace.assign(config.n_in, kHalfZero);
  net.hidden = Population::zeros(config.n_hidden);
  net.output = Population::zeros(config.n_out);
  return net;
}

void NetworkState::reset_activity() {
  std::fill(input_trace.begin(), input_trace.end(), kHalfZero);
  for (Population* p : {&hidden, &output}) {
    std::fill(p->v.begin(), p->v.end(), kHalfZero);
    std::fill(p->trace.begin(), p->trace.end(), kHalfZero);
    std::fill(p->spikes.begin(), p->spikes.end(), std::uint8_t{0});
  }
}

LayerView input_layer(NetworkState& net) {
  return {net.w_input_hidden, net.input_trace, net.hidden, true};
}

LayerView output_layer(NetworkState& net) {
  return {net.w_hidden_output, net.hidden.trace, net.output, false};
}

Half trace_step(Half trace, bool spike, Half lambda) {
  return add(mul(lambda, trace), spike ? kHalfOne : kHalfZero);
}

LifResult lif_step(Half v, Half i_in, Half v_th) {
  const Half v_mid = add(v, halve(add(i_in, neg(v))));
  if (greater_equal(v_mid, v_th)) return {kHalfZero, true};
  return {v_mid, false};
}

Half plasticity_delta(const SynapseCoefficients& c, Half pre_trace, Half post_trace) {
  const Half t_alpha = mul(mul(c.alpha, pre_trace), post_trace);
  const Half t_beta = mul(c.beta, pre_trace);
  const Half t_gamma = mul(c.gamma, post_trace);
  return add(add(t_alpha, t_beta), add(t_gamma, c.delta));
}

void check_spikes(const SpikeVector& spikes, std::size_t expected_size, const char* what) {
  if (spikes.size() != expected_size) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(expected_size) +
                                " spikes, got " + std::to_string(spikes.size()));
  }
  for (std::uint8_t s : spikes) {
    if (s > 1) throw std::invalid_argument(std::string(what) + ": spike values must be 0 or 1");
  }
}

namespace {

void check_layer_shape(const LayerView& layer) {
  const std::size_t n_post = layer.weights.rows();
  const std::size_t n_pre = layer.weights.cols();
  if (layer.pre_trace.size() != n_pre || layer.post.v.size() != n_post || layer.post.trace.size() != n_post ||
      layer.post.spikes.size() != n_post) {
    throw std::invalid_argument("layer state dimensions disagree with the weight matrix");
  }
}

}  // namespace

SpikeVector forward_layer(LayerView layer, const SpikeVector& in_spikes, const NetworkConfig& config) {
  check_layer_shape(layer);
  check_spikes(in_spikes, layer.weights.cols(), "forward_layer input");

  const std::size_t n_post = layer.weights.rows();
  const std::size_t n_pre = layer.weights.cols();
  for (std::size_t i = 0; i < n_post; ++i) {
    Half current = kHalfZero;
    for (std::size_t j = 0; j < n_pre; ++j) current = fused_psum(current, layer.weights(i, j), in_spikes[j] != 0);
    const LifResult r = lif_step(layer.post.v[i], current, config.v_th);
    layer.post.v[i] = r.v;
    layer.post.spikes[i] = r.spike ? 1 : 0;
  }
  if (layer.advances_pre_trace) {
    for (std::size_t j = 0; j < n_pre; ++j) {
      layer.pre_trace[j] = trace_step(layer.pre_trace[j], in_spikes[j] != 0, config.lambda);
    }
  }
  for (std::size_t i = 0; i < n_post; ++i) {
    layer.post.trace[i] = trace_step(layer.post.trace[i], layer.post.spikes[i] != 0, config.lambda);
  }
  return layer.post.spikes;
}

void plasticity_layer(LayerView layer, const LayerRule& rule) {
  check_layer_shape(layer);
  const std::size_t n_post = layer.weights.rows();
  const std::size_t n_pre = layer.weights.cols();
  if (rule.rows() != n_post || rule.cols() != n_pre) {
    throw std::invalid_argument("plasticity rule shape disagrees with the weight matrix");
  }
  for (std::size_t i = 0; i < n_post; ++i) {
    const Half post = layer.post.trace[i];
    for (std::size_t j = 0; j < n_pre; ++j) {
      layer.weights(i, j) = add(layer.weights(i, j), plasticity_delta(rule.at(i, j), layer.pre_trace[j], post));
    }
  }
}

SpikeVector network_timestep(NetworkState& net, const PlasticityRule& rule, const SpikeVector& in_spikes) {
  rule.check_shape(net.config);
  check_spikes(in_spikes, net.config.n_in, "network input");
  const SpikeVector hidden = forward_layer(input_layer(net), in_spikes, net.config);
  plasticity_layer(input_layer(net), rule.input_hidden);
  SpikeVector out = forward_layer(output_layer(net), hidden, net.config);
  plasticity_layer(output_layer(net), rule.hidden_output);
  return out;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ull;
  void byte(std::uint8_t b) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  void half(Half x) {
    byte(static_cast<std::uint8_t>(x.bits() & 0xFF));
    byte(static_cast<std::uint8_t>(x.bits() >> 8));
  }
  void halves(std::span<const Half> xs) {
    for (Half x : xs) half(x);
  }
};

}  // namespace

std::uint64_t state_hash(const NetworkState& net) {
  Fnv1a f;
  f.halves(net.w_input_hidden.values());
  f.halves(net.w_hidden_output.values());
  f.halves(net.input_trace);
  for (const Population* p : {&net.hidden, &net.output}) {
    f.halves(p->v);
    f.halves(p->trace);
    for (std::uint8_t s : p->spikes) f.byte(s);
  }
  return f.h;
}

}  // namespace fflp
