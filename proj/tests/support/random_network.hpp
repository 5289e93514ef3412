#pragma once

#include <random>

#include "fflp/snn.hpp"

namespace testing_support {

inline fflp::NetworkConfig random_config(std::mt19937_64& rng, std::uint32_t max_in, std::uint32_t max_hidden,
                                         std::uint32_t max_out) {
  std::uniform_int_distribution<std::uint32_t> n_in(1, max_in), n_hidden(1, max_hidden), n_out(1, max_out);
  std::uniform_real_distribution<double> lam(0.2, 0.9), vth(0.5, 2.0);
  fflp::NetworkConfig cfg;
  cfg.n_in = n_in(rng);
  cfg.n_hidden = n_hidden(rng);
  cfg.n_out = n_out(rng);
  cfg.lambda = fflp::Half::from_double(lam(rng));
  cfg.v_th = fflp::Half::from_double(vth(rng));
  return cfg;
}

inline fflp::SpikeVector random_spikes(std::mt19937_64& rng, std::size_t n, double p) {
  std::bernoulli_distribution b(p);
  fflp::SpikeVector s(n);
  for (auto& x : s) x = b(rng) ? 1 : 0;
  return s;
}

inline void fill_normal(std::mt19937_64& rng, std::span<fflp::Half> xs, double sd) {
  std::normal_distribution<double> g(0.0, sd);
  for (auto& x : xs) x = fflp::Half::from_double(g(rng));
}

inline fflp::NetworkState random_state(std::mt19937_64& rng, const fflp::NetworkConfig& cfg) {
  fflp::NetworkState net = fflp::NetworkState::zeros(cfg);
  fill_normal(rng, net.w_input_hidden.values(), 0.6);
  fill_normal(rng, net.w_hidden_output.values(), 0.6);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  for (auto& x : net.input_trace) x = fflp::Half::from_double(u(rng));
  for (fflp::Population* p : {&net.hidden, &net.output}) {
    for (auto& x : p->v) x = fflp::Half::from_double(u(rng) - 0.5);
    for (auto& x : p->trace) x = fflp::Half::from_double(u(rng));
    p->spikes = random_spikes(rng, p->size(), 0.3);
  }
  return net;
}

inline fflp::PlasticityRule random_rule(std::mt19937_64& rng, const fflp::NetworkConfig& cfg, double sd) {
  fflp::PlasticityRule rule = fflp::PlasticityRule::zeros(cfg);
  for (fflp::LayerRule* l : {&rule.input_hidden, &rule.hidden_output}) {
    for (fflp::HalfMatrix* m : {&l->alpha, &l->beta, &l->gamma, &l->delta}) fill_normal(rng, m->values(), sd);
  }
  return rule;
}

}  // namespace testing_support
