#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "fflp/snn.hpp"

namespace fflp {

/// Contents of an FFLP model file.
///
/// Layout (little-endian): "FFLP", u16 version, u32 n_in, u32 n_hidden,
/// u32 n_out, Half v_th, Half lambda, then for the input->hidden layer and
/// the hidden->output layer in turn: weights, alpha, beta, gamma, delta, each
/// a [post][pre] row-major array of Half.
struct ModelFile {
  NetworkConfig config;
  HalfMatrix w_input_hidden;
  HalfMatrix w_hidden_output;
  PlasticityRule rule;

  /// Zero weights and zero rule for `config`.
  static ModelFile zeros(const NetworkConfig& config);
  /// Zero-weight network carrying `rule`.
  static ModelFile from_rule(const NetworkConfig& config, const PlasticityRule& rule);
  /// Network state with these weights and all activity zeroed.
  NetworkState initial_state() const;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

inline constexpr std::uint16_t kModelFormatVersion = 1;

void write_model(std::ostream& os, const ModelFile& model);
/// Throws FormatError (with the byte offset) on bad magic, version, config or truncation.
ModelFile read_model(std::istream& is);

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

/// One 64-bit word per synapse, [post][pre] order: alpha in bits 0-15, beta
/// 16-31, gamma 32-47, delta 48-63. Mirrors the coefficient memory layout.
std::uint64_t pack_coefficients(const SynapseCoefficients& c);
SynapseCoefficients unpack_coefficients(std::uint64_t word);
std::vector<std::uint64_t> pack_layer_rule(const LayerRule& rule);
LayerRule unpack_layer_rule(std::span<const std::uint64_t> words, std::size_t n_post, std::size_t n_pre);

/// Interleaved coefficient export: both layers' packed words, little-endian.
void write_packed_coefficients(std::ostream& os, const PlasticityRule& rule);

}  // namespace fflp
