#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fflp::accel {

/// Architectural parameters of the cycle model. Latencies are in cycles.
struct HardwareConfig {
  std::uint32_t pe_count = 16;
  double clock_mhz = 200.0;
  std::uint32_t read_latency = 1;
  std::uint32_t add_latency = 1;
  std::uint32_t mul_latency = 1;
  std::uint32_t adder_tree_stages = 2;
  std::uint32_t writeback_latency = 1;
  /// LIF datapath: subtract, halve, add, compare.
  std::uint32_t neuron_latency = 2;
  /// Trace datapath: decay multiply and spike add.
  std::uint32_t trace_latency = 2;
  /// Synapses whose four terms the plasticity datapath evaluates per cycle.
  std::uint32_t plasticity_lanes = 4;
  /// Coefficients delivered by one coefficient-memory access.
  std::uint32_t param_pack_width = 4;
  std::uint32_t ports_per_bank = 2;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Latency of one synapse-line update from coefficient fetch to weight
  /// writeback: read, two chained multiplies for the alpha term, the adder
  /// tree, the weight accumulate and writeback.
  std::uint32_t plasticity_pipeline_latency() const {
    return read_latency + 2 * mul_latency + adder_tree_stages + add_latency + writeback_latency;
  }

  /// Human-readable modelling assumptions, printed with latency reports.
  std::vector<std::string> assumptions() const;
};

}  // namespace fflp::accel
