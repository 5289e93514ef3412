#include "fflp/accel/hardware.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fflp::accel {

void HardwareConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("hardware.") + field + ' ' + what);
  };
  require(pe_count >= 1, "pe_count", "must be at least 1");
  require(std::isfinite(clock_mhz) && clock_mhz > 0.0, "clock_mhz", "must be positive");
  require(plasticity_lanes >= 1, "plasticity_lanes", "must be at least 1");
  require(param_pack_width == 4, "param_pack_width", "must be 4 (alpha, beta, gamma, delta)");
  require(ports_per_bank >= 2, "ports_per_bank", "must be at least 2");
  require(read_latency + writeback_latency >= 1, "read_latency", "plus writeback_latency must be at least 1");
}

std::vector<std::string> HardwareConfig::assumptions() const {
  std::vector<std::string> out;
  auto add = [&out](auto&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    out.push_back(os.str());
  };
  add(pe_count, " processing elements at ", clock_mhz, " MHz; every memory line holds one word per PE");
  add("postsynaptic neurons are tiled onto PEs with stride ", pe_count, " (neuron k*P+p lives on PE p)");
  add("stage latencies: read ", read_latency, ", add ", add_latency, ", mul ", mul_latency, ", adder tree ",
      adder_tree_stages, ", writeback ", writeback_latency, ", LIF ", neuron_latency, ", trace ", trace_latency,
      " cycles");
  add("forward engine fetches one weight line per cycle and only for spiking inputs");
  add("plasticity engine evaluates ", plasticity_lanes, " synapses per cycle (four products each), ",
      "one packed coefficient word per synapse, pipeline depth ", plasticity_pipeline_latency(), " cycles");
  add("no value gating in the plasticity engine: every synapse is visited every timestep");
  add("banks: W and packed coefficients per layer, membrane potentials per layer, one shared trace bank; ",
      ports_per_bank, " ports each; writes take priority over reads in the same cycle");
  add("no off-chip traffic, host I/O or spike encoding is modelled");
  return out;
}

}  // namespace fflp::accel
