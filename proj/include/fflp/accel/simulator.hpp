#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fflp/accel/hardware.hpp"
#include "fflp/accel/memory.hpp"
#include "fflp/accel/trace.hpp"
#include "fflp/runner.hpp"
#include "fflp/snn.hpp"

namespace fflp::accel {

/// No engine made progress for a full bank scan. The message lists the
/// blocked requests.
class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScheduleMode : std::uint8_t {
  /// Prologue F1(0); then per timestep Phase A = U1(t) | F2(t) and
  /// Phase B = U2(t) | F1(t+1); epilogue U2 of the last timestep.
  overlapped,
  /// F1, U1, F2, U2 one after another; the no-overlap baseline.
  serialized,
};

/// Address-versioning monitor results. A read is stale when its line has
/// fewer committed writes than the reader's timestep requires, and
/// overwritten when it already carries a write the reader must not see.
struct MonitorReport {
  std::uint64_t checked_reads = 0;
  std::uint64_t stale_reads = 0;
  std::uint64_t overwritten_reads = 0;
  std::vector<std::string> first_violations;
};

/// Cycle-level model of the dual-engine accelerator. Bank contents are the
/// real Half bit patterns, so the final state can be compared bit for bit
/// with the functional model.
class Simulator {
 public:
  Simulator(const HardwareConfig& hw, const NetworkState& initial, const PlasticityRule& rule,
            ScheduleMode mode = ScheduleMode::overlapped, bool keep_records = false);
  ~Simulator();
  Simulator(const Simulator&);
  Simulator& operator=(const Simulator&);

  /// Feeds the input spikes of the next timestep and runs until that
  /// timestep's output spikes are known.
  SpikeVector step(const SpikeVector& in_spikes);
  /// Runs the outstanding epilogue; idempotent.
  void finish();
  /// Feeds a whole stream and finishes it. Returns the output spikes per timestep.
  std::vector<SpikeVector> run(const std::vector<SpikeVector>& inputs);

  /// Network state held in the banks. Requires finish() after the last step.
  NetworkState state() const;
  bool finished() const;

  const CycleTrace& trace() const;
  const MonitorReport& monitor() const;
  std::uint64_t cycle() const;
  std::uint64_t timesteps() const;
  const HardwareConfig& hardware() const;

  /// Bank introspection for tests.
  const MemoryBank& bank(BankId id) const;
  /// Fault injection: marks a trace line as owed to a reader that never
  /// comes, so the next forward write to it blocks.
  void inject_stuck_trace_line(std::uint32_t line);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Weight lines read by the forward engines for a stream: spiking
/// presynaptic neurons times postsynaptic tiles, summed over both layers.
std::uint64_t expected_weight_fetches(const NetworkState& initial, const std::vector<SpikeVector>& inputs,
                                      const std::vector<SpikeVector>& hidden_spikes, std::uint32_t pe_count);

/// The simulator behind the episode runner's backend interface.
class CycleBackend final : public NetworkBackend {
 public:
  explicit CycleBackend(HardwareConfig hw = {}, ScheduleMode mode = ScheduleMode::overlapped);
  void load(const NetworkState& initial, const PlasticityRule& rule) override;
  SpikeVector timestep(const SpikeVector& in_spikes) override;
  /// Runs the epilogue on a copy, so the stream can continue afterwards.
  NetworkState snapshot() const override;
  std::string name() const override { return "cycle"; }

  const Simulator& simulator() const;
  /// Finishes the stream and returns the simulator.
  Simulator& finished_simulator();

 private:
  HardwareConfig hw_;
  ScheduleMode mode_;
  std::unique_ptr<Simulator> sim_;
};

}  // namespace fflp::accel
