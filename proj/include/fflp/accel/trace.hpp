#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fflp/accel/hardware.hpp"

namespace fflp::accel {

enum class Engine : std::uint8_t { F1, U1, F2, U2 };
inline constexpr int kEngineCount = 4;

enum class Stage : std::uint8_t { psum, neuron, trace, preload, pretrace, update };

enum class OpKind : std::uint8_t { read, write, stall, busy };

enum class StallReason : std::uint8_t { none, port_busy, write_priority, raw_wait, war_wait };

enum class BankId : std::uint8_t { none, W1, W2, C1, C2, V1, V2, T };

const char* to_string(Engine e);
const char* to_string(Stage s);
const char* to_string(OpKind k);
const char* to_string(StallReason r);
const char* to_string(BankId b);

/// One architectural event: a granted read, a committed write, a stalled
/// request, or a cycle in which an active engine only advanced its pipeline.
struct TraceRecord {
  std::uint64_t cycle = 0;
  Engine engine = Engine::F1;
  Stage stage = Stage::psum;
  OpKind op = OpKind::busy;
  BankId bank = BankId::none;
  std::uint32_t addr = 0;
  StallReason reason = StallReason::none;

  int layer() const { return engine == Engine::F1 || engine == Engine::U1 ? 1 : 2; }
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct TraceCounters {
  std::uint64_t total_cycles = 0;
  /// Engine-cycles with at least one stalled request.
  std::uint64_t stall_cycles = 0;
  /// Cycles in which two or more engines were active.
  std::uint64_t overlap_cycles = 0;
  /// Forward-engine weight line reads.
  std::uint64_t weight_fetches = 0;
  std::uint64_t stalls_by_reason[5] = {};

  friend bool operator==(const TraceCounters&, const TraceCounters&) = default;
};

/// Start and end cycle of every engine job, per timestep.
struct JobSpan {
  Engine engine = Engine::F1;
  std::uint64_t timestep = 0;
  std::uint64_t start = 0;
  std::uint64_t end = 0;  // last active cycle
  std::uint64_t cycles() const { return end - start + 1; }
};

/// Counters are always maintained; per-event records only when enabled.
class CycleTrace {
 public:
  explicit CycleTrace(bool keep_records = false) : keep_records_(keep_records) {}

  bool keeps_records() const { return keep_records_; }
  const std::vector<TraceRecord>& records() const { return records_; }
  const TraceCounters& counters() const { return counters_; }
  const std::vector<JobSpan>& jobs() const { return jobs_; }

  void add(const TraceRecord& r);
  /// Closes the bookkeeping for one cycle given which engines were active.
  void end_cycle(std::uint64_t cycle, unsigned active_engines, unsigned stalled_engines);
  void add_job(const JobSpan& j) { jobs_.push_back(j); }

  /// Recomputes the counters from the records alone.
  static TraceCounters fold(const std::vector<TraceRecord>& records);

  /// `cycle,engine,stage,layer,op,addr,stall_reason`
  void write_csv(std::ostream& os) const;

 private:
  bool keep_records_ = false;
  std::vector<TraceRecord> records_;
  TraceCounters counters_;
  std::vector<JobSpan> jobs_;
};

struct LatencyReport {
  std::uint64_t cycles = 0;
  double us = 0.0;
  double fps = 0.0;
  std::uint64_t stalls = 0;
  double overlap_ratio = 0.0;

  std::uint64_t frames = 0;
  std::uint64_t timesteps = 0;
  /// Mean F1 start to U2 end, per SNN timestep.
  double timestep_latency_cycles = 0.0;
  /// Total cycles divided by timesteps.
  double cycles_per_timestep = 0.0;
  std::uint64_t stalls_by_reason[5] = {};
};

/// Summarises a completed trace. `frames` counts the input frames the stream
/// represents (0 for an empty run).
LatencyReport latency_report(const CycleTrace& trace, double clock_mhz, std::uint64_t frames, std::uint64_t timesteps);

/// JSON object with exactly the keys cycles, us, fps, stalls, overlap_ratio.
std::string to_json(const LatencyReport& r);

/// Longer human-readable report: both latency interpretations, stall
/// breakdown and the modelling assumptions.
void write_report_text(std::ostream& os, const LatencyReport& r, const HardwareConfig& hw,
                       std::uint32_t timesteps_per_control_step);

}  // namespace fflp::accel
