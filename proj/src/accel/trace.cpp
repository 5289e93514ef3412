#include "fflp/accel/trace.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fflp::accel {

const char* to_string(Engine e) {
  switch (e) {
    case Engine::F1: return "F1";
    case Engine::U1: return "U1";
    case Engine::F2: return "F2";
    case Engine::U2: return "U2";
  }
  return "?";
}

const char* to_string(Stage s) {
  switch (s) {
    case Stage::psum: return "psum";
    case Stage::neuron: return "neuron";
    case Stage::trace: return "trace";
    case Stage::preload: return "preload";
    case Stage::pretrace: return "pretrace";
    case Stage::update: return "update";
  }
  return "?";
}

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::read: return "read";
    case OpKind::write: return "write";
    case OpKind::stall: return "stall";
    case OpKind::busy: return "busy";
  }
  return "?";
}

const char* to_string(StallReason r) {
  switch (r) {
    case StallReason::none: return "none";
    case StallReason::port_busy: return "port_busy";
    case StallReason::write_priority: return "write_priority";
    case StallReason::raw_wait: return "raw_wait";
    case StallReason::war_wait: return "war_wait";
  }
  return "?";
}

const char* to_string(BankId b) {
  switch (b) {
    case BankId::none: return "-";
    case BankId::W1: return "W1";
    case BankId::W2: return "W2";
    case BankId::C1: return "C1";
    case BankId::C2: return "C2";
    case BankId::V1: return "V1";
    case BankId::V2: return "V2";
    case BankId::T: return "T";
  }
  return "?";
}

namespace {

bool is_weight_fetch(const TraceRecord& r) {
  return r.op == OpKind::read && (r.engine == Engine::F1 || r.engine == Engine::F2) &&
         (r.bank == BankId::W1 || r.bank == BankId::W2);
}

}  // namespace

void CycleTrace::add(const TraceRecord& r) {
  if (is_weight_fetch(r)) ++counters_.weight_fetches;
  if (r.op == OpKind::stall) ++counters_.stalls_by_reason[static_cast<std::size_t>(r.reason)];
  if (keep_records_) records_.push_back(r);
}

void CycleTrace::end_cycle(std::uint64_t, unsigned active_engines, unsigned stalled_engines) {
  if (active_engines == 0) return;
  ++counters_.total_cycles;
  counters_.stall_cycles += stalled_engines;
  if (active_engines >= 2) ++counters_.overlap_cycles;
}

TraceCounters CycleTrace::fold(const std::vector<TraceRecord>& records) {
  TraceCounters c;
  std::map<std::uint64_t, std::set<Engine>> active;
  std::set<std::pair<std::uint64_t, Engine>> stalled;
  for (const auto& r : records) {
    active[r.cycle].insert(r.engine);
    if (r.op == OpKind::stall) {
      stalled.emplace(r.cycle, r.engine);
      ++c.stalls_by_reason[static_cast<std::size_t>(r.reason)];
    }
    if (is_weight_fetch(r)) ++c.weight_fetches;
  }
  c.total_cycles = active.size();
  c.stall_cycles = stalled.size();
  for (const auto& [cycle, engines] : active) {
    if (engines.size() >= 2) ++c.overlap_cycles;
  }
  return c;
}

void CycleTrace::write_csv(std::ostream& os) const {
  os << "cycle,engine,stage,layer,op,addr,stall_reason\n";
  for (const auto& r : records_) {
    os << r.cycle << ',' << to_string(r.engine) << ',' << to_string(r.stage) << ',' << r.layer() << ','
       << to_string(r.op) << ',';
    if (r.bank != BankId::none) os << to_string(r.bank) << ':' << r.addr;
    os << ',' << (r.op == OpKind::stall ? to_string(r.reason) : "") << '\n';
  }
}

LatencyReport latency_report(const CycleTrace& trace, double clock_mhz, std::uint64_t frames,
                             std::uint64_t timesteps) {
  LatencyReport r;
  const TraceCounters& c = trace.counters();
  r.cycles = c.total_cycles;
  r.us = static_cast<double>(c.total_cycles) / clock_mhz;
  r.stalls = c.stall_cycles;
  std::copy(std::begin(c.stalls_by_reason), std::end(c.stalls_by_reason), std::begin(r.stalls_by_reason));
  r.frames = frames;
  r.timesteps = timesteps;
  if (c.total_cycles == 0) return r;
  r.overlap_ratio = static_cast<double>(c.overlap_cycles) / static_cast<double>(c.total_cycles);
  if (frames > 0) r.fps = static_cast<double>(frames) * clock_mhz * 1e6 / static_cast<double>(c.total_cycles);
  if (timesteps > 0) r.cycles_per_timestep = static_cast<double>(c.total_cycles) / static_cast<double>(timesteps);

  std::map<std::uint64_t, std::uint64_t> f1_start, u2_end;
  for (const auto& j : trace.jobs()) {
    if (j.engine == Engine::F1) f1_start[j.timestep] = j.start;
    if (j.engine == Engine::U2) u2_end[j.timestep] = j.end;
  }
  double sum = 0.0;
  std::uint64_t n = 0;
  for (const auto& [t, start] : f1_start) {
    const auto it = u2_end.find(t);
    if (it == u2_end.end()) continue;
    sum += static_cast<double>(it->second - start + 1);
    ++n;
  }
  if (n > 0) r.timestep_latency_cycles = sum / static_cast<double>(n);
  return r;
}

std::string to_json(const LatencyReport& r) {
  nlohmann::ordered_json j;
  j["cycles"] = r.cycles;
  j["us"] = r.us;
  j["fps"] = r.fps;
  j["stalls"] = r.stalls;
  j["overlap_ratio"] = r.overlap_ratio;
  return j.dump();
}

void write_report_text(std::ostream& os, const LatencyReport& r, const HardwareConfig& hw,
                       std::uint32_t timesteps_per_control_step) {
  const double mhz = hw.clock_mhz;
  os << std::fixed << std::setprecision(3);
  os << "total: " << r.cycles << " cycles, " << r.us << " us over " << r.timesteps << " timesteps";
  if (r.frames > 0) os << ", " << r.frames << " frames, " << r.fps << " FPS";
  os << '\n';
  os << "per timestep (F1 start to U2 end): " << r.timestep_latency_cycles << " cycles = "
     << r.timestep_latency_cycles / mhz << " us\n";
  os << "per timestep (throughput): " << r.cycles_per_timestep << " cycles = " << r.cycles_per_timestep / mhz
     << " us\n";
  os << "per control step of " << timesteps_per_control_step
     << " timesteps: " << r.cycles_per_timestep * timesteps_per_control_step << " cycles = "
     << r.cycles_per_timestep * timesteps_per_control_step / mhz << " us\n";
  os << "stalled engine-cycles: " << r.stalls << " (";
  for (std::size_t i = 1; i < 5; ++i) {
    os << to_string(static_cast<StallReason>(i)) << ' ' << r.stalls_by_reason[i] << (i < 4 ? ", " : "");
  }
  os << ")\n";
  os << "overlap ratio: " << r.overlap_ratio << '\n';
  os << "assumptions:\n";
  for (const auto& a : hw.assumptions()) os << "  - " << a << '\n';
}

}  // namespace fflp::accel
