#include "fflp/accel/simulator.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <sstream>

#include "fflp/model_file.hpp"

namespace fflp::accel {

namespace {

constexpr std::size_t kMaxViolationsKept = 16;

std::uint32_t ceil_div(std::uint64_t a, std::uint64_t b) { return static_cast<std::uint32_t>((a + b - 1) / b); }

Half lane_half(std::uint64_t word) { return Half::from_bits(static_cast<std::uint16_t>(word)); }

bool is_forward(Engine e) { return e == Engine::F1 || e == Engine::F2; }

// Static description of one weight layer as laid out in the banks.
struct LayerGeometry {
  std::uint32_t n_pre = 0;
  std::uint32_t n_post = 0;
  std::uint32_t tiles_post = 0;
  BankId w = BankId::none;
  BankId c = BankId::none;
  BankId v = BankId::none;
  std::uint32_t pre_base = 0;   // first trace line of the presynaptic population
  std::uint32_t post_base = 0;  // first trace line of the postsynaptic population
  std::uint8_t post_consumers = 0;  // update engines that read a post trace line
};

struct PendingWrite {
  std::uint64_t cycle = 0;
  BankId bank = BankId::none;
  std::uint32_t addr = 0;
  Stage stage = Stage::psum;
  std::uint8_t consumers = 0;  // trace lines: update-engine reads owed before the next overwrite
  std::vector<std::uint64_t> line;
};

struct Op {
  bool valid = false;
  Stage stage = Stage::psum;
  std::uint8_t n_reads = 0;
  std::array<BankId, 2> bank{};
  std::array<std::uint32_t, 2> addr{};
  std::array<bool, 2> granted{};
  std::array<std::vector<std::uint64_t>, 2> data;
  std::uint64_t not_before = 0;
  std::uint32_t j = 0, k = 0, m = 0;
};

struct Job {
  Engine engine = Engine::F1;
  int layer = 1;
  std::uint64_t t = 0;
  bool active = false;
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  Op op;
  std::uint64_t next_issue = 0;  // initiation interval
  std::deque<PendingWrite> writes;
  bool ops_done = false;

  // Forward engine state.
  SpikeVector in_spikes;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> psum_lines;
  std::size_t psum_pos = 0;
  std::vector<Half> acc;
  SpikeVector out_spikes;
  std::uint64_t last_psum_issue = 0;
  bool any_psum = false;
  std::uint64_t last_neuron_issue = 0;
  std::uint32_t trace_lines = 0;

  // Update engine state.
  std::vector<Half> post_trace;
  std::vector<Half> pre_trace_line;
  std::uint64_t preload_done = 0;
};

}  // namespace

struct Simulator::Impl {
  HardwareConfig hw;
  ScheduleMode mode;
  NetworkConfig config;
  std::uint32_t P = 1;
  std::uint32_t tiles_in = 0, tiles_hidden = 0, tiles_out = 0;
  std::array<LayerGeometry, 2> layers;
  std::array<MemoryBank, 8> banks;
  std::vector<std::uint8_t> pending_readers;  // per trace line
  std::uint64_t cycle = 0;
  std::uint64_t steps = 0;
  bool epilogue_pending = false;
  SpikeVector hidden_spikes;
  SpikeVector output_spikes;
  SpikeVector last_hidden_for_f2;
  CycleTrace trace;
  MonitorReport monitor;
  std::uint64_t last_progress = 0;
  std::uint64_t scan_window = 0;

  // Per-cycle bookkeeping.
  std::array<bool, kEngineCount> recorded{};
  std::array<bool, kEngineCount> stalled{};

  Impl(const HardwareConfig& h, const NetworkState& s, const PlasticityRule& rule, ScheduleMode m, bool keep)
      : hw(h), mode(m), config(s.config), trace(keep) {
    hw.validate();
    config.validate();
    rule.check_shape(config);
    P = hw.pe_count;
    tiles_in = ceil_div(config.n_in, P);
    tiles_hidden = ceil_div(config.n_hidden, P);
    tiles_out = ceil_div(config.n_out, P);
    const std::uint32_t ports = hw.ports_per_bank;

    layers[0] = {config.n_in, config.n_hidden, tiles_hidden, BankId::W1, BankId::C1, BankId::V1, 0, tiles_in, 2};
    layers[1] = {config.n_hidden, config.n_out, tiles_out, BankId::W2, BankId::C2, BankId::V2, tiles_in,
                 tiles_in + tiles_hidden, 1};
    bank_ref(BankId::W1) = MemoryBank("W1", config.n_in * tiles_hidden, P, ports);
    bank_ref(BankId::W2) = MemoryBank("W2", config.n_hidden * tiles_out, P, ports);
    bank_ref(BankId::C1) = MemoryBank("C1", config.n_in * tiles_hidden, P, ports);
    bank_ref(BankId::C2) = MemoryBank("C2", config.n_hidden * tiles_out, P, ports);
    bank_ref(BankId::V1) = MemoryBank("V1", tiles_hidden, P, ports);
    bank_ref(BankId::V2) = MemoryBank("V2", tiles_out, P, ports);
    bank_ref(BankId::T) = MemoryBank("T", tiles_in + tiles_hidden + tiles_out, P, ports);
    pending_readers.assign(bank_ref(BankId::T).lines(), 0);

    load_layer(layers[0], s.w_input_hidden, rule.input_hidden, s.hidden.v);
    load_layer(layers[1], s.w_hidden_output, rule.hidden_output, s.output.v);
    load_population(0, s.input_trace);
    load_population(tiles_in, s.hidden.trace);
    load_population(tiles_in + tiles_hidden, s.output.trace);
    hidden_spikes = s.hidden.spikes;
    output_spikes = s.output.spikes;

    std::uint64_t total_lines = 0;
    for (const auto& b : banks) total_lines += b.lines();
    scan_window = total_lines + hw.plasticity_pipeline_latency() + hw.read_latency + hw.neuron_latency +
                  hw.trace_latency + hw.writeback_latency + 16;
  }

  MemoryBank& bank_ref(BankId id) { return banks[static_cast<std::size_t>(id)]; }
  const MemoryBank& bank_ref(BankId id) const { return banks[static_cast<std::size_t>(id)]; }

  void load_layer(const LayerGeometry& g, const HalfMatrix& w, const LayerRule& rule, const std::vector<Half>& v) {
    std::vector<std::uint64_t> wl(P), cl(P);
    for (std::uint32_t j = 0; j < g.n_pre; ++j) {
      for (std::uint32_t k = 0; k < g.tiles_post; ++k) {
        std::fill(wl.begin(), wl.end(), 0);
        std::fill(cl.begin(), cl.end(), 0);
        for (std::uint32_t p = 0; p < P; ++p) {
          const std::uint32_t i = k * P + p;
          if (i >= g.n_post) break;
          wl[p] = w(i, j).bits();
          cl[p] = pack_coefficients(rule.at(i, j));
        }
        bank_ref(g.w).load(j * g.tiles_post + k, wl);
        bank_ref(g.c).load(j * g.tiles_post + k, cl);
      }
    }
    load_lines(g.v, 0, v);
  }

  void load_population(std::uint32_t base, const std::vector<Half>& values) { load_lines(BankId::T, base, values); }

  void load_lines(BankId id, std::uint32_t base, const std::vector<Half>& values) {
    std::vector<std::uint64_t> line(P);
    const std::uint32_t n_lines = ceil_div(values.size(), P);
    for (std::uint32_t m = 0; m < n_lines; ++m) {
      std::fill(line.begin(), line.end(), 0);
      for (std::uint32_t p = 0; p < P && m * P + p < values.size(); ++p) line[p] = values[m * P + p].bits();
      bank_ref(id).load(base + m, line);
    }
  }

  std::vector<Half> read_population(BankId id, std::uint32_t base, std::uint32_t n) const {
    std::vector<Half> out(n);
    for (std::uint32_t i = 0; i < n; ++i) out[i] = lane_half(bank_ref(id).line(base + i / P)[i % P]);
    return out;
  }

  // ------------------------------------------------------------ records

  void record(const Job& job, OpKind op, BankId bank, std::uint32_t addr, StallReason reason) {
    const auto e = static_cast<std::size_t>(job.engine);
    recorded[e] = true;
    if (op == OpKind::stall) stalled[e] = true;
    trace.add({cycle, job.engine, job.op.stage, op, bank, addr, reason});
  }

  // ------------------------------------------------------------ monitor

  std::uint64_t expected_version(const Job& job, BankId bank) const {
    switch (bank) {
      case BankId::W1:
      case BankId::W2:
      case BankId::V1:
      case BankId::V2: return job.t;
      case BankId::C1:
      case BankId::C2: return 0;
      case BankId::T: return is_forward(job.engine) ? job.t : job.t + 1;
      case BankId::none: break;
    }
    return 0;
  }

  void monitor_read(const Job& job, BankId bank, std::uint32_t addr) {
    ++monitor.checked_reads;
    const std::uint64_t have = bank_ref(bank).version(addr);
    const std::uint64_t want = expected_version(job, bank);
    if (have == want) return;
    if (have < want) {
      ++monitor.stale_reads;
    } else {
      ++monitor.overwritten_reads;
    }
    if (monitor.first_violations.size() < kMaxViolationsKept) {
      std::ostringstream os;
      os << "cycle " << cycle << ' ' << to_string(job.engine) << "(t=" << job.t << ") read " << to_string(bank) << ':'
         << addr << " version " << have << " expected " << want;
      monitor.first_violations.push_back(os.str());
    }
  }

  // Dependency gate evaluated before a read is presented to the arbiter.
  StallReason gate(const Job& job, BankId bank, std::uint32_t addr) const {
    const MemoryBank& b = bank_ref(bank);
    if (bank == BankId::W1 || bank == BankId::W2) {
      // Forward passes and updates of timestep t see the weights after t updates.
      if (b.version(addr) < job.t) return StallReason::raw_wait;
    } else if (bank == BankId::T) {
      if (is_forward(job.engine)) {
        // Trace read-modify-write: every update engine owed this line must have read it.
        if (pending_readers[addr] != 0) return StallReason::war_wait;
      } else if (b.version(addr) < job.t + 1) {
        return StallReason::raw_wait;
      }
    }
    return StallReason::none;
  }

  // ------------------------------------------------------------ jobs

  void start_forward(Job& job, Engine e, std::uint64_t t, const SpikeVector& in) {
    job = Job{};
    job.engine = e;
    job.layer = e == Engine::F1 ? 1 : 2;
    job.t = t;
    job.active = true;
    job.start = cycle;
    job.in_spikes = in;
    const LayerGeometry& g = layers[job.layer - 1];
    for (std::uint32_t j = 0; j < g.n_pre; ++j) {
      if (!in[j]) continue;
      for (std::uint32_t k = 0; k < g.tiles_post; ++k) job.psum_lines.emplace_back(j, k);
    }
    job.acc.assign(g.n_post, kHalfZero);
    job.out_spikes.assign(g.n_post, 0);
    job.trace_lines = (job.layer == 1 ? tiles_in : 0) + g.tiles_post;
    next_forward_op(job);
  }

  void next_forward_op(Job& job) {
    const LayerGeometry& g = layers[job.layer - 1];
    Op& op = job.op;
    const Stage prev = op.valid ? op.stage : Stage::psum;
    const std::uint32_t prev_k = op.k, prev_m = op.m;
    const bool first = !op.valid;
    op = Op{};
    op.valid = true;
    op.n_reads = 1;
    if (job.psum_pos < job.psum_lines.size()) {
      const auto [j, k] = job.psum_lines[job.psum_pos++];
      op.stage = Stage::psum;
      op.j = j;
      op.k = k;
      op.bank[0] = g.w;
      op.addr[0] = j * g.tiles_post + k;
      return;
    }
    std::uint32_t k = 0;
    if (!first && prev == Stage::neuron) k = prev_k + 1;
    if (first || prev == Stage::psum || (prev == Stage::neuron && k < g.tiles_post)) {
      op.stage = Stage::neuron;
      op.k = k;
      op.bank[0] = g.v;
      op.addr[0] = k;
      op.not_before = job.any_psum ? job.last_psum_issue + hw.add_latency : 0;
      return;
    }
    const std::uint32_t m = prev == Stage::trace ? prev_m + 1 : 0;
    if (m < job.trace_lines) {
      op.stage = Stage::trace;
      op.m = m;
      op.bank[0] = BankId::T;
      op.addr[0] = trace_line_addr(job, m);
      op.not_before = job.last_neuron_issue + hw.neuron_latency;
      return;
    }
    op.valid = false;
    job.ops_done = true;
  }

  std::uint32_t trace_line_addr(const Job& job, std::uint32_t m) const {
    const LayerGeometry& g = layers[job.layer - 1];
    if (job.layer == 1 && m < tiles_in) return m;
    return g.post_base + (job.layer == 1 ? m - tiles_in : m);
  }

  void start_update(Job& job, Engine e, std::uint64_t t) {
    job = Job{};
    job.engine = e;
    job.layer = e == Engine::U1 ? 1 : 2;
    job.t = t;
    job.active = true;
    job.start = cycle;
    const LayerGeometry& g = layers[job.layer - 1];
    job.post_trace.assign(std::size_t{g.tiles_post} * P, kHalfZero);
    job.pre_trace_line.assign(P, kHalfZero);
    next_update_op(job);
  }

  void next_update_op(Job& job) {
    const LayerGeometry& g = layers[job.layer - 1];
    Op& op = job.op;
    const bool first = !op.valid;
    const Stage prev = op.stage;
    const std::uint32_t pj = op.j, pk = op.k;
    op = Op{};
    op.valid = true;
    if (first || (prev == Stage::preload && pk + 1 < g.tiles_post)) {
      op.stage = Stage::preload;
      op.k = first ? 0 : pk + 1;
      op.n_reads = 1;
      op.bank[0] = BankId::T;
      op.addr[0] = g.post_base + op.k;
      return;
    }
    std::uint32_t j = 0, k = 0;
    if (prev == Stage::update) {
      j = pj;
      k = pk + 1;
      if (k == g.tiles_post) {
        k = 0;
        ++j;
      }
    } else if (prev == Stage::pretrace) {
      j = pj;
      k = 0;
    }
    if (j >= g.n_pre) {
      op.valid = false;
      job.ops_done = true;
      return;
    }
    if (k == 0 && j % P == 0 && prev != Stage::pretrace) {
      op.stage = Stage::pretrace;
      op.j = j;
      op.n_reads = 1;
      op.bank[0] = BankId::T;
      op.addr[0] = g.pre_base + j / P;
      return;
    }
    op.stage = Stage::update;
    op.j = j;
    op.k = k;
    op.n_reads = 2;
    op.bank = {g.w, g.c};
    op.addr = {j * g.tiles_post + k, j * g.tiles_post + k};
  }

  std::uint32_t valid_lanes(const LayerGeometry& g, std::uint32_t k) const {
    return std::min<std::uint32_t>(P, g.n_post - k * P);
  }

  // Performs the datapath work of an op whose reads are all granted.
  void issue(Job& job) {
    Op& op = job.op;
    const LayerGeometry& g = layers[job.layer - 1];
    const Half v_th = config.v_th;
    const Half lambda = config.lambda;
    last_progress = cycle;
    switch (op.stage) {
      case Stage::psum: {
        const auto& line = op.data[0];
        for (std::uint32_t p = 0; p < P; ++p) {
          const std::uint32_t i = op.k * P + p;
          if (i >= g.n_post) break;
          job.acc[i] = fused_psum(job.acc[i], lane_half(line[p]), true);
        }
        job.last_psum_issue = cycle;
        job.any_psum = true;
        break;
      }
      case Stage::neuron: {
        std::vector<std::uint64_t> out(op.data[0]);
        for (std::uint32_t p = 0; p < P; ++p) {
          const std::uint32_t i = op.k * P + p;
          if (i >= g.n_post) break;
          const LifResult r = lif_step(lane_half(out[p]), job.acc[i], v_th);
          out[p] = r.v.bits();
          job.out_spikes[i] = r.spike ? 1 : 0;
        }
        job.last_neuron_issue = cycle;
        push_write(job, g.v, op.addr[0], hw.read_latency + hw.neuron_latency + hw.writeback_latency, 0,
                   std::move(out));
        break;
      }
      case Stage::trace: {
        std::vector<std::uint64_t> out(op.data[0]);
        const bool input_line = job.layer == 1 && op.m < tiles_in;
        const SpikeVector& spikes = input_line ? job.in_spikes : job.out_spikes;
        const std::uint32_t line_index = input_line ? op.m : (job.layer == 1 ? op.m - tiles_in : op.m);
        const std::uint32_t n = input_line ? config.n_in : g.n_post;
        for (std::uint32_t p = 0; p < P; ++p) {
          const std::uint32_t i = line_index * P + p;
          if (i >= n) break;
          out[p] = trace_step(lane_half(out[p]), spikes[i] != 0, lambda).bits();
        }
        const std::uint8_t consumers = input_line ? 1 : g.post_consumers;
        push_write(job, BankId::T, op.addr[0], hw.read_latency + hw.trace_latency + hw.writeback_latency, consumers,
                   std::move(out));
        break;
      }
      case Stage::preload: {
        for (std::uint32_t p = 0; p < P; ++p) job.post_trace[op.k * P + p] = lane_half(op.data[0][p]);
        break;
      }
      case Stage::pretrace: {
        for (std::uint32_t p = 0; p < P; ++p) job.pre_trace_line[p] = lane_half(op.data[0][p]);
        break;
      }
      case Stage::update: {
        std::vector<std::uint64_t> out(op.data[0]);
        const Half pre = job.pre_trace_line[op.j % P];
        const std::uint32_t lanes = valid_lanes(g, op.k);
        for (std::uint32_t p = 0; p < lanes; ++p) {
          const SynapseCoefficients c = unpack_coefficients(op.data[1][p]);
          const Half post = job.post_trace[op.k * P + p];
          out[p] = add(lane_half(out[p]), plasticity_delta(c, pre, post)).bits();
        }
        push_write(job, g.w, op.addr[0], hw.plasticity_pipeline_latency(), 0, std::move(out));
        job.next_issue = cycle + ceil_div(lanes, hw.plasticity_lanes);
        break;
      }
    }
    if (is_forward(job.engine)) {
      next_forward_op(job);
    } else {
      next_update_op(job);
    }
  }

  void push_write(Job& job, BankId bank, std::uint32_t addr, std::uint64_t latency, std::uint8_t consumers,
                  std::vector<std::uint64_t> line) {
    PendingWrite w;
    w.cycle = cycle + std::max<std::uint64_t>(latency, 1);
    w.bank = bank;
    w.addr = addr;
    w.stage = job.op.stage;
    w.consumers = consumers;
    w.line = std::move(line);
    job.writes.push_back(std::move(w));
  }

  void commit_writes(Job& job) {
    while (!job.writes.empty() && job.writes.front().cycle == cycle) {
      PendingWrite& w = job.writes.front();
      bank_ref(w.bank).commit_write(w.addr, w.line);
      if (w.bank == BankId::T) pending_readers[w.addr] = w.consumers;
      const Stage saved = job.op.stage;
      job.op.stage = w.stage;
      record(job, OpKind::write, w.bank, w.addr, StallReason::none);
      job.op.stage = saved;
      last_progress = cycle;
      job.writes.pop_front();
    }
    if (!job.writes.empty() && job.writes.front().cycle < cycle) {
      throw SimulatorAssertion("write scheduled in the past");
    }
  }

  void tick(Job& job) {
    if (job.ops_done || !job.op.valid) return;
    Op& op = job.op;
    if (cycle < op.not_before || cycle < job.next_issue) return;
    bool all = true;
    for (std::uint8_t r = 0; r < op.n_reads; ++r) {
      if (op.granted[r]) continue;
      StallReason reason = gate(job, op.bank[r], op.addr[r]);
      if (reason == StallReason::none) {
        const Grant gr = bank_ref(op.bank[r]).try_read(op.addr[r]);
        if (gr == Grant::port_busy) reason = StallReason::port_busy;
        if (gr == Grant::write_priority) reason = StallReason::write_priority;
      }
      if (reason != StallReason::none) {
        record(job, OpKind::stall, op.bank[r], op.addr[r], reason);
        all = false;
        continue;
      }
      monitor_read(job, op.bank[r], op.addr[r]);
      const auto line = bank_ref(op.bank[r]).line(op.addr[r]);
      op.data[r].assign(line.begin(), line.end());
      op.granted[r] = true;
      record(job, OpKind::read, op.bank[r], op.addr[r], StallReason::none);
      if (op.bank[r] == BankId::T && !is_forward(job.engine)) --pending_readers[op.addr[r]];
      last_progress = cycle;
    }
    if (all) issue(job);
  }

  void run_phase(std::vector<Job*> jobs) {
    // Forward engines take read priority over update engines.
    std::vector<Job*> priority = jobs;
    std::stable_sort(priority.begin(), priority.end(),
                     [](const Job* a, const Job* b) { return is_forward(a->engine) && !is_forward(b->engine); });
    last_progress = cycle;
    for (;;) {
      bool any = false;
      for (Job* j : jobs) any = any || j->active;
      if (!any) break;
      for (auto& b : banks) b.begin_cycle(cycle);
      recorded.fill(false);
      stalled.fill(false);
      for (Job* j : jobs)
        if (j->active) commit_writes(*j);
      for (Job* j : priority)
        if (j->active) tick(*j);
      unsigned active = 0, n_stalled = 0;
      for (Job* j : jobs) {
        if (!j->active) continue;
        ++active;
        const auto e = static_cast<std::size_t>(j->engine);
        if (stalled[e]) ++n_stalled;
        if (!recorded[e]) trace.add({cycle, j->engine, j->op.valid ? j->op.stage : Stage::psum, OpKind::busy,
                                     BankId::none, 0, StallReason::none});
      }
      trace.end_cycle(cycle, active, n_stalled);
      for (Job* j : jobs) {
        if (j->active && j->ops_done && j->writes.empty()) {
          j->active = false;
          j->end = cycle;
          trace.add_job({j->engine, j->t, j->start, j->end});
        }
      }
      if (cycle - last_progress > scan_window) throw DeadlockError(describe_blocked(jobs));
      ++cycle;
    }
  }

  std::string describe_blocked(const std::vector<Job*>& jobs) const {
    std::ostringstream os;
    os << "no progress for " << scan_window << " cycles at cycle " << cycle << "; blocked:";
    for (const Job* j : jobs) {
      if (!j->active || !j->op.valid) continue;
      for (std::uint8_t r = 0; r < j->op.n_reads; ++r) {
        if (j->op.granted[r]) continue;
        os << ' ' << to_string(j->engine) << "(t=" << j->t << ")." << to_string(j->op.stage) << " read "
           << to_string(j->op.bank[r]) << ':' << j->op.addr[r] << " ["
           << to_string(gate(*j, j->op.bank[r], j->op.addr[r])) << ']';
      }
    }
    return os.str();
  }

  // ------------------------------------------------------------ schedule

  Job f1, u1, f2, u2;

  void phase_f1(std::uint64_t t, const SpikeVector& in) {
    start_forward(f1, Engine::F1, t, in);
    run_phase({&f1});
    hidden_spikes = f1.out_spikes;
  }

  SpikeVector step(const SpikeVector& in) {
    check_spikes(in, config.n_in, "simulator input");
    const std::uint64_t t = steps;
    if (mode == ScheduleMode::serialized) {
      phase_f1(t, in);
      start_update(u1, Engine::U1, t);
      run_phase({&u1});
      start_forward(f2, Engine::F2, t, hidden_spikes);
      run_phase({&f2});
      output_spikes = f2.out_spikes;
      start_update(u2, Engine::U2, t);
      run_phase({&u2});
    } else {
      if (t == 0) {
        phase_f1(t, in);  // prologue
      } else {
        // Phase B of the previous timestep: L2 update alongside the next L1 forward.
        start_update(u2, Engine::U2, t - 1);
        start_forward(f1, Engine::F1, t, in);
        run_phase({&f1, &u2});
        hidden_spikes = f1.out_spikes;
      }
      // Phase A: L1 update alongside the L2 forward.
      start_update(u1, Engine::U1, t);
      start_forward(f2, Engine::F2, t, hidden_spikes);
      run_phase({&u1, &f2});
      output_spikes = f2.out_spikes;
      epilogue_pending = true;
    }
    ++steps;
    return output_spikes;
  }

  void finish() {
    if (!epilogue_pending) return;
    start_update(u2, Engine::U2, steps - 1);
    run_phase({&u2});
    epilogue_pending = false;
  }

  NetworkState state() const {
    if (epilogue_pending) throw std::logic_error("simulator stream not finished");
    NetworkState s = NetworkState::zeros(config);
    for (int l = 0; l < 2; ++l) {
      const LayerGeometry& g = layers[l];
      HalfMatrix& w = l == 0 ? s.w_input_hidden : s.w_hidden_output;
      for (std::uint32_t j = 0; j < g.n_pre; ++j) {
        for (std::uint32_t k = 0; k < g.tiles_post; ++k) {
          const auto line = bank_ref(g.w).line(j * g.tiles_post + k);
          for (std::uint32_t p = 0; p < P && k * P + p < g.n_post; ++p) w(k * P + p, j) = lane_half(line[p]);
        }
      }
    }
    s.hidden.v = read_population(BankId::V1, 0, config.n_hidden);
    s.output.v = read_population(BankId::V2, 0, config.n_out);
    s.input_trace = read_population(BankId::T, 0, config.n_in);
    s.hidden.trace = read_population(BankId::T, tiles_in, config.n_hidden);
    s.output.trace = read_population(BankId::T, tiles_in + tiles_hidden, config.n_out);
    s.hidden.spikes = hidden_spikes;
    s.output.spikes = output_spikes;
    return s;
  }
};

Simulator::Simulator(const HardwareConfig& hw, const NetworkState& initial, const PlasticityRule& rule,
                     ScheduleMode mode, bool keep_records)
    : impl_(std::make_unique<Impl>(hw, initial, rule, mode, keep_records)) {}
Simulator::~Simulator() = default;
Simulator::Simulator(const Simulator& o) : impl_(std::make_unique<Impl>(*o.impl_)) {}
Simulator& Simulator::operator=(const Simulator& o) {
  if (this != &o) impl_ = std::make_unique<Impl>(*o.impl_);
  return *this;
}

SpikeVector Simulator::step(const SpikeVector& in_spikes) { return impl_->step(in_spikes); }
void Simulator::finish() { impl_->finish(); }
std::vector<SpikeVector> Simulator::run(const std::vector<SpikeVector>& inputs) {
  std::vector<SpikeVector> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) out.push_back(step(in));
  finish();
  return out;
}
NetworkState Simulator::state() const { return impl_->state(); }
bool Simulator::finished() const { return !impl_->epilogue_pending; }
const CycleTrace& Simulator::trace() const { return impl_->trace; }
const MonitorReport& Simulator::monitor() const { return impl_->monitor; }
std::uint64_t Simulator::cycle() const { return impl_->cycle; }
std::uint64_t Simulator::timesteps() const { return impl_->steps; }
const HardwareConfig& Simulator::hardware() const { return impl_->hw; }
const MemoryBank& Simulator::bank(BankId id) const { return impl_->bank_ref(id); }
void Simulator::inject_stuck_trace_line(std::uint32_t line) { impl_->pending_readers.at(line) = 0xFF; }

std::uint64_t expected_weight_fetches(const NetworkState& initial, const std::vector<SpikeVector>& inputs,
                                      const std::vector<SpikeVector>& hidden_spikes, std::uint32_t pe_count) {
  const auto& c = initial.config;
  const std::uint64_t tiles_hidden = (c.n_hidden + pe_count - 1) / pe_count;
  const std::uint64_t tiles_out = (c.n_out + pe_count - 1) / pe_count;
  std::uint64_t n = 0;
  for (const auto& s : inputs) n += std::count(s.begin(), s.end(), 1) * tiles_hidden;
  for (const auto& s : hidden_spikes) n += std::count(s.begin(), s.end(), 1) * tiles_out;
  return n;
}

// ------------------------------------------------------------------ backend

CycleBackend::CycleBackend(HardwareConfig hw, ScheduleMode mode) : hw_(hw), mode_(mode) { hw_.validate(); }

void CycleBackend::load(const NetworkState& initial, const PlasticityRule& rule) {
  sim_ = std::make_unique<Simulator>(hw_, initial, rule, mode_);
}

SpikeVector CycleBackend::timestep(const SpikeVector& in_spikes) {
  if (!sim_) throw std::logic_error("cycle backend used before load");
  return sim_->step(in_spikes);
}

NetworkState CycleBackend::snapshot() const {
  if (!sim_) throw std::logic_error("cycle backend used before load");
  Simulator copy(*sim_);
  copy.finish();
  return copy.state();
}

const Simulator& CycleBackend::simulator() const {
  if (!sim_) throw std::logic_error("cycle backend used before load");
  return *sim_;
}

Simulator& CycleBackend::finished_simulator() {
  if (!sim_) throw std::logic_error("cycle backend used before load");
  sim_->finish();
  return *sim_;
}

}  // namespace fflp::accel
