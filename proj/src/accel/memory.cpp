#include "fflp/accel/memory.hpp"

#include <algorithm>

namespace fflp::accel {

const char* to_string(Grant g) {
  switch (g) {
    case Grant::granted: return "granted";
    case Grant::port_busy: return "port_busy";
    case Grant::write_priority: return "write_priority";
  }
  return "?";
}

MemoryBank::MemoryBank(std::string name, std::uint32_t lines, std::uint32_t lanes, std::uint32_t ports)
    : name_(std::move(name)), lines_(lines), lanes_(lanes), ports_(ports),
      data_(std::size_t{lines} * lanes, 0), versions_(lines, 0) {
  if (lanes == 0 || ports == 0) throw std::invalid_argument(name_ + ": lanes and ports must be positive");
}

void MemoryBank::check_addr(std::uint32_t addr) const {
  if (addr >= lines_) {
    throw SimulatorAssertion(name_ + ": address " + std::to_string(addr) + " out of range " + std::to_string(lines_));
  }
}

void MemoryBank::begin_cycle(std::uint64_t cycle) {
  cycle_ = cycle;
  ports_used_ = 0;
  written_.clear();
}

bool MemoryBank::written_this_cycle(std::uint32_t addr) const {
  return std::find(written_.begin(), written_.end(), addr) != written_.end();
}

void MemoryBank::commit_write(std::uint32_t addr, std::span<const std::uint64_t> line) {
  check_addr(addr);
  if (line.size() != lanes_) throw SimulatorAssertion(name_ + ": write width mismatch");
  if (written_this_cycle(addr)) {
    throw SimulatorAssertion(name_ + ": two writes to address " + std::to_string(addr) + " in cycle " +
                             std::to_string(cycle_));
  }
  if (ports_used_ >= ports_) {
    throw SimulatorAssertion(name_ + ": more writes than ports in cycle " + std::to_string(cycle_));
  }
  ++ports_used_;
  written_.push_back(addr);
  std::copy(line.begin(), line.end(), data_.begin() + std::size_t{addr} * lanes_);
  ++versions_[addr];
}

Grant MemoryBank::try_read(std::uint32_t addr) {
  check_addr(addr);
  if (written_this_cycle(addr)) return Grant::write_priority;
  if (ports_used_ >= ports_) return Grant::port_busy;
  ++ports_used_;
  return Grant::granted;
}

std::span<const std::uint64_t> MemoryBank::line(std::uint32_t addr) const {
  check_addr(addr);
  return {data_.data() + std::size_t{addr} * lanes_, lanes_};
}

void MemoryBank::load(std::uint32_t addr, std::span<const std::uint64_t> line) {
  check_addr(addr);
  if (line.size() != lanes_) throw std::invalid_argument(name_ + ": load width mismatch");
  std::copy(line.begin(), line.end(), data_.begin() + std::size_t{addr} * lanes_);
}

std::vector<ReadOutcome> arbitrate(MemoryBank& bank, std::uint64_t cycle, const std::vector<std::uint32_t>& reads,
                                   const std::vector<WriteRequest>& writes) {
  bank.begin_cycle(cycle);
  for (const auto& w : writes) bank.commit_write(w.addr, w.line);
  std::vector<ReadOutcome> out;
  out.reserve(reads.size());
  for (std::uint32_t addr : reads) {
    ReadOutcome r;
    r.addr = addr;
    r.grant = bank.try_read(addr);
    if (r.grant == Grant::granted) {
      const auto line = bank.line(addr);
      r.data.assign(line.begin(), line.end());
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fflp::accel
