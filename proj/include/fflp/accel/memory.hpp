#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fflp::accel {

/// A scheduling bug the hardware would turn into silent corruption, such as
/// two writes to one address in the same cycle.
class SimulatorAssertion : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Grant : std::uint8_t { granted, port_busy, write_priority };

const char* to_string(Grant g);

/// Line-addressed on-chip memory with a fixed number of ports. Each line is
/// `lanes` words wide (one word per processing element), so a whole tile is
/// moved in one access.
///
/// Per cycle: writes are committed first and each takes a port. A read of an
/// address written in the same cycle is refused with `write_priority` and sees
/// the new value when retried; reads beyond the free ports get `port_busy`.
class MemoryBank {
 public:
  MemoryBank() = default;
  MemoryBank(std::string name, std::uint32_t lines, std::uint32_t lanes, std::uint32_t ports);

  const std::string& name() const { return name_; }
  std::uint32_t lines() const { return lines_; }
  std::uint32_t lanes() const { return lanes_; }
  std::uint32_t ports() const { return ports_; }

  void begin_cycle(std::uint64_t cycle);
  /// Throws SimulatorAssertion on a second write to `addr` this cycle or when
  /// the ports are exhausted.
  void commit_write(std::uint32_t addr, std::span<const std::uint64_t> line);
  Grant try_read(std::uint32_t addr);

  std::span<const std::uint64_t> line(std::uint32_t addr) const;
  /// Host-side initialisation; bypasses ports and versions.
  void load(std::uint32_t addr, std::span<const std::uint64_t> line);
  /// Number of committed writes to `addr` since construction.
  std::uint64_t version(std::uint32_t addr) const { return versions_.at(addr); }

  std::uint32_t ports_used() const { return ports_used_; }
  bool written_this_cycle(std::uint32_t addr) const;

 private:
  void check_addr(std::uint32_t addr) const;

  std::string name_;
  std::uint32_t lines_ = 0;
  std::uint32_t lanes_ = 0;
  std::uint32_t ports_ = 2;
  std::vector<std::uint64_t> data_;
  std::vector<std::uint64_t> versions_;
  std::uint64_t cycle_ = 0;
  std::uint32_t ports_used_ = 0;
  std::vector<std::uint32_t> written_;
};

struct WriteRequest {
  std::uint32_t addr = 0;
  std::vector<std::uint64_t> line;
};

struct ReadOutcome {
  std::uint32_t addr = 0;
  Grant grant = Grant::granted;
  /// Line contents for granted reads.
  std::vector<std::uint64_t> data;
};

/// Resolves one cycle of requests against `bank`: writes commit first, then
/// reads are granted in request order.
std::vector<ReadOutcome> arbitrate(MemoryBank& bank, std::uint64_t cycle, const std::vector<std::uint32_t>& reads,
                                   const std::vector<WriteRequest>& writes);

}  // namespace fflp::accel
