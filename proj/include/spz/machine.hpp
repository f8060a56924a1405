#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spz/counters.hpp"
#include "spz/reorder_plan.hpp"
#include "spz/types.hpp"

namespace spz {

inline constexpr std::uint32_t kNumMatrixRegs = 16;
inline constexpr std::uint32_t kNumVectorRegs = 32;
inline constexpr std::uint32_t kMinLanes = 2;
inline constexpr std::uint32_t kMaxLanes = 64;

/// R x R raw 32-bit lanes; keys or values depending on the instruction.
struct MatrixReg {
  std::vector<std::uint32_t> lanes;  // row-major, R*R words

  std::uint32_t word(std::uint32_t r, std::uint32_t c, std::uint32_t R) const {
    return lanes[static_cast<std::size_t>(r) * R + c];
  }
};

struct VectorReg {
  std::vector<std::uint32_t> lanes;  // R words
};

/// R counters, each in [0, R].
struct CounterVector {
  std::vector<std::uint32_t> counts;
};

/// Flat little-endian byte-addressable memory with a bump allocator and a
/// mark/release stack for scratch regions. Word accesses are 32-bit.
class FlatMemory {
 public:
  std::uint64_t size() const { return bytes_.size(); }

  /// Reserves n bytes (4-byte aligned) and returns their base address.
  std::uint64_t alloc(std::uint64_t n_bytes);
  std::uint64_t mark() const { return bytes_.size(); }
  void release(std::uint64_t m);

  std::uint32_t read_word(std::uint64_t addr) const;
  void write_word(std::uint64_t addr, std::uint32_t w);
  std::vector<std::uint32_t> read_words(std::uint64_t addr, std::uint64_t n) const;
  void write_words(std::uint64_t addr, std::span<const std::uint32_t> data);

  float read_f32(std::uint64_t addr) const;
  void write_f32(std::uint64_t addr, float v);

 private:
  void check(std::uint64_t addr, std::uint64_t len) const;
  std::vector<std::uint8_t> bytes_;
};

/// The architectural state one hart sees: matrix registers, vector registers,
/// counter vectors, the key-reorder latch and flat memory. Single-threaded;
/// distinct instances may run on distinct threads.
struct MachineState {
  explicit MachineState(std::uint32_t lanes = 16);

  std::uint32_t R;
  std::vector<MatrixReg> tr;  // 16 physical matrix registers
  std::vector<VectorReg> v;   // 32 vector registers
  CounterVector ic[2];
  CounterVector oc[2];
  std::optional<ReorderPlan> plan;
  FlatMemory mem;
  OpCounters op_counters;

  /// Functional execution by default; when true the sorting/merging
  /// instructions run through the cycle-level trace engine instead (slower,
  /// same results by construction).
  bool trace_mode = false;

  /// Host-level lane-wise helper mirroring the base vector ISA's pointer
  /// arithmetic (not a modeled instruction).
  void vadd(std::uint32_t vd, std::uint32_t vs1, std::uint32_t vs2);
  void set_vlanes(std::uint32_t vd, std::span<const std::uint32_t> values);

  std::span<std::uint32_t> tr_row(std::uint32_t reg, std::uint32_t row);
  std::span<const std::uint32_t> tr_row(std::uint32_t reg, std::uint32_t row) const;
};

/// JSON snapshot (registers as hex lanes, counters, plan summary) for golden
/// tests. Deterministic field order.
std::string snapshot_json(const MachineState& st);

}  // namespace spz
