#pragma once

#include <cstdint>
#include <vector>

namespace spz {

enum class PlanKind : std::uint8_t { sort, zip };

/// One input operand position: side 0 = first register operand (west),
/// side 1 = second register operand (north).
struct PlanSource {
  std::uint8_t side;
  std::uint32_t pos;

  friend bool operator==(const PlanSource&, const PlanSource&) = default;
};

/// One output lane: its value is the left fold (in list order) of the source
/// lanes' values. List order is the accumulation order the array realizes.
struct PlanSlot {
  std::vector<PlanSource> sources;

  friend bool operator==(const PlanSlot&, const PlanSlot&) = default;
};

/// How one row pair's keys were reordered/combined by a key instruction;
/// replayed by the paired value instruction.
struct PlanRow {
  std::uint32_t la = 0;  // operand lengths the key instruction saw
  std::uint32_t lb = 0;
  std::uint32_t consumed_a = 0;  // zip: merged counts; sort: la/lb
  std::uint32_t consumed_b = 0;
  std::vector<PlanSlot> out1;  // lanes written to the first register operand
  std::vector<PlanSlot> out2;  // lanes written to the second register operand

  friend bool operator==(const PlanRow&, const PlanRow&) = default;
};

/// The abstract key-reordering state latched between a key instruction and
/// its paired value instruction.
struct ReorderPlan {
  PlanKind kind = PlanKind::sort;
  std::uint8_t key_reg_1 = 0;  // matrix registers the key instruction used;
  std::uint8_t key_reg_2 = 0;  // a load overwriting either clears the plan
  std::vector<PlanRow> rows;
};

}  // namespace spz
