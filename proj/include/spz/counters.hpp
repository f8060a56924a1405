#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace spz {

enum class Opcode : std::uint8_t {
  MLXE,
  MSXE,
  MSSORTK,
  MSSORTV,
  MSZIPK,
  MSZIPV,
  MMV_VI,
  MMV_VO,
};

inline constexpr std::size_t kOpcodeCount = 8;

const char* opcode_name(Opcode op);

enum class Phase : std::uint8_t { preprocessing, expansion, sorting, merging, output };

inline constexpr std::size_t kPhaseCount = 5;

const char* phase_name(Phase p);

struct PhaseStat {
  double host_seconds = 0.0;
  std::uint64_t ops = 0;
};

/// Dynamic operation statistics accumulated per kernel run. cycle_estimate
/// covers systolic-array occupancy of key/value instruction pairs only;
/// memory and scalar time is out of model.
struct OpCounters {
  std::uint64_t multiplies = 0;
  std::array<std::uint64_t, kOpcodeCount> dynamic_instr{};
  std::uint64_t mem_row_uops = 0;  // row micro-ops of mlxe/msxe
  std::uint64_t merge_iterations = 0;
  std::uint64_t cycle_estimate = 0;
  std::array<PhaseStat, kPhaseCount> phase{};

  std::uint64_t& instr(Opcode op) { return dynamic_instr[static_cast<std::size_t>(op)]; }
  std::uint64_t instr(Opcode op) const {
    return dynamic_instr[static_cast<std::size_t>(op)];
  }
  PhaseStat& phase_stat(Phase p) { return phase[static_cast<std::size_t>(p)]; }
  const PhaseStat& phase_stat(Phase p) const { return phase[static_cast<std::size_t>(p)]; }

  /// The headline sorted/merged-key metric: dynamic MSSORTK + MSZIPK.
  std::uint64_t key_instr_total() const {
    return instr(Opcode::MSSORTK) + instr(Opcode::MSZIPK);
  }

  OpCounters& operator+=(const OpCounters& o);
};

}  // namespace spz
