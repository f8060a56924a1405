#include "spz/counters.hpp"

namespace spz {

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::MLXE: return "mlxe";
    case Opcode::MSXE: return "msxe";
    case Opcode::MSSORTK: return "mssortk";
    case Opcode::MSSORTV: return "mssortv";
    case Opcode::MSZIPK: return "mszipk";
    case Opcode::MSZIPV: return "mszipv";
    case Opcode::MMV_VI: return "mmv.vi";
    case Opcode::MMV_VO: return "mmv.vo";
  }
  return "?";
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::preprocessing: return "preprocessing";
    case Phase::expansion: return "expansion";
    case Phase::sorting: return "sorting";
    case Phase::merging: return "merging";
    case Phase::output: return "output";
  }
  return "?";
}

OpCounters& OpCounters::operator+=(const OpCounters& o) {
  multiplies += o.multiplies;
  for (std::size_t i = 0; i < kOpcodeCount; ++i) dynamic_instr[i] += o.dynamic_instr[i];
  mem_row_uops += o.mem_row_uops;
  merge_iterations += o.merge_iterations;
  cycle_estimate += o.cycle_estimate;
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    phase[i].host_seconds += o.phase[i].host_seconds;
    phase[i].ops += o.phase[i].ops;
  }
  return *this;
}

}  // namespace spz
