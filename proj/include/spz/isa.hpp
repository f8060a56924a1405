#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "spz/machine.hpp"

namespace spz {

/// One decoded instruction. The base address is carried as an operand value
/// (the scalar register file is not modeled), vector operands are register
/// indices.
struct Instruction {
  Opcode op = Opcode::MLXE;
  std::uint8_t td1 = 0, td2 = 0;      // matrix register operands
  std::uint8_t vs1 = 0, vs2 = 0, vs3 = 0;  // vector register operands
  std::uint8_t vd = 0;                // vector destination (mmv)
  std::uint8_t cimm = 0;              // counter index immediate (mmv)
  std::uint64_t base = 0;             // scalar base address (mlxe/msxe)

  static Instruction mlxe(std::uint8_t td, std::uint64_t base, std::uint8_t vs_off,
                          std::uint8_t vs_len);
  static Instruction msxe(std::uint8_t ts, std::uint64_t base, std::uint8_t vs_off,
                          std::uint8_t vs_len);
  static Instruction mssortk(std::uint8_t td1, std::uint8_t td2, std::uint8_t vs1,
                             std::uint8_t vs2);
  static Instruction mssortv(std::uint8_t td1, std::uint8_t td2, std::uint8_t vs1,
                             std::uint8_t vs2);
  static Instruction mszipk(std::uint8_t td1, std::uint8_t td2, std::uint8_t vs1,
                            std::uint8_t vs2);
  static Instruction mszipv(std::uint8_t td1, std::uint8_t td2, std::uint8_t vs1,
                            std::uint8_t vs2);
  static Instruction mmv_vi(std::uint8_t vd, std::uint8_t cimm);
  static Instruction mmv_vo(std::uint8_t vd, std::uint8_t cimm);

  std::string disasm() const;
};

/// Executes one instruction against the state, updating op counters. Throws
/// on faults; the state before the faulting instruction is unchanged for
/// memory faults on loads but partial row writes may have happened on stores
/// (in-order, non-speculative executor).
void execute(const Instruction& ins, MachineState& st, std::ostream* log = nullptr);

/// Runs the program in order; the first failing instruction aborts with its
/// index in the message. Returns the counter delta of this run.
OpCounters run_program(std::span<const Instruction> prog, MachineState& st,
                       std::ostream* log = nullptr);

}  // namespace spz
