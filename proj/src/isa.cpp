#include "spz/isa.hpp"

#include <cstring>
#include <ostream>
#include <sstream>

#include "spz/systolic.hpp"

namespace spz {

namespace {

void check_mreg(std::uint8_t r) {
  if (r >= kNumMatrixRegs) throw precondition_error("matrix register index out of range");
}

void check_vreg(std::uint8_t r) {
  if (r >= kNumVectorRegs) throw precondition_error("vector register index out of range");
}

std::uint32_t row_len(const MachineState& st, std::uint8_t vlen_reg, std::uint32_t row) {
  const std::uint32_t len = st.v[vlen_reg].lanes[row];
  if (len > st.R)
    throw precondition_error("stream length " + std::to_string(len) +
                             " exceeds lane count in row " + std::to_string(row));
  return len;
}

float bits_to_f32(std::uint32_t w) {
  float v;
  std::memcpy(&v, &w, 4);
  return v;
}

std::uint32_t f32_to_bits(float v) {
  std::uint32_t w;
  std::memcpy(&w, &v, 4);
  return w;
}

void invalidate_plan_on_load(MachineState& st, std::uint8_t td) {
  if (st.plan && (st.plan->key_reg_1 == td || st.plan->key_reg_2 == td)) st.plan.reset();
}

void exec_mlxe(const Instruction& ins, MachineState& st) {
  check_mreg(ins.td1);
  check_vreg(ins.vs2);
  check_vreg(ins.vs3);
  // Validate every row before touching the register so a fault leaves it
  // unchanged.
  for (std::uint32_t i = 0; i < st.R; ++i) {
    const std::uint32_t len = row_len(st, ins.vs3, i);
    if (len) st.mem.read_word(ins.base + st.v[ins.vs2].lanes[i] + 4ull * (len - 1));
  }
  for (std::uint32_t i = 0; i < st.R; ++i) {
    const std::uint32_t len = row_len(st, ins.vs3, i);
    const std::uint64_t addr = ins.base + st.v[ins.vs2].lanes[i];
    auto row = st.tr_row(ins.td1, i);
    for (std::uint32_t k = 0; k < len; ++k) row[k] = st.mem.read_word(addr + 4ull * k);
    for (std::uint32_t k = len; k < st.R; ++k) row[k] = 0;  // deterministic tail
  }
  invalidate_plan_on_load(st, ins.td1);
  st.op_counters.mem_row_uops += st.R;
}

void exec_msxe(const Instruction& ins, MachineState& st) {
  check_mreg(ins.td1);
  check_vreg(ins.vs2);
  check_vreg(ins.vs3);
  for (std::uint32_t i = 0; i < st.R; ++i) {
    const std::uint32_t len = row_len(st, ins.vs3, i);
    const std::uint64_t addr = ins.base + st.v[ins.vs2].lanes[i];
    auto row = st.tr_row(ins.td1, i);
    st.mem.write_words(addr, row.subspan(0, len));
  }
  st.op_counters.mem_row_uops += st.R;
}

void exec_key_instr(const Instruction& ins, MachineState& st, bool zip) {
  check_mreg(ins.td1);
  check_mreg(ins.td2);
  check_vreg(ins.vs1);
  check_vreg(ins.vs2);

  std::vector<systolic::RowPairInput> rows(st.R);
  for (std::uint32_t i = 0; i < st.R; ++i) {
    const std::uint32_t la = row_len(st, ins.vs1, i);
    const std::uint32_t lb = row_len(st, ins.vs2, i);
    auto ra = st.tr_row(ins.td1, i);
    auto rb = st.tr_row(ins.td2, i);
    rows[i].keys_a.assign(ra.begin(), ra.begin() + la);
    rows[i].keys_b.assign(rb.begin(), rb.begin() + lb);
    if (zip) {
      for (std::uint32_t k = 1; k < la; ++k)
        if (rows[i].keys_a[k] <= rows[i].keys_a[k - 1])
          throw precondition_error("mszipk: first chunk not sorted in row " +
                                   std::to_string(i));
      for (std::uint32_t k = 1; k < lb; ++k)
        if (rows[i].keys_b[k] <= rows[i].keys_b[k - 1])
          throw precondition_error("mszipk: second chunk not sorted in row " +
                                   std::to_string(i));
    }
  }

  ReorderPlan plan;
  plan.kind = zip ? PlanKind::zip : PlanKind::sort;
  plan.key_reg_1 = ins.td1;
  plan.key_reg_2 = ins.td2;
  plan.rows.resize(st.R);

  auto commit_row = [&](std::uint32_t i, systolic::RowOutcome&& out) {
    auto ra = st.tr_row(ins.td1, i);
    auto rb = st.tr_row(ins.td2, i);
    for (std::uint32_t k = 0; k < st.R; ++k) {
      ra[k] = out.out1[k];
      rb[k] = out.out2[k];
    }
    st.ic[0].counts[i] = out.ic1;
    st.ic[1].counts[i] = out.ic2;
    st.oc[0].counts[i] = out.oc1;
    st.oc[1].counts[i] = out.oc2;
    plan.rows[i] = std::move(out.plan);
  };

  if (st.trace_mode) {
    auto res = systolic::run_array(zip ? systolic::PassKind::zip : systolic::PassKind::sort,
                                   rows, st.R, /*record=*/false);
    for (std::uint32_t i = 0; i < st.R; ++i) commit_row(i, std::move(res.rows[i]));
  } else {
    for (std::uint32_t i = 0; i < st.R; ++i) {
      auto out = zip ? systolic::zip_functional(rows[i].keys_a, rows[i].keys_b, st.R)
                     : systolic::sort_functional(rows[i].keys_a, rows[i].keys_b, st.R);
      commit_row(i, std::move(out));
    }
  }
  st.plan = std::move(plan);

  // Array occupancy is charged to the key instruction of the pair; the value
  // instruction overlaps it.
  st.op_counters.cycle_estimate += systolic::schedule_cycles(
      zip ? systolic::PassKind::zip : systolic::PassKind::sort, st.R, {}, st.R);
}

void exec_value_instr(const Instruction& ins, MachineState& st, bool zip) {
  check_mreg(ins.td1);
  check_mreg(ins.td2);
  check_vreg(ins.vs1);
  check_vreg(ins.vs2);
  if (!st.plan)
    throw plan_error(zip ? "mszipv without a preceding mszipk"
                         : "mssortv without a preceding mssortk");
  if (st.plan->kind != (zip ? PlanKind::zip : PlanKind::sort))
    throw plan_error("value instruction kind does not match the latched plan");

  for (std::uint32_t i = 0; i < st.R; ++i) {
    const std::uint32_t la = row_len(st, ins.vs1, i);
    const std::uint32_t lb = row_len(st, ins.vs2, i);
    const PlanRow& pr = st.plan->rows[i];
    if (la != pr.la || lb != pr.lb)
      throw plan_error("value lengths differ from key lengths in row " + std::to_string(i));

    auto ra = st.tr_row(ins.td1, i);
    auto rb = st.tr_row(ins.td2, i);
    std::vector<float> va(la), vb(lb);
    for (std::uint32_t k = 0; k < la; ++k) va[k] = bits_to_f32(ra[k]);
    for (std::uint32_t k = 0; k < lb; ++k) vb[k] = bits_to_f32(rb[k]);

    auto out = systolic::apply_plan(pr, va, vb, st.R);
    for (std::uint32_t k = 0; k < st.R; ++k) {
      ra[k] = f32_to_bits(out.out1[k]);
      rb[k] = f32_to_bits(out.out2[k]);
    }
  }
  // Counters are untouched by value instructions.
}

void exec_mmv(const Instruction& ins, MachineState& st, bool output_side) {
  check_vreg(ins.vd);
  if (ins.cimm > 1) throw precondition_error("counter index immediate must be 0 or 1");
  const CounterVector& src = output_side ? st.oc[ins.cimm] : st.ic[ins.cimm];
  for (std::uint32_t i = 0; i < st.R; ++i) st.v[ins.vd].lanes[i] = src.counts[i];
}

}  // namespace

Instruction Instruction::mlxe(std::uint8_t td, std::uint64_t base, std::uint8_t vs_off,
                              std::uint8_t vs_len) {
  Instruction i;
  i.op = Opcode::MLXE;
  i.td1 = td;
  i.base = base;
  i.vs2 = vs_off;
  i.vs3 = vs_len;
  return i;
}

Instruction Instruction::msxe(std::uint8_t ts, std::uint64_t base, std::uint8_t vs_off,
                              std::uint8_t vs_len) {
  Instruction i;
  i.op = Opcode::MSXE;
  i.td1 = ts;
  i.base = base;
  i.vs2 = vs_off;
  i.vs3 = vs_len;
  return i;
}

namespace {
Instruction pair_instr(Opcode op, std::uint8_t td1, std::uint8_t td2, std::uint8_t vs1,
                       std::uint8_t vs2) {
  Instruction i;
  i.op = op;
  i.td1 = td1;
  i.td2 = td2;
  i.vs1 = vs1;
  i.vs2 = vs2;
  return i;
}
}  // namespace

Instruction Instruction::mssortk(std::uint8_t td1, std::uint8_t td2, std::uint8_t vs1,
                                 std::uint8_t vs2) {
  return pair_instr(Opcode::MSSORTK, td1, td2, vs1, vs2);
}
Instruction Instruction::mssortv(std::uint8_t td1, std::uint8_t td2, std::uint8_t vs1,
                                 std::uint8_t vs2) {
  return pair_instr(Opcode::MSSORTV, td1, td2, vs1, vs2);
}
Instruction Instruction::mszipk(std::uint8_t td1, std::uint8_t td2, std::uint8_t vs1,
                                std::uint8_t vs2) {
  return pair_instr(Opcode::MSZIPK, td1, td2, vs1, vs2);
}
Instruction Instruction::mszipv(std::uint8_t td1, std::uint8_t td2, std::uint8_t vs1,
                                std::uint8_t vs2) {
  return pair_instr(Opcode::MSZIPV, td1, td2, vs1, vs2);
}
Instruction Instruction::mmv_vi(std::uint8_t vd, std::uint8_t cimm) {
  Instruction i;
  i.op = Opcode::MMV_VI;
  i.vd = vd;
  i.cimm = cimm;
  return i;
}
Instruction Instruction::mmv_vo(std::uint8_t vd, std::uint8_t cimm) {
  Instruction i;
  i.op = Opcode::MMV_VO;
  i.vd = vd;
  i.cimm = cimm;
  return i;
}

std::string Instruction::disasm() const {
  std::ostringstream os;
  os << opcode_name(op);
  switch (op) {
    case Opcode::MLXE:
    case Opcode::MSXE:
      os << " tr" << int(td1) << ", 0x" << std::hex << base << std::dec << ", v" << int(vs2)
         << ", v" << int(vs3);
      break;
    case Opcode::MSSORTK:
    case Opcode::MSSORTV:
    case Opcode::MSZIPK:
    case Opcode::MSZIPV:
      os << " tr" << int(td1) << ", tr" << int(td2) << ", v" << int(vs1) << ", v"
         << int(vs2);
      break;
    case Opcode::MMV_VI:
    case Opcode::MMV_VO:
      os << " v" << int(vd) << ", " << int(cimm);
      break;
  }
  return os.str();
}

void execute(const Instruction& ins, MachineState& st, std::ostream* log) {
  std::vector<std::uint32_t> ic_before[2], oc_before[2];
  if (log) {
    for (int s = 0; s < 2; ++s) {
      ic_before[s] = st.ic[s].counts;
      oc_before[s] = st.oc[s].counts;
    }
  }

  switch (ins.op) {
    case Opcode::MLXE: exec_mlxe(ins, st); break;
    case Opcode::MSXE: exec_msxe(ins, st); break;
    case Opcode::MSSORTK: exec_key_instr(ins, st, false); break;
    case Opcode::MSSORTV: exec_value_instr(ins, st, false); break;
    case Opcode::MSZIPK: exec_key_instr(ins, st, true); break;
    case Opcode::MSZIPV: exec_value_instr(ins, st, true); break;
    case Opcode::MMV_VI: exec_mmv(ins, st, false); break;
    case Opcode::MMV_VO: exec_mmv(ins, st, true); break;
  }
  st.op_counters.instr(ins.op) += 1;

  if (log) {
    *log << ins.disasm();
    auto delta = [&](const char* name, const std::vector<std::uint32_t>& before,
                     const std::vector<std::uint32_t>& after) {
      if (before != after) {
        *log << "  " << name << "=[";
        for (std::size_t i = 0; i < after.size(); ++i)
          *log << (i ? "," : "") << after[i];
        *log << "]";
      }
    };
    delta("IC0", ic_before[0], st.ic[0].counts);
    delta("IC1", ic_before[1], st.ic[1].counts);
    delta("OC0", oc_before[0], st.oc[0].counts);
    delta("OC1", oc_before[1], st.oc[1].counts);
    *log << "\n";
  }
}

OpCounters run_program(std::span<const Instruction> prog, MachineState& st,
                       std::ostream* log) {
  const OpCounters before = st.op_counters;
  for (std::size_t i = 0; i < prog.size(); ++i) {
    try {
      execute(prog[i], st, log);
    } catch (const error& e) {
      throw error("instruction " + std::to_string(i) + " (" + prog[i].disasm() +
                  "): " + e.what());
    }
  }
  OpCounters delta = st.op_counters;
  delta.multiplies -= before.multiplies;
  for (std::size_t i = 0; i < kOpcodeCount; ++i)
    delta.dynamic_instr[i] -= before.dynamic_instr[i];
  delta.mem_row_uops -= before.mem_row_uops;
  delta.merge_iterations -= before.merge_iterations;
  delta.cycle_estimate -= before.cycle_estimate;
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    delta.phase[i].host_seconds -= before.phase[i].host_seconds;
    delta.phase[i].ops -= before.phase[i].ops;
  }
  return delta;
}

}  // namespace spz
