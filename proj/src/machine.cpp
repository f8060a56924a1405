#include "spz/machine.hpp"

#include <cstring>
#include <sstream>

#include "json.hpp"

namespace spz {

std::uint64_t FlatMemory::alloc(std::uint64_t n_bytes) {
  const std::uint64_t base = (bytes_.size() + 3ull) & ~3ull;
  bytes_.resize(base + n_bytes, 0);
  return base;
}

void FlatMemory::release(std::uint64_t m) {
  if (m > bytes_.size()) throw mem_fault("release beyond allocation", m);
  bytes_.resize(m);
}

void FlatMemory::check(std::uint64_t addr, std::uint64_t len) const {
  if (addr + len < addr || addr + len > bytes_.size())
    throw mem_fault("access outside allocated memory", addr);
}

std::uint32_t FlatMemory::read_word(std::uint64_t addr) const {
  check(addr, 4);
  std::uint32_t w = 0;
  for (int i = 3; i >= 0; --i) w = (w << 8) | bytes_[addr + i];
  return w;
}

void FlatMemory::write_word(std::uint64_t addr, std::uint32_t w) {
  check(addr, 4);
  for (int i = 0; i < 4; ++i) bytes_[addr + i] = static_cast<std::uint8_t>(w >> (8 * i));
}

std::vector<std::uint32_t> FlatMemory::read_words(std::uint64_t addr,
                                                  std::uint64_t n) const {
  check(addr, n * 4);
  std::vector<std::uint32_t> out(n);
  for (std::uint64_t i = 0; i < n; ++i) out[i] = read_word(addr + 4 * i);
  return out;
}

void FlatMemory::write_words(std::uint64_t addr, std::span<const std::uint32_t> data) {
  check(addr, data.size() * 4);
  for (std::size_t i = 0; i < data.size(); ++i) write_word(addr + 4 * i, data[i]);
}

float FlatMemory::read_f32(std::uint64_t addr) const {
  const std::uint32_t bits = read_word(addr);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

void FlatMemory::write_f32(std::uint64_t addr, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_word(addr, bits);
}

MachineState::MachineState(std::uint32_t lanes) : R(lanes) {
  if (R < kMinLanes || R > kMaxLanes)
    throw precondition_error("machine lane count must be in [2, 64]");
  tr.resize(kNumMatrixRegs);
  for (auto& t : tr) t.lanes.assign(static_cast<std::size_t>(R) * R, 0);
  v.resize(kNumVectorRegs);
  for (auto& vr : v) vr.lanes.assign(R, 0);
  for (auto& c : ic) c.counts.assign(R, 0);
  for (auto& c : oc) c.counts.assign(R, 0);
}

void MachineState::vadd(std::uint32_t vd, std::uint32_t vs1, std::uint32_t vs2) {
  for (std::uint32_t i = 0; i < R; ++i)
    v[vd].lanes[i] = v[vs1].lanes[i] + v[vs2].lanes[i];
}

void MachineState::set_vlanes(std::uint32_t vd, std::span<const std::uint32_t> values) {
  for (std::uint32_t i = 0; i < R && i < values.size(); ++i)
    v[vd].lanes[i] = values[i];
}

std::span<std::uint32_t> MachineState::tr_row(std::uint32_t reg, std::uint32_t row) {
  return {tr[reg].lanes.data() + static_cast<std::size_t>(row) * R, R};
}

std::span<const std::uint32_t> MachineState::tr_row(std::uint32_t reg,
                                                    std::uint32_t row) const {
  return {tr[reg].lanes.data() + static_cast<std::size_t>(row) * R, R};
}

std::string snapshot_json(const MachineState& st) {
  nlohmann::json j;
  j["schema"] = 1;
  j["r"] = st.R;
  auto hex = [](std::uint32_t w) {
    char buf[11];
    std::snprintf(buf, sizeof(buf), "0x%08x", w);
    return std::string(buf);
  };
  j["tr"] = nlohmann::json::array();
  for (const auto& t : st.tr) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::uint32_t r = 0; r < st.R; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (std::uint32_t c = 0; c < st.R; ++c) row.push_back(hex(t.word(r, c, st.R)));
      rows.push_back(row);
    }
    j["tr"].push_back(rows);
  }
  j["v"] = nlohmann::json::array();
  for (const auto& vr : st.v) j["v"].push_back(vr.lanes);
  j["ic"] = {st.ic[0].counts, st.ic[1].counts};
  j["oc"] = {st.oc[0].counts, st.oc[1].counts};
  if (st.plan) {
    nlohmann::json p;
    p["kind"] = st.plan->kind == PlanKind::sort ? "sort" : "zip";
    p["key_regs"] = {st.plan->key_reg_1, st.plan->key_reg_2};
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : st.plan->rows) {
      nlohmann::json o;
      o["la"] = r.la;
      o["lb"] = r.lb;
      o["consumed"] = {r.consumed_a, r.consumed_b};
      o["out_len"] = {r.out1.size(), r.out2.size()};
      rows.push_back(o);
    }
    p["rows"] = rows;
    j["plan"] = p;
  } else {
    j["plan"] = nullptr;
  }
  j["mem_bytes"] = st.mem.size();
  return j.dump(2);
}

}  // namespace spz
