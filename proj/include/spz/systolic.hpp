#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spz/reorder_plan.hpp"
#include "spz/types.hpp"

namespace spz::systolic {

enum class PassKind : std::uint8_t { sort, zip };

/// Per-PE routing decision, replayed by the paired value instruction.
enum class Routing : std::uint8_t { initial, forward, switch_, combine };

enum class SourceTag : std::uint8_t { west, north, both, padding };

/// A key in flight through the array, with the tag bits the datapath carries.
struct TaggedKey {
  key32 key = kInvalidKey;
  SourceTag source = SourceTag::padding;
  bool merged = false;             // compared with a >= key from the other chunk
  bool dup_invalid = false;        // excluded half of a duplicate combine
  bool excluded_unmerged = false;  // zip key that never merged; dropped in compress

  /// Sentinel, duplicate-invalidated, padding and excluded keys all compare
  /// greater than any valid key.
  bool valid() const {
    return key != kInvalidKey && !dup_invalid && !excluded_unmerged &&
           source != SourceTag::padding;
  }
  std::uint64_t cmp_key() const {
    return valid() ? key : (1ull << 32);
  }
};

/// Outcome of one row micro-op: sorted/merged keys per output register lane,
/// counter values, and the reorder plan row for the value pass.
struct RowOutcome {
  std::vector<key32> out1;  // length n, sentinel padded
  std::vector<key32> out2;
  std::uint32_t oc1 = 0;
  std::uint32_t oc2 = 0;
  std::uint32_t ic1 = 0;
  std::uint32_t ic2 = 0;
  PlanRow plan;
};

/// Sorts both chunks independently, combining duplicates (semantics of
/// chunk_sort_oracle applied per side). ic = input lengths, oc = distinct-key
/// counts.
RowOutcome sort_functional(std::span<const key32> a, std::span<const key32> b,
                           std::uint32_t n);

/// Merges two sorted chunks; merged list of length L splits as
/// out1 = merged[0:min(L,n)], out2 = merged[n:L]. ic = consumed counts.
RowOutcome zip_functional(std::span<const key32> a, std::span<const key32> b,
                          std::uint32_t n);

struct ValueRows {
  std::vector<float> out1;  // length n, zero padded
  std::vector<float> out2;
};

/// Shuffles and accumulates values per the plan row; each output lane is the
/// left fold of its source lanes. Lengths must match the plan.
ValueRows apply_plan(const PlanRow& row, std::span<const float> va,
                     std::span<const float> vb, std::uint32_t n);

struct RowLens {
  std::uint32_t la = 0;
  std::uint32_t lb = 0;
};

/// First-order occupancy of one key/value instruction pair: `rows` micro-ops
/// issued back-to-back, each traversing two passes of latency 2n+1 with a
/// one-cycle loop-back stall folded in. The array sweeps all lanes regardless
/// of per-row lengths, so the cost is length-independent:
///   T = 2*(2n+1) + 2*(rows-1),  T(0) = 0.
/// The value instruction starts as soon as the top-left PE retires its last
/// key-compress micro-op; the trace engine reproduces T exactly.
std::uint64_t schedule_cycles(PassKind kind, std::uint32_t n,
                              std::span<const RowLens> row_lengths, std::uint32_t rows);

// ---------------------------------------------------------------------------
// Cycle-by-cycle trace engine
// ---------------------------------------------------------------------------

struct PeEvent {
  std::uint32_t cycle = 0;
  std::uint8_t r = 0, c = 0;
  std::uint8_t mop = 0;   // micro-op (register row) index
  std::uint8_t pass = 0;  // 0 = sort/merge pass, 1 = compress pass
  bool value_sweep = false;
  bool active = false;  // at least one non-padding input
  TaggedKey west_in, north_in;
  Routing decision = Routing::initial;
  TaggedKey east_out, south_out;
  float west_v = 0, north_v = 0, east_v = 0, south_v = 0;  // value sweep only
};

struct PortEvent {  // boundary enter/exit
  std::uint32_t cycle = 0;
  std::uint8_t side = 0;  // 0=W 1=N 2=E 3=S
  std::uint8_t index = 0;  // row for W/E, column for N/S
  std::uint8_t mop = 0;
  std::uint8_t pass = 0;
  bool value_sweep = false;
  TaggedKey key;
  float value = 0;
};

struct CounterEvent {
  std::uint32_t cycle = 0;
  std::uint8_t counter = 0;  // 0=W_IC 1=N_IC 2=E_OC 3=S_OC
  std::uint8_t lane = 0;
  std::uint32_t value = 0;  // value after the increment
};

struct CycleTrace {
  PassKind kind = PassKind::sort;
  std::uint32_t n = 0;
  std::uint32_t rows = 0;
  bool has_value_sweep = false;
  std::vector<PeEvent> pe_events;
  std::vector<PortEvent> enters;
  std::vector<PortEvent> exits;
  std::vector<CounterEvent> counter_events;
  std::uint32_t last_cycle = 0;
};

/// One register-row micro-op's inputs. Values may be empty (key sweep only);
/// when present they are replayed through the recorded routing states.
struct RowPairInput {
  std::vector<key32> keys_a;  // west operand, lane order
  std::vector<key32> keys_b;  // north operand
  std::vector<float> vals_a;
  std::vector<float> vals_b;
};

struct EngineResult {
  std::vector<RowOutcome> rows;
  std::vector<ValueRows> values;  // replayed through routing states, if swept
  std::uint32_t first_input_cycle = 0;
  std::uint32_t first_output_cycle = 0;  // first compress-pass exit (key sweep)
  std::uint32_t key_last_cycle = 0;
  std::uint32_t pair_last_cycle = 0;  // through the value sweep when present
  std::vector<std::uint32_t> pe00_busy_cycles;
  CycleTrace trace;  // populated when recording
};

/// Simulates the array cycle by cycle: staggered entry, two passes linked by
/// pipelined loop-back paths, routing-state capture, tag propagation and
/// counter updates. Micro-ops enter back-to-back; a paired value sweep starts
/// once the top-left PE retires its last key-compress op.
EngineResult run_array(PassKind kind, std::span<const RowPairInput> rows, std::uint32_t n,
                       bool record, bool force_value_sweep = false);

/// Single-row conveniences matching the functional signatures.
EngineResult trace_sort(std::span<const key32> a, std::span<const key32> b,
                        std::uint32_t n, bool record = true);
EngineResult trace_zip(std::span<const key32> a, std::span<const key32> b,
                       std::uint32_t n, bool record = true);

/// Human-readable grid-per-cycle rendering (one block per cycle); intended
/// for n <= 8.
std::string render_trace_text(const CycleTrace& t);

/// JSON event stream; bit-exact across runs.
std::string render_trace_json(const CycleTrace& t);

}  // namespace spz::systolic
