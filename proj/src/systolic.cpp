#include "spz/systolic.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace spz::systolic {

namespace {

void check_lane_keys(std::span<const key32> k, std::uint32_t n, const char* what) {
  if (k.size() > n)
    throw precondition_error(std::string(what) + ": chunk length exceeds array dimension");
  for (auto key : k)
    if (key == kInvalidKey)
      throw precondition_error(std::string(what) + ": sentinel key below declared length");
}

void check_sorted(std::span<const key32> k, const char* what) {
  for (std::size_t i = 1; i < k.size(); ++i)
    if (k[i] <= k[i - 1])
      throw precondition_error(std::string(what) + ": side not strictly ascending");
}

std::vector<key32> pad_keys(std::vector<key32> keys, std::uint32_t n) {
  keys.resize(n, kInvalidKey);
  return keys;
}

struct SortedSide {
  std::vector<key32> keys;
  std::vector<PlanSlot> slots;
};

SortedSide sort_side(std::span<const key32> k, std::uint8_t side) {
  std::vector<std::uint32_t> order(k.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
    if (k[x] != k[y]) return k[x] < k[y];
    return x < y;
  });
  SortedSide out;
  for (auto p : order) {
    if (!out.keys.empty() && out.keys.back() == k[p]) {
      out.slots.back().sources.push_back({side, p});
    } else {
      out.keys.push_back(k[p]);
      out.slots.push_back(PlanSlot{{PlanSource{side, p}}});
    }
  }
  return out;
}

}  // namespace

RowOutcome sort_functional(std::span<const key32> a, std::span<const key32> b,
                           std::uint32_t n) {
  check_lane_keys(a, n, "sort");
  check_lane_keys(b, n, "sort");
  auto sa = sort_side(a, 0);
  auto sb = sort_side(b, 1);

  RowOutcome r;
  r.oc1 = static_cast<std::uint32_t>(sa.keys.size());
  r.oc2 = static_cast<std::uint32_t>(sb.keys.size());
  r.ic1 = static_cast<std::uint32_t>(a.size());
  r.ic2 = static_cast<std::uint32_t>(b.size());
  r.out1 = pad_keys(std::move(sa.keys), n);
  r.out2 = pad_keys(std::move(sb.keys), n);
  r.plan.la = r.ic1;
  r.plan.lb = r.ic2;
  r.plan.consumed_a = r.ic1;
  r.plan.consumed_b = r.ic2;
  r.plan.out1 = std::move(sa.slots);
  r.plan.out2 = std::move(sb.slots);
  return r;
}

RowOutcome zip_functional(std::span<const key32> a, std::span<const key32> b,
                          std::uint32_t n) {
  check_lane_keys(a, n, "zip");
  check_lane_keys(b, n, "zip");
  check_sorted(a, "zip");
  check_sorted(b, "zip");

  std::vector<key32> merged;
  std::vector<PlanSlot> slots;
  std::uint32_t i = 0, j = 0;
  if (!a.empty() && !b.empty()) {
    const key32 max_a = a[a.size() - 1];
    const key32 max_b = b[b.size() - 1];
    while ((i < a.size() && a[i] <= max_b) || (j < b.size() && b[j] <= max_a)) {
      const bool ta = i < a.size() && a[i] <= max_b;
      const bool tb = j < b.size() && b[j] <= max_a;
      if (ta && tb && a[i] == b[j]) {
        merged.push_back(a[i]);
        slots.push_back(PlanSlot{{PlanSource{0, i}, PlanSource{1, j}}});
        ++i;
        ++j;
      } else if (ta && (!tb || a[i] < b[j])) {
        merged.push_back(a[i]);
        slots.push_back(PlanSlot{{PlanSource{0, i}}});
        ++i;
      } else {
        merged.push_back(b[j]);
        slots.push_back(PlanSlot{{PlanSource{1, j}}});
        ++j;
      }
    }
  }

  const auto total = static_cast<std::uint32_t>(merged.size());
  RowOutcome r;
  r.oc1 = std::min(total, n);
  r.oc2 = total - r.oc1;
  r.ic1 = i;
  r.ic2 = j;
  r.out1 = pad_keys({merged.begin(), merged.begin() + r.oc1}, n);
  r.out2 = pad_keys({merged.begin() + r.oc1, merged.end()}, n);
  r.plan.la = static_cast<std::uint32_t>(a.size());
  r.plan.lb = static_cast<std::uint32_t>(b.size());
  r.plan.consumed_a = i;
  r.plan.consumed_b = j;
  r.plan.out1.assign(slots.begin(), slots.begin() + r.oc1);
  r.plan.out2.assign(slots.begin() + r.oc1, slots.end());
  return r;
}

ValueRows apply_plan(const PlanRow& row, std::span<const float> va,
                     std::span<const float> vb, std::uint32_t n) {
  if (va.size() != row.la || vb.size() != row.lb)
    throw plan_error("plan-mismatch: value lengths differ from recorded key lengths");
  auto fold = [&](const PlanSlot& slot) {
    float acc = 0.0f;
    bool first = true;
    for (const auto& s : slot.sources) {
      const float v = s.side == 0 ? va[s.pos] : vb[s.pos];
      acc = first ? v : acc + v;
      first = false;
    }
    return acc;
  };
  ValueRows out;
  out.out1.assign(n, 0.0f);
  out.out2.assign(n, 0.0f);
  for (std::size_t k = 0; k < row.out1.size(); ++k) out.out1[k] = fold(row.out1[k]);
  for (std::size_t k = 0; k < row.out2.size(); ++k) out.out2[k] = fold(row.out2[k]);
  return out;
}

std::uint64_t schedule_cycles(PassKind, std::uint32_t n, std::span<const RowLens>,
                              std::uint32_t rows) {
  if (rows == 0) return 0;
  if (rows > n) throw precondition_error("schedule_cycles: rows exceed array dimension");
  // Two passes of 2n+1 each (loop-back stall folded in); back-to-back rows
  // add two cycles per extra row (one per instruction of the pair). The
  // per-row lengths do not matter: the array sweeps every lane.
  return 2ull * (2ull * n + 1ull) + 2ull * (rows - 1ull);
}

// ---------------------------------------------------------------------------
// Trace engine
// ---------------------------------------------------------------------------

namespace {

struct Flit {
  bool present = false;
  bool value_sweep = false;
  std::uint8_t mop = 0;
  std::uint8_t pass = 0;
  TaggedKey k;
  float v = 0.0f;
  std::vector<PlanSource> srcs;
};

struct Delivery {
  std::uint16_t r = 0, c = 0;
  bool west = false;  // destination port
  Flit f;
};

class Engine {
 public:
  Engine(PassKind kind, std::span<const RowPairInput> rows, std::uint32_t n, bool record,
         bool force_value_sweep)
      : kind_(kind), n_(n), in_(rows), record_(record), value_sweep_(force_value_sweep) {
    if (n_ < 2) throw precondition_error("array dimension must be >= 2");
    nrows_ = static_cast<std::uint32_t>(rows.size());
    if (nrows_ == 0 || nrows_ > n_)
      throw precondition_error("row micro-op count must be in [1, n]");
    const char* what = kind_ == PassKind::sort ? "sort" : "zip";
    for (const auto& rp : rows) {
      check_lane_keys(rp.keys_a, n_, what);
      check_lane_keys(rp.keys_b, n_, what);
      if (kind_ == PassKind::zip) {
        check_sorted(rp.keys_a, what);
        check_sorted(rp.keys_b, what);
      }
      value_sweep_ |= !rp.vals_a.empty() || !rp.vals_b.empty();
    }
    if (value_sweep_) {
      for (const auto& rp : rows)
        if (rp.vals_a.size() != rp.keys_a.size() || rp.vals_b.size() != rp.keys_b.size())
          throw plan_error("value lanes must match key lanes for a traced pair");
    }
  }

  EngineResult run();

 private:
  static constexpr std::uint8_t kPassMain = 0;
  static constexpr std::uint8_t kPassCompress = 1;

  PassKind kind_;
  std::uint32_t n_ = 0;
  std::uint32_t nrows_ = 0;
  std::span<const RowPairInput> in_;
  bool record_ = false;
  bool value_sweep_ = false;

  std::vector<std::vector<Delivery>> sched_;
  std::uint32_t pending_ = 0;  // scheduled but undelivered flits

  std::vector<Flit> lw_, ln_;  // per-PE input latches for the current cycle
  std::vector<std::pair<std::uint16_t, std::uint16_t>> active_;
  std::vector<Flit> nw_, nn_;  // latches being filled for the next cycle
  std::vector<std::pair<std::uint16_t, std::uint16_t>> next_active_;
  std::uint32_t latched_next_ = 0;

  std::vector<Routing> states_;  // [pe][mop][pass]

  std::vector<std::uint32_t> wic_, nic_, eoc_, soc_;

  // pass-2 key/value exits per mop per lane
  std::vector<std::vector<Flit>> key_out1_, key_out2_;
  std::vector<ValueRows> val_out_;

  EngineResult res_;

  std::size_t pe_index(std::uint32_t r, std::uint32_t c) const { return r * n_ + c; }
  std::size_t state_index(std::uint32_t r, std::uint32_t c, std::uint32_t mop,
                          std::uint32_t pass) const {
    return (pe_index(r, c) * nrows_ + mop) * 2 + pass;
  }

  std::uint32_t west_row_for_lane(std::uint32_t lane) const {
    // Sorted chunks read ascending from the bottom on the west side, so the
    // merge pass takes lane 0 at the bottom row. The sort pass feeds lanes
    // top-first, which makes duplicate chains combine in ascending lane
    // order (the order the value fold reproduces).
    return kind_ == PassKind::zip ? n_ - 1 - lane : lane;
  }

  void schedule(std::uint32_t t, Delivery d) {
    if (sched_.size() <= t) sched_.resize(t + 1);
    sched_[t].push_back(std::move(d));
    ++pending_;
  }

  void feed_sweep(bool values, std::uint32_t start);
  void latch(std::uint32_t r, std::uint32_t c, bool west, Flit&& f);
  void process_cycle(std::uint32_t t);
  Routing decide(std::uint32_t r, std::uint32_t c, const Flit& w, const Flit& nf) const;
  void emit(std::uint32_t t, std::uint32_t r, std::uint32_t c, bool east, Flit&& f);
  void boundary_exit(std::uint32_t t, bool east, std::uint32_t index, Flit&& f);
  void count_pass1_exit(std::uint32_t t, const Flit& f);
  void record_port(std::vector<PortEvent>& dst, std::uint32_t t, std::uint8_t side,
                   std::uint32_t index, const Flit& f);
};

void Engine::feed_sweep(bool values, std::uint32_t start) {
  for (std::uint32_t m = 0; m < nrows_; ++m) {
    const auto& rp = in_[m];
    const auto la = static_cast<std::uint32_t>(rp.keys_a.size());
    const auto lb = static_cast<std::uint32_t>(rp.keys_b.size());
    for (std::uint32_t lane = 0; lane < n_; ++lane) {
      Flit fw;
      fw.present = true;
      fw.value_sweep = values;
      fw.mop = static_cast<std::uint8_t>(m);
      fw.pass = kPassMain;
      if (lane < la) {
        fw.k = TaggedKey{rp.keys_a[lane], SourceTag::west, false, false, false};
        if (values)
          fw.v = rp.vals_a[lane];
        else
          fw.srcs = {PlanSource{0, lane}};
      }
      const std::uint32_t r = west_row_for_lane(lane);
      schedule(start + m + r, Delivery{static_cast<std::uint16_t>(r), 0, true, std::move(fw)});

      Flit fn;
      fn.present = true;
      fn.value_sweep = values;
      fn.mop = static_cast<std::uint8_t>(m);
      fn.pass = kPassMain;
      if (lane < lb) {
        fn.k = TaggedKey{rp.keys_b[lane], SourceTag::north, false, false, false};
        if (values)
          fn.v = rp.vals_b[lane];
        else
          fn.srcs = {PlanSource{1, lane}};
      }
      schedule(start + m + lane,
               Delivery{0, static_cast<std::uint16_t>(lane), false, std::move(fn)});
    }
  }
}

void Engine::latch(std::uint32_t r, std::uint32_t c, bool west, Flit&& f) {
  auto& slot = west ? nw_[pe_index(r, c)] : nn_[pe_index(r, c)];
  assert(!slot.present && "latch collision");
  const bool was_empty = !nw_[pe_index(r, c)].present && !nn_[pe_index(r, c)].present;
  slot = std::move(f);
  ++latched_next_;
  if (was_empty)
    next_active_.emplace_back(static_cast<std::uint16_t>(r), static_cast<std::uint16_t>(c));
}

Routing Engine::decide(std::uint32_t r, std::uint32_t c, const Flit& w,
                       const Flit& nf) const {
  // Diagonal PEs are hard-coded to switch in the sorting pass and in every
  // compressing pass, keeping the two chunks of a pair separate. The merge
  // pass intermixes chunks, so its diagonal compares like any other PE.
  const bool hard_switch =
      r == c && (w.pass == kPassCompress || kind_ == PassKind::sort);
  if (hard_switch) return Routing::switch_;
  const std::uint64_t wk = w.k.cmp_key();
  const std::uint64_t nk = nf.k.cmp_key();
  if (wk == nk && w.k.valid() && nf.k.valid()) return Routing::combine;
  if (wk > nk) return Routing::forward;  // larger key east: west stays east-bound
  if (nk > wk) return Routing::switch_;  // larger key east: north turns east
  return Routing::forward;               // two non-valid keys; order is immaterial
}

void Engine::emit(std::uint32_t t, std::uint32_t r, std::uint32_t c, bool east,
                  Flit&& f) {
  if (east) {
    if (c + 1 < n_)
      latch(r, c + 1, true, std::move(f));
    else
      boundary_exit(t, true, r, std::move(f));
  } else {
    if (r + 1 < n_)
      latch(r + 1, c, false, std::move(f));
    else
      boundary_exit(t, false, c, std::move(f));
  }
}

void Engine::record_port(std::vector<PortEvent>& dst, std::uint32_t t, std::uint8_t side,
                         std::uint32_t index, const Flit& f) {
  if (!record_ || f.k.source == SourceTag::padding) return;
  PortEvent e;
  e.cycle = t;
  e.side = side;
  e.index = static_cast<std::uint8_t>(index);
  e.mop = f.mop;
  e.pass = f.pass;
  e.value_sweep = f.value_sweep;
  e.key = f.k;
  e.value = f.v;
  dst.push_back(e);
}

void Engine::count_pass1_exit(std::uint32_t t, const Flit& f) {
  const TaggedKey& k = f.k;
  if (k.source == SourceTag::padding) return;
  auto bump = [&](std::vector<std::uint32_t>& ctr, std::uint8_t which) {
    ctr[f.mop] += 1;
    if (record_)
      res_.trace.counter_events.push_back(
          CounterEvent{t, which, f.mop, ctr[f.mop]});
  };
  if (kind_ == PassKind::sort) {
    // Input counters count processed input keys: every non-padding key of the
    // pass, including the invalidated half of a duplicate combine.
    if (k.source == SourceTag::west) bump(wic_, 0);
    if (k.source == SourceTag::north) bump(nic_, 1);
  } else {
    // Merge: count merged keys per input chunk; a combined key consumed one
    // tuple from each side.
    if (k.dup_invalid || !k.merged) return;
    if (k.source == SourceTag::west || k.source == SourceTag::both) bump(wic_, 0);
    if (k.source == SourceTag::north || k.source == SourceTag::both) bump(nic_, 1);
  }
}

void Engine::boundary_exit(std::uint32_t t, bool east, std::uint32_t index, Flit&& f) {
  record_port(res_.trace.exits, t, east ? 2 : 3, index, f);
  if (f.pass == kPassMain) {
    if (!f.value_sweep) {
      count_pass1_exit(t, f);
      // Unmerged keys are excluded between the passes: their position in the
      // output stream is not known yet.
      if (kind_ == PassKind::zip && f.k.valid() && !f.k.merged)
        f.k.excluded_unmerged = true;
    }
    f.pass = kPassCompress;
    // Loop-back path to the opposite side, pipelined via an extra register.
    if (east)
      schedule(t + 2, Delivery{static_cast<std::uint16_t>(index), 0, true, std::move(f)});
    else
      schedule(t + 2, Delivery{0, static_cast<std::uint16_t>(index), false, std::move(f)});
    return;
  }

  // Compress-pass exit: final output. East exits, read bottom to top, are the
  // first register operand; south exits, left to right, the second.
  if (!f.value_sweep) {
    if (res_.first_output_cycle == 0) res_.first_output_cycle = t;
    res_.key_last_cycle = std::max(res_.key_last_cycle, t);
    if (f.k.valid()) {
      auto& ctr = east ? eoc_ : soc_;
      ctr[f.mop] += 1;
      if (record_)
        res_.trace.counter_events.push_back(
            CounterEvent{t, static_cast<std::uint8_t>(east ? 2 : 3), f.mop, ctr[f.mop]});
    }
  }
  res_.pair_last_cycle = std::max(res_.pair_last_cycle, t);
  const std::uint32_t lane = east ? n_ - 1 - index : index;
  if (!f.value_sweep) {
    auto& dst = east ? key_out1_ : key_out2_;
    dst[f.mop][lane] = std::move(f);
  } else {
    auto& dst = east ? val_out_[f.mop].out1 : val_out_[f.mop].out2;
    dst[lane] = f.v;
  }
}

void Engine::process_cycle(std::uint32_t t) {
  // Move next-cycle latches in, then apply externally scheduled arrivals.
  std::swap(lw_, nw_);
  std::swap(ln_, nn_);
  std::swap(active_, next_active_);
  next_active_.clear();
  latched_next_ = 0;

  if (t < sched_.size()) {
    for (auto& d : sched_[t]) {
      record_port(res_.trace.enters, t, d.west ? 0 : 1, d.west ? d.r : d.c, d.f);
      auto& slot = d.west ? lw_[pe_index(d.r, d.c)] : ln_[pe_index(d.r, d.c)];
      assert(!slot.present && "arrival collides with latched data");
      const bool was_empty =
          !lw_[pe_index(d.r, d.c)].present && !ln_[pe_index(d.r, d.c)].present;
      slot = std::move(d.f);
      --pending_;
      if (was_empty) active_.emplace_back(d.r, d.c);
    }
    sched_[t].clear();
  }

  std::sort(active_.begin(), active_.end());
  for (auto [r, c] : active_) {
    Flit w = std::move(lw_[pe_index(r, c)]);
    Flit nf = std::move(ln_[pe_index(r, c)]);
    lw_[pe_index(r, c)] = Flit{};
    ln_[pe_index(r, c)] = Flit{};
    assert(w.present && nf.present && "unpaired PE inputs");
    assert(w.mop == nf.mop && w.pass == nf.pass && w.value_sweep == nf.value_sweep);

    if (r == 0 && c == 0) res_.pe00_busy_cycles.push_back(t);

    const TaggedKey w_in = w.k;
    const TaggedKey n_in = nf.k;
    const float wv_in = w.v;
    const float nv_in = nf.v;

    Routing d;
    if (!w.value_sweep) {
      d = decide(r, c, w, nf);
      states_[state_index(r, c, w.mop, w.pass)] = d;
      if (kind_ == PassKind::zip && w.pass == kPassMain) {
        // Merge-bit rule: flipped when compared with a larger or equal valid
        // key from the other input chunk (combined keys stand for both).
        auto other = [](SourceTag a, SourceTag b) {
          return a != b || a == SourceTag::both || b == SourceTag::both;
        };
        if (w.k.valid() && nf.k.valid() && other(w.k.source, nf.k.source)) {
          if (nf.k.key >= w.k.key) w.k.merged = true;
          if (w.k.key >= nf.k.key) nf.k.merged = true;
        }
      }
    } else {
      d = states_[state_index(r, c, w.mop, w.pass)];
    }

    Flit east, south;
    switch (d) {
      case Routing::forward:
        east = std::move(w);
        south = std::move(nf);
        break;
      case Routing::switch_:
        east = std::move(nf);
        south = std::move(w);
        break;
      case Routing::combine: {
        // One combined valid key to the south; the east output is invalid.
        south = w;  // copy tags/meta
        south.k.merged = w.k.merged || nf.k.merged;
        if (!south.value_sweep) {
          if (kind_ == PassKind::zip) south.k.source = SourceTag::both;
          // Fold order: operand whose first source lane comes first leads.
          const bool w_first =
              std::make_pair(w.srcs.front().side, w.srcs.front().pos) <
              std::make_pair(nf.srcs.front().side, nf.srcs.front().pos);
          const Flit& lead = w_first ? w : nf;
          const Flit& tail = w_first ? nf : w;
          south.srcs = lead.srcs;
          south.srcs.insert(south.srcs.end(), tail.srcs.begin(), tail.srcs.end());
        } else {
          south.v = w.v + nf.v;
        }
        east = Flit{};
        east.present = true;
        east.value_sweep = w.value_sweep;
        east.mop = w.mop;
        east.pass = w.pass;
        east.k = TaggedKey{w.k.key, w.k.source, false, true, false};
        east.v = 0.0f;
        break;
      }
      case Routing::initial:
        assert(false && "processing with no routing decision");
        east = std::move(w);
        south = std::move(nf);
        break;
    }

    if (record_) {
      PeEvent e;
      e.cycle = t;
      e.r = static_cast<std::uint8_t>(r);
      e.c = static_cast<std::uint8_t>(c);
      e.mop = east.mop;
      e.pass = east.pass;
      e.value_sweep = east.value_sweep;
      e.active = !(w_in.source == SourceTag::padding &&
                   n_in.source == SourceTag::padding);
      e.west_in = w_in;
      e.north_in = n_in;
      e.west_v = wv_in;
      e.north_v = nv_in;
      e.decision = d;
      e.east_out = east.k;
      e.south_out = south.k;
      e.east_v = east.v;
      e.south_v = south.v;
      res_.trace.pe_events.push_back(e);
    }

    emit(t, r, c, true, std::move(east));
    emit(t, r, c, false, std::move(south));
  }
  active_.clear();
  res_.trace.last_cycle = std::max(res_.trace.last_cycle, t);
}

EngineResult Engine::run() {
  const std::size_t pes = static_cast<std::size_t>(n_) * n_;
  lw_.assign(pes, Flit{});
  ln_.assign(pes, Flit{});
  nw_.assign(pes, Flit{});
  nn_.assign(pes, Flit{});
  states_.assign(pes * nrows_ * 2, Routing::initial);
  wic_.assign(nrows_, 0);
  nic_.assign(nrows_, 0);
  eoc_.assign(nrows_, 0);
  soc_.assign(nrows_, 0);
  key_out1_.assign(nrows_, std::vector<Flit>(n_));
  key_out2_.assign(nrows_, std::vector<Flit>(n_));
  val_out_.assign(nrows_, ValueRows{std::vector<float>(n_, 0.0f),
                                    std::vector<float>(n_, 0.0f)});
  res_.trace.kind = kind_;
  res_.trace.n = n_;
  res_.trace.rows = nrows_;
  res_.trace.has_value_sweep = value_sweep_;
  res_.first_input_cycle = 1;

  feed_sweep(false, 1);
  if (value_sweep_) {
    // The value instruction of the pair starts as soon as the top-left PE has
    // retired its last key-compress micro-op.
    feed_sweep(true, nrows_ + n_ + 2);
  }

  std::uint32_t t = 0;
  while (pending_ > 0 || latched_next_ > 0) {
    ++t;
    process_cycle(t);
    if (t > 16u * (n_ + nrows_ + 4)) throw error("systolic engine failed to drain");
  }

  // Assemble per-row outcomes: compress leaves valid keys as a prefix.
  res_.rows.resize(nrows_);
  for (std::uint32_t m = 0; m < nrows_; ++m) {
    RowOutcome& out = res_.rows[m];
    out.out1.assign(n_, kInvalidKey);
    out.out2.assign(n_, kInvalidKey);
    out.oc1 = eoc_[m];
    out.oc2 = soc_[m];
    out.ic1 = wic_[m];
    out.ic2 = nic_[m];
    out.plan.la = static_cast<std::uint32_t>(in_[m].keys_a.size());
    out.plan.lb = static_cast<std::uint32_t>(in_[m].keys_b.size());
    out.plan.consumed_a = wic_[m];
    out.plan.consumed_b = nic_[m];
    out.plan.out1.resize(out.oc1);
    out.plan.out2.resize(out.oc2);
    for (std::uint32_t lane = 0; lane < n_; ++lane) {
      Flit& f1 = key_out1_[m][lane];
      if (lane < out.oc1) {
        if (!f1.k.valid()) throw error("compress left a gap in the east outputs");
        out.out1[lane] = f1.k.key;
        out.plan.out1[lane].sources = std::move(f1.srcs);
      }
      Flit& f2 = key_out2_[m][lane];
      if (lane < out.oc2) {
        if (!f2.k.valid()) throw error("compress left a gap in the south outputs");
        out.out2[lane] = f2.k.key;
        out.plan.out2[lane].sources = std::move(f2.srcs);
      }
    }
  }
  if (value_sweep_) {
    for (std::uint32_t m = 0; m < nrows_; ++m) {
      for (std::uint32_t lane = res_.rows[m].oc1; lane < n_; ++lane)
        val_out_[m].out1[lane] = 0.0f;
      for (std::uint32_t lane = res_.rows[m].oc2; lane < n_; ++lane)
        val_out_[m].out2[lane] = 0.0f;
    }
    res_.values = std::move(val_out_);
  }
  return std::move(res_);
}

}  // namespace

EngineResult run_array(PassKind kind, std::span<const RowPairInput> rows, std::uint32_t n,
                       bool record, bool force_value_sweep) {
  Engine e(kind, rows, n, record, force_value_sweep);
  return e.run();
}

EngineResult trace_sort(std::span<const key32> a, std::span<const key32> b,
                        std::uint32_t n, bool record) {
  RowPairInput rp;
  rp.keys_a.assign(a.begin(), a.end());
  rp.keys_b.assign(b.begin(), b.end());
  return run_array(PassKind::sort, std::span<const RowPairInput>(&rp, 1), n, record);
}

EngineResult trace_zip(std::span<const key32> a, std::span<const key32> b,
                       std::uint32_t n, bool record) {
  RowPairInput rp;
  rp.keys_a.assign(a.begin(), a.end());
  rp.keys_b.assign(b.begin(), b.end());
  return run_array(PassKind::zip, std::span<const RowPairInput>(&rp, 1), n, record);
}

// ---------------------------------------------------------------------------
// Renderers
// ---------------------------------------------------------------------------

namespace {

std::string key_str(const TaggedKey& k) {
  if (k.source == SourceTag::padding) return "-";
  if (k.dup_invalid) return "d";
  if (k.excluded_unmerged) return "x";
  if (k.key == kInvalidKey) return "inf";
  std::string s = std::to_string(k.key);
  if (k.source == SourceTag::west) s += "w";
  if (k.source == SourceTag::north) s += "n";
  if (k.source == SourceTag::both) s += "*";
  if (k.merged) s += "+";
  return s;
}

const char* routing_str(Routing r) {
  switch (r) {
    case Routing::forward: return "F";
    case Routing::switch_: return "X";
    case Routing::combine: return "C";
    default: return "?";
  }
}

const char* side_str(std::uint8_t s) {
  switch (s) {
    case 0: return "W";
    case 1: return "N";
    case 2: return "E";
    default: return "S";
  }
}

const char* counter_str(std::uint8_t c) {
  switch (c) {
    case 0: return "W_IC";
    case 1: return "N_IC";
    case 2: return "E_OC";
    default: return "S_OC";
  }
}

nlohmann::json key_json(const TaggedKey& k) {
  nlohmann::json j;
  if (k.source == SourceTag::padding) {
    j["kind"] = "padding";
    return j;
  }
  j["kind"] = k.dup_invalid ? "dup" : (k.excluded_unmerged ? "excluded" : "key");
  j["key"] = k.key;
  j["source"] = k.source == SourceTag::west   ? "west"
                : k.source == SourceTag::north ? "north"
                                               : "both";
  j["merged"] = k.merged;
  return j;
}

}  // namespace

std::string render_trace_text(const CycleTrace& t) {
  std::ostringstream os;
  os << "systolic " << (t.kind == PassKind::sort ? "sort" : "zip") << " n=" << t.n
     << " rows=" << t.rows << (t.has_value_sweep ? " key+value" : " key-only") << "\n";

  std::size_t ip = 0, xp = 0, pp = 0, cp = 0;
  for (std::uint32_t cyc = 1; cyc <= t.last_cycle; ++cyc) {
    // Gather this cycle's slices (all event lists are cycle-ordered).
    const std::size_t ip0 = ip, xp0 = xp, pp0 = pp, cp0 = cp;
    while (ip < t.enters.size() && t.enters[ip].cycle == cyc) ++ip;
    while (xp < t.exits.size() && t.exits[xp].cycle == cyc) ++xp;
    while (pp < t.pe_events.size() && t.pe_events[pp].cycle == cyc) ++pp;
    while (cp < t.counter_events.size() && t.counter_events[cp].cycle == cyc) ++cp;
    if (ip == ip0 && xp == xp0 && pp == pp0 && cp == cp0) continue;

    os << "cycle " << cyc << "\n";
    for (std::size_t k = ip0; k < ip; ++k) {
      const auto& e = t.enters[k];
      os << "  in  " << side_str(e.side) << int(e.index) << " m" << int(e.mop) << " p"
         << int(e.pass) << (e.value_sweep ? " val=" : " key=")
         << (e.value_sweep ? std::to_string(e.value) : key_str(e.key)) << "\n";
    }
    // PE activity grid: letter = pass kind, '.' = idle this cycle.
    std::vector<std::string> grid(t.n, std::string(t.n, '.'));
    for (std::size_t k = pp0; k < pp; ++k) {
      const auto& e = t.pe_events[k];
      char ch = e.pass == 0 ? (t.kind == PassKind::sort ? 'S' : 'Z') : 'C';
      if (e.value_sweep) ch = static_cast<char>(ch - 'A' + 'a');
      if (!e.active) ch = '-';
      grid[e.r][e.c] = ch;
    }
    for (std::uint32_t r = 0; r < t.n; ++r) os << "    |" << grid[r] << "|\n";
    for (std::size_t k = pp0; k < pp; ++k) {
      const auto& e = t.pe_events[k];
      if (!e.active) continue;
      os << "  pe(" << int(e.r) << "," << int(e.c) << ") m" << int(e.mop) << " p"
         << int(e.pass);
      if (e.value_sweep)
        os << " vW=" << e.west_v << " vN=" << e.north_v << " -> " << routing_str(e.decision)
           << " vE=" << e.east_v << " vS=" << e.south_v;
      else
        os << " W=" << key_str(e.west_in) << " N=" << key_str(e.north_in) << " -> "
           << routing_str(e.decision) << " E=" << key_str(e.east_out)
           << " S=" << key_str(e.south_out);
      os << "\n";
    }
    for (std::size_t k = xp0; k < xp; ++k) {
      const auto& e = t.exits[k];
      os << "  out " << side_str(e.side) << int(e.index) << " m" << int(e.mop) << " p"
         << int(e.pass) << (e.value_sweep ? " val=" : " key=")
         << (e.value_sweep ? std::to_string(e.value) : key_str(e.key)) << "\n";
    }
    for (std::size_t k = cp0; k < cp; ++k) {
      const auto& e = t.counter_events[k];
      os << "  ctr " << counter_str(e.counter) << "[" << int(e.lane) << "] = " << e.value
         << "\n";
    }
  }
  return os.str();
}

std::string render_trace_json(const CycleTrace& t) {
  nlohmann::json j;
  j["schema"] = 1;
  j["kind"] = t.kind == PassKind::sort ? "sort" : "zip";
  j["n"] = t.n;
  j["rows"] = t.rows;
  j["value_sweep"] = t.has_value_sweep;
  j["last_cycle"] = t.last_cycle;
  auto port_json = [](const PortEvent& e) {
    nlohmann::json o;
    o["cycle"] = e.cycle;
    o["side"] = side_str(e.side);
    o["index"] = e.index;
    o["mop"] = e.mop;
    o["pass"] = e.pass;
    o["value_sweep"] = e.value_sweep;
    o["key"] = key_json(e.key);
    if (e.value_sweep) o["value"] = e.value;
    return o;
  };
  j["enters"] = nlohmann::json::array();
  for (const auto& e : t.enters) j["enters"].push_back(port_json(e));
  j["exits"] = nlohmann::json::array();
  for (const auto& e : t.exits) j["exits"].push_back(port_json(e));
  j["events"] = nlohmann::json::array();
  for (const auto& e : t.pe_events) {
    nlohmann::json o;
    o["cycle"] = e.cycle;
    o["pe"] = {e.r, e.c};
    o["mop"] = e.mop;
    o["pass"] = e.pass;
    o["value_sweep"] = e.value_sweep;
    o["active"] = e.active;
    o["decision"] = routing_str(e.decision);
    o["inputs"] = {key_json(e.west_in), key_json(e.north_in)};
    o["outputs"] = {key_json(e.east_out), key_json(e.south_out)};
    if (e.value_sweep) {
      o["values_in"] = {e.west_v, e.north_v};
      o["values_out"] = {e.east_v, e.south_v};
    }
    j["events"].push_back(o);
  }
  j["counters"] = nlohmann::json::array();
  for (const auto& e : t.counter_events) {
    nlohmann::json o;
    o["cycle"] = e.cycle;
    o["counter"] = counter_str(e.counter);
    o["lane"] = e.lane;
    o["value"] = e.value;
    j["counters"].push_back(o);
  }
  return j.dump(2);
}

}  // namespace spz::systolic
