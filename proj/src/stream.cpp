#include "spz/stream.hpp"

#include <algorithm>
#include <numeric>

namespace spz {

KeyValueChunk KeyValueChunk::make(std::span<const key32> ks, std::span<const float> vs,
                                  std::uint32_t capacity) {
  if (ks.size() != vs.size()) throw error("chunk keys/values length mismatch");
  if (ks.size() > capacity) throw precondition_error("chunk longer than capacity");
  KeyValueChunk c;
  c.len = static_cast<std::uint32_t>(ks.size());
  c.keys.assign(ks.begin(), ks.end());
  c.values.assign(vs.begin(), vs.end());
  c.keys.resize(capacity, kInvalidKey);
  c.values.resize(capacity, 0.0f);
  return c;
}

bool KeyValueChunk::sorted() const {
  for (std::uint32_t i = 1; i < len; ++i)
    if (keys[i] <= keys[i - 1]) return false;
  return true;
}

bool Partition::sorted() const {
  for (std::size_t i = 1; i < keys.size(); ++i)
    if (keys[i] <= keys[i - 1]) return false;
  return true;
}

std::vector<std::pair<key32, float>> expand_row(const CsrMatrix& a, const CsrMatrix& b,
                                                std::uint32_t i) {
  if (i >= a.rows) throw precondition_error("expand_row: row out of range");
  if (a.cols != b.rows) throw dimension_error("expand_row: a.cols != b.rows");
  std::vector<std::pair<key32, float>> out;
  auto acs = a.row_cols(i);
  auto avs = a.row_vals(i);
  for (std::size_t p = 0; p < acs.size(); ++p) {
    const std::uint32_t j = acs[p];
    const float av = avs[p];
    auto bcs = b.row_cols(j);
    auto bvs = b.row_vals(j);
    for (std::size_t q = 0; q < bcs.size(); ++q) out.emplace_back(bcs[q], av * bvs[q]);
  }
  return out;
}

KeyValueChunk chunk_sort_oracle(const KeyValueChunk& c) {
  for (std::uint32_t i = 0; i < c.len; ++i)
    if (c.keys[i] == kInvalidKey)
      throw precondition_error("chunk_sort_oracle: sentinel key below len");

  std::vector<std::uint32_t> order(c.len);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
    if (c.keys[x] != c.keys[y]) return c.keys[x] < c.keys[y];
    return x < y;  // duplicates accumulate in ascending original position
  });

  std::vector<key32> keys;
  std::vector<float> vals;
  for (auto p : order) {
    if (!keys.empty() && keys.back() == c.keys[p]) {
      vals.back() += c.values[p];
    } else {
      keys.push_back(c.keys[p]);
      vals.push_back(c.values[p]);
    }
  }
  const auto cap = static_cast<std::uint32_t>(c.keys.size());
  return KeyValueChunk::make(keys, vals, cap);
}

ChunkMergeResult chunk_merge_oracle(const KeyValueChunk& a, const KeyValueChunk& b) {
  if (!a.sorted() || !b.sorted())
    throw precondition_error("chunk_merge_oracle: inputs must be strictly ascending");

  ChunkMergeResult r;
  if (a.len == 0 || b.len == 0) return r;  // lone chunk: nothing merges

  const key32 max_a = a.keys[a.len - 1];
  const key32 max_b = b.keys[b.len - 1];
  std::uint32_t i = 0, j = 0;
  while ((i < a.len && a.keys[i] <= max_b) || (j < b.len && b.keys[j] <= max_a)) {
    const bool take_a = i < a.len && a.keys[i] <= max_b;
    const bool take_b = j < b.len && b.keys[j] <= max_a;
    if (take_a && take_b && a.keys[i] == b.keys[j]) {
      r.merged.emplace_back(a.keys[i], a.values[i] + b.values[j]);
      ++i;
      ++j;
    } else if (take_a && (!take_b || a.keys[i] < b.keys[j])) {
      r.merged.emplace_back(a.keys[i], a.values[i]);
      ++i;
    } else {
      r.merged.emplace_back(b.keys[j], b.values[j]);
      ++j;
    }
  }
  r.consumed_a = i;
  r.consumed_b = j;
  return r;
}

Partition partition_merge_oracle(const Partition& p, const Partition& q) {
  if (!p.sorted() || !q.sorted())
    throw precondition_error("partition_merge_oracle: inputs must be sorted runs");
  Partition out;
  out.keys.reserve(p.size() + q.size());
  out.values.reserve(p.size() + q.size());
  std::size_t i = 0, j = 0;
  while (i < p.size() || j < q.size()) {
    if (i < p.size() && j < q.size() && p.keys[i] == q.keys[j]) {
      out.keys.push_back(p.keys[i]);
      out.values.push_back(p.values[i] + q.values[j]);
      ++i;
      ++j;
    } else if (j == q.size() || (i < p.size() && p.keys[i] < q.keys[j])) {
      out.keys.push_back(p.keys[i]);
      out.values.push_back(p.values[i]);
      ++i;
    } else {
      out.keys.push_back(q.keys[j]);
      out.values.push_back(q.values[j]);
      ++j;
    }
  }
  return out;
}

}  // namespace spz
