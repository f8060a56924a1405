#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "spz/csr.hpp"
#include "spz/types.hpp"

namespace spz {

/// Up to R (key, value) pairs; the register-row-sized unit moved through the
/// systolic array. Positions >= len hold the sentinel key.
struct KeyValueChunk {
  std::vector<key32> keys;
  std::vector<float> values;
  std::uint32_t len = 0;

  static KeyValueChunk make(std::span<const key32> ks, std::span<const float> vs,
                            std::uint32_t capacity);
  bool sorted() const;  // strictly ascending keys over [0, len)
};

/// One sorted run of a stream: concatenated keys strictly ascending.
struct Partition {
  std::vector<key32> keys;
  std::vector<float> values;

  std::size_t size() const { return keys.size(); }
  bool sorted() const;
};

/// Intermediate products of output row i of A*B, emitted j-major then k:
/// one (k, A[i][j]*B[j][k]) tuple per contributing pair.
std::vector<std::pair<key32, float>> expand_row(const CsrMatrix& a, const CsrMatrix& b,
                                                std::uint32_t i);

/// Reference semantics of the key/value sorting instruction pair: sort keys
/// ascending, combine duplicates, each surviving key's value being the sum of
/// its duplicates' values in ascending original-position order.
KeyValueChunk chunk_sort_oracle(const KeyValueChunk& c);

struct ChunkMergeResult {
  std::vector<std::pair<key32, float>> merged;  // ascending, duplicates combined
  std::uint32_t consumed_a = 0;
  std::uint32_t consumed_b = 0;
};

/// Reference semantics of one merge step over two sorted chunks. With both
/// sides non-empty, an element is mergeable iff it is <= the other side's
/// maximum; equal keys combine (a's value + b's value). With exactly one side
/// empty nothing merges: the merge bit of a lone chunk is never flipped, and
/// tail handling belongs to the software loop above this level.
ChunkMergeResult chunk_merge_oracle(const KeyValueChunk& a, const KeyValueChunk& b);

/// Full two-run merge with cross-run duplicate accumulation (merge sort with
/// combining); the end state the chunked loop must reproduce.
Partition partition_merge_oracle(const Partition& p, const Partition& q);

}  // namespace spz
