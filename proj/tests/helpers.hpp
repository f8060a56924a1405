#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "spz/csr.hpp"
#include "spz/generate.hpp"
#include "spz/stream.hpp"

namespace spz::test {

// Brute-force dense product in double; the independent cross-check for
// reference_spgemm.
inline std::vector<std::vector<double>> dense_matmul(const CsrMatrix& a,
                                                     const CsrMatrix& b) {
  std::vector<std::vector<double>> da(a.rows, std::vector<double>(a.cols, 0.0));
  std::vector<std::vector<double>> db(b.rows, std::vector<double>(b.cols, 0.0));
  for (std::uint32_t i = 0; i < a.rows; ++i) {
    auto cs = a.row_cols(i);
    auto vs = a.row_vals(i);
    for (std::size_t k = 0; k < cs.size(); ++k) da[i][cs[k]] = vs[k];
  }
  for (std::uint32_t i = 0; i < b.rows; ++i) {
    auto cs = b.row_cols(i);
    auto vs = b.row_vals(i);
    for (std::size_t k = 0; k < cs.size(); ++k) db[i][cs[k]] = vs[k];
  }
  std::vector<std::vector<double>> c(a.rows, std::vector<double>(b.cols, 0.0));
  for (std::uint32_t i = 0; i < a.rows; ++i)
    for (std::uint32_t k = 0; k < a.cols; ++k)
      for (std::uint32_t j = 0; j < b.cols; ++j) c[i][j] += da[i][k] * db[k][j];
  return c;
}

inline bool csr_matches_dense(const CsrMatrix& got,
                              const std::vector<std::vector<double>>& want,
                              double rel = 1e-6) {
  for (std::uint32_t i = 0; i < got.rows; ++i) {
    std::size_t k = 0;
    auto cs = got.row_cols(i);
    auto vs = got.row_vals(i);
    for (std::uint32_t j = 0; j < got.cols; ++j) {
      const double w = want[i][j];
      const bool present = k < cs.size() && cs[k] == j;
      if (w == 0.0) {
        if (present) return false;
        continue;
      }
      if (!present) return false;
      const double diff = std::abs(static_cast<double>(vs[k]) - w);
      if (diff > rel * std::max(1.0, std::abs(w))) return false;
      ++k;
    }
    if (k != cs.size()) return false;
  }
  return true;
}

// Random unsorted chunk keys over a small alphabet.
inline std::vector<key32> random_keys(Rng& rng, std::uint32_t len, key32 alphabet) {
  std::vector<key32> out(len);
  for (auto& k : out) k = static_cast<key32>(rng.below(alphabet));
  return out;
}

// Random strictly ascending keys (subset of [0, universe)).
inline std::vector<key32> random_sorted_keys(Rng& rng, std::uint32_t len,
                                             key32 universe) {
  std::vector<key32> out;
  key32 next = 0;
  for (std::uint32_t i = 0; i < len; ++i) {
    const key32 room = universe - next - (len - i - 1);
    if (room == 0) break;
    next += static_cast<key32>(rng.below(room));
    out.push_back(next);
    ++next;
  }
  return out;
}

inline std::vector<float> random_values(Rng& rng, std::size_t len) {
  std::vector<float> out(len);
  for (auto& v : out) v = static_cast<float>(rng.uniform(-4.0, 4.0));
  return out;
}

}  // namespace spz::test
