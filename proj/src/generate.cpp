#include "spz/generate.hpp"

#include <algorithm>

namespace spz {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next() {
  // xoshiro256**
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t Rng::below(std::uint64_t n) {
  // Modulo bias is irrelevant at desk scale (n << 2^64).
  return n == 0 ? 0 : next() % n;
}

CsrMatrix gen_random(std::uint32_t rows, std::uint32_t cols, double density,
                     std::uint64_t seed) {
  Rng rng(seed);
  CsrMatrix m(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) {
      if (rng.uniform01() < density) {
        m.col_idx.push_back(j);
        m.values.push_back(static_cast<float>(rng.uniform(-1.0, 1.0)));
      }
    }
    m.row_ptr[i + 1] = m.col_idx.size();
  }
  return m;
}

CsrMatrix gen_skewed(std::uint32_t rows, std::uint32_t cols, std::uint32_t heavy_rows,
                     std::uint32_t heavy_nnz, std::uint32_t light_nnz,
                     std::uint64_t seed) {
  Rng rng(seed);
  heavy_rows = std::min(heavy_rows, rows);
  heavy_nnz = std::min(heavy_nnz, cols);
  light_nnz = std::min(light_nnz, cols);

  // Pick heavy row indices by partial Fisher-Yates over the row range.
  std::vector<std::uint32_t> ids(rows);
  for (std::uint32_t i = 0; i < rows; ++i) ids[i] = i;
  for (std::uint32_t i = 0; i < heavy_rows; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.below(rows - i));
    std::swap(ids[i], ids[j]);
  }
  std::vector<bool> heavy(rows, false);
  for (std::uint32_t i = 0; i < heavy_rows; ++i) heavy[ids[i]] = true;

  CsrMatrix m(rows, cols);
  std::vector<std::uint32_t> picks;
  for (std::uint32_t i = 0; i < rows; ++i) {
    const std::uint32_t want = heavy[i] ? heavy_nnz : light_nnz;
    picks.clear();
    if (want * 2 >= cols) {
      // Dense-ish row: Fisher-Yates over the whole column range.
      std::vector<std::uint32_t> all(cols);
      for (std::uint32_t j = 0; j < cols; ++j) all[j] = j;
      for (std::uint32_t k = 0; k < want; ++k) {
        const auto j = k + static_cast<std::uint32_t>(rng.below(cols - k));
        std::swap(all[k], all[j]);
      }
      picks.assign(all.begin(), all.begin() + want);
    } else {
      while (picks.size() < want) {
        const auto c = static_cast<std::uint32_t>(rng.below(cols));
        if (std::find(picks.begin(), picks.end(), c) == picks.end()) picks.push_back(c);
      }
    }
    std::sort(picks.begin(), picks.end());
    for (auto c : picks) {
      m.col_idx.push_back(c);
      m.values.push_back(static_cast<float>(rng.uniform(-1.0, 1.0)));
    }
    m.row_ptr[i + 1] = m.col_idx.size();
  }
  return m;
}

}  // namespace spz
