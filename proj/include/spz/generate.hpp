#pragma once

#include <cstdint>

#include "spz/csr.hpp"

namespace spz {

/// Deterministic xoshiro-style generator used by the synthetic matrix
/// builders so outputs are byte-identical across platforms (std
/// distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform01();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
};

/// Bernoulli(density) per cell, values uniform in [-1, 1].
CsrMatrix gen_random(std::uint32_t rows, std::uint32_t cols, double density,
                     std::uint64_t seed);

/// heavy_rows randomly chosen rows get heavy_nnz entries each, the rest get
/// light_nnz; manufactures high per-group work variation.
CsrMatrix gen_skewed(std::uint32_t rows, std::uint32_t cols, std::uint32_t heavy_rows,
                     std::uint32_t heavy_nnz, std::uint32_t light_nnz,
                     std::uint64_t seed);

}  // namespace spz
