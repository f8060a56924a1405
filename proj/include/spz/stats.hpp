#pragma once

#include <cstdint>

#include "spz/csr.hpp"

namespace spz {

/// Dataset statistics for the self-product A*A under the row-wise dataflow.
/// work_i = sum over nonzeros (i,j) of A of nnz(row j of A); the variation is
/// the mean over groups of group_size consecutive rows of the per-group
/// coefficient of variation (population std-dev / mean) of work_i.
struct DatasetStats {
  std::uint32_t rows = 0;
  std::uint64_t nnz = 0;
  double density = 0.0;
  double avg_work_per_row = 0.0;
  double avg_out_nnz_per_row = 0.0;
  double avg_work_per_group = 0.0;
  double work_variation = 0.0;
  std::uint32_t group_size = 16;
};

/// Per-row multiply counts for A*A. For non-square A the right-hand side is
/// taken as A extended/truncated to a.cols rows, with missing rows empty.
std::vector<std::uint64_t> row_work(const CsrMatrix& a);

/// Computes stats; avg_out_nnz_per_row runs reference_spgemm once unless the
/// caller passes a precomputed product.
DatasetStats dataset_stats(const CsrMatrix& a, std::uint32_t group_size = 16,
                           const CsrMatrix* precomputed_product = nullptr);

}  // namespace spz
