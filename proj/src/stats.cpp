#include "spz/stats.hpp"

#include <cmath>

namespace spz {

namespace {

// Right-hand side for A*A stats when A is not square: A with its row count
// forced to a.cols (extra rows empty, surplus rows dropped).
CsrMatrix squared_rhs(const CsrMatrix& a) {
  CsrMatrix b = a;
  if (a.rows == a.cols) return b;
  b.rows = a.cols;
  b.row_ptr.resize(static_cast<std::size_t>(a.cols) + 1, a.row_ptr[std::min(a.rows, a.cols)]);
  if (a.rows > a.cols) {
    const std::uint64_t cut = a.row_ptr[a.cols];
    b.row_ptr.back() = cut;
    b.col_idx.resize(cut);
    b.values.resize(cut);
  }
  return b;
}

}  // namespace

std::vector<std::uint64_t> row_work(const CsrMatrix& a) {
  std::vector<std::uint64_t> work(a.rows, 0);
  for (std::uint32_t i = 0; i < a.rows; ++i) {
    for (auto j : a.row_cols(i))
      if (j < a.rows) work[i] += a.row_nnz(j);
  }
  return work;
}

DatasetStats dataset_stats(const CsrMatrix& a, std::uint32_t group_size,
                           const CsrMatrix* precomputed_product) {
  if (group_size == 0) group_size = 16;
  DatasetStats s;
  s.rows = a.rows;
  s.nnz = a.nnz();
  s.group_size = group_size;
  s.density = a.rows && a.cols
                  ? static_cast<double>(a.nnz()) /
                        (static_cast<double>(a.rows) * static_cast<double>(a.cols))
                  : 0.0;

  const auto work = row_work(a);
  std::uint64_t total_work = 0;
  for (auto w : work) total_work += w;
  s.avg_work_per_row = a.rows ? static_cast<double>(total_work) / a.rows : 0.0;

  const std::uint32_t groups = a.rows ? (a.rows + group_size - 1) / group_size : 0;
  double cv_sum = 0.0;
  double group_work_sum = 0.0;
  for (std::uint32_t g = 0; g < groups; ++g) {
    const std::uint32_t lo = g * group_size;
    const std::uint32_t hi = std::min(a.rows, lo + group_size);
    const std::uint32_t n = hi - lo;
    double sum = 0.0, sumsq = 0.0;
    for (std::uint32_t i = lo; i < hi; ++i) {
      const double w = static_cast<double>(work[i]);
      sum += w;
      sumsq += w * w;
    }
    group_work_sum += sum;
    const double mean = sum / n;
    if (mean > 0.0) {
      const double var = sumsq / n - mean * mean;
      cv_sum += std::sqrt(std::max(0.0, var)) / mean;
    }
    // zero-mean groups contribute 0
  }
  s.avg_work_per_group = groups ? group_work_sum / groups : 0.0;
  s.work_variation = groups ? cv_sum / groups : 0.0;

  if (precomputed_product) {
    s.avg_out_nnz_per_row =
        a.rows ? static_cast<double>(precomputed_product->nnz()) / a.rows : 0.0;
  } else {
    const CsrMatrix b = squared_rhs(a);
    const CsrMatrix c = reference_spgemm(a, b);
    s.avg_out_nnz_per_row = a.rows ? static_cast<double>(c.nnz()) / a.rows : 0.0;
  }
  return s;
}

}  // namespace spz
