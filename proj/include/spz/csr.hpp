#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spz/types.hpp"

namespace spz {

/// Coordinate-format matrix, the interchange form used by file ingestion.
/// Entries may be unsorted and may contain duplicate coordinates until
/// normalized by coo_to_csr (duplicates are summed there).
struct CooMatrix {
  struct Entry {
    std::uint32_t row;
    std::uint32_t col;
    float value;
  };

  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<Entry> entries;

  std::size_t nnz() const { return entries.size(); }
};

/// Compressed sparse row matrix with sorted, unique column indices per row.
/// This is the universal input/output format of every kernel.
struct CsrMatrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint64_t> row_ptr;  // length rows+1, row_ptr[0] == 0
  std::vector<std::uint32_t> col_idx;  // length nnz, ascending within a row
  std::vector<float> values;           // length nnz

  CsrMatrix() : row_ptr(1, 0) {}
  CsrMatrix(std::uint32_t r, std::uint32_t c) : rows(r), cols(c), row_ptr(r + 1, 0) {}

  std::size_t nnz() const { return col_idx.size(); }
  std::size_t row_nnz(std::uint32_t i) const {
    return static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i]);
  }
  std::span<const std::uint32_t> row_cols(std::uint32_t i) const {
    return {col_idx.data() + row_ptr[i], row_nnz(i)};
  }
  std::span<const float> row_vals(std::uint32_t i) const {
    return {values.data() + row_ptr[i], row_nnz(i)};
  }

  /// Checks the structural invariants (monotone row_ptr, strictly ascending
  /// unique columns per row, indices in range). Throws on violation.
  void validate() const;
};

CsrMatrix coo_to_csr(const CooMatrix& m);
CooMatrix csr_to_coo(const CsrMatrix& m);

/// Identity matrix of the given order.
CsrMatrix csr_identity(std::uint32_t n);

/// Oracle-grade SpGEMM: ordered-map accumulator per output row, accumulation
/// in double, rounded to float at the end. Every kernel is checked against
/// this.
CsrMatrix reference_spgemm(const CsrMatrix& a, const CsrMatrix& b);

bool pattern_equal(const CsrMatrix& a, const CsrMatrix& b);

struct ValueMismatch {
  std::uint32_t row;
  std::uint32_t col;
  float got;       // NaN when the pattern itself differs
  float expected;  // NaN when the pattern itself differs
  bool pattern;    // true when the sparsity patterns diverge here
  std::string describe() const;
};

/// Compares pattern exactly and values within max(abs_tol, rel_tol*|ref|).
/// Returns the first divergence in row-major order, or nullopt if equal.
std::optional<ValueMismatch> first_mismatch(const CsrMatrix& got, const CsrMatrix& ref,
                                            double rel_tol = 1e-5, double abs_tol = 1e-6);

}  // namespace spz
