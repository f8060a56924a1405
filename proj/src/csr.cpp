#include "spz/csr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace spz {

void CsrMatrix::validate() const {
  if (cols >= kInvalidKey)
    throw dimension_error("column count reaches the reserved invalid-key value");
  if (row_ptr.size() != static_cast<std::size_t>(rows) + 1)
    throw error("row_ptr length != rows+1");
  if (row_ptr.front() != 0) throw error("row_ptr[0] != 0");
  for (std::uint32_t i = 0; i < rows; ++i)
    if (row_ptr[i + 1] < row_ptr[i]) throw error("row_ptr not monotone");
  if (row_ptr.back() != col_idx.size() || col_idx.size() != values.size())
    throw error("row_ptr[rows] != nnz");
  for (std::uint32_t i = 0; i < rows; ++i) {
    auto cs = row_cols(i);
    for (std::size_t k = 0; k < cs.size(); ++k) {
      if (cs[k] >= cols) throw error("column index out of range");
      if (k > 0 && cs[k] <= cs[k - 1]) throw error("row columns not strictly ascending");
    }
  }
}

CsrMatrix coo_to_csr(const CooMatrix& m) {
  if (m.cols >= kInvalidKey)
    throw dimension_error("unsupported dimension: cols must be < 2^32-1");
  for (const auto& e : m.entries) {
    if (e.row >= m.rows || e.col >= m.cols)
      throw error("coo entry out of declared bounds");
  }

  std::vector<std::uint32_t> order(m.entries.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
    const auto& a = m.entries[x];
    const auto& b = m.entries[y];
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return x < y;  // stable within a coordinate so duplicate sums are deterministic
  });

  CsrMatrix out(m.rows, m.cols);
  out.col_idx.reserve(m.entries.size());
  out.values.reserve(m.entries.size());
  std::size_t k = 0;
  for (std::uint32_t i = 0; i < m.rows; ++i) {
    while (k < order.size() && m.entries[order[k]].row == i) {
      const auto& e = m.entries[order[k]];
      if (!out.col_idx.empty() && out.row_ptr[i] < out.col_idx.size() &&
          out.col_idx.back() == e.col) {
        out.values.back() += e.value;  // coincident coordinate
      } else {
        out.col_idx.push_back(e.col);
        out.values.push_back(e.value);
      }
      ++k;
    }
    out.row_ptr[i + 1] = out.col_idx.size();
  }
  return out;
}

CooMatrix csr_to_coo(const CsrMatrix& m) {
  CooMatrix out;
  out.rows = m.rows;
  out.cols = m.cols;
  out.entries.reserve(m.nnz());
  for (std::uint32_t i = 0; i < m.rows; ++i) {
    auto cs = m.row_cols(i);
    auto vs = m.row_vals(i);
    for (std::size_t k = 0; k < cs.size(); ++k)
      out.entries.push_back({i, cs[k], vs[k]});
  }
  return out;
}

CsrMatrix csr_identity(std::uint32_t n) {
  CsrMatrix out(n, n);
  out.col_idx.resize(n);
  out.values.assign(n, 1.0f);
  for (std::uint32_t i = 0; i < n; ++i) {
    out.col_idx[i] = i;
    out.row_ptr[i + 1] = i + 1;
  }
  return out;
}

CsrMatrix reference_spgemm(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols != b.rows) throw dimension_error("spgemm dimension mismatch: a.cols != b.rows");
  CsrMatrix c(a.rows, b.cols);
  std::map<std::uint32_t, double> acc;
  for (std::uint32_t i = 0; i < a.rows; ++i) {
    acc.clear();
    auto acs = a.row_cols(i);
    auto avs = a.row_vals(i);
    for (std::size_t p = 0; p < acs.size(); ++p) {
      const std::uint32_t j = acs[p];
      const double av = avs[p];
      auto bcs = b.row_cols(j);
      auto bvs = b.row_vals(j);
      for (std::size_t q = 0; q < bcs.size(); ++q) acc[bcs[q]] += av * bvs[q];
    }
    for (const auto& [col, v] : acc) {
      c.col_idx.push_back(col);
      c.values.push_back(static_cast<float>(v));
    }
    c.row_ptr[i + 1] = c.col_idx.size();
  }
  return c;
}

bool pattern_equal(const CsrMatrix& a, const CsrMatrix& b) {
  return a.rows == b.rows && a.cols == b.cols && a.row_ptr == b.row_ptr &&
         a.col_idx == b.col_idx;
}

std::string ValueMismatch::describe() const {
  std::string s = "(" + std::to_string(row) + ", " + std::to_string(col) + "): ";
  if (pattern) return s + "sparsity pattern differs";
  return s + "got " + std::to_string(got) + ", expected " + std::to_string(expected);
}

std::optional<ValueMismatch> first_mismatch(const CsrMatrix& got, const CsrMatrix& ref,
                                            double rel_tol, double abs_tol) {
  const float nan = std::nanf("");
  if (got.rows != ref.rows || got.cols != ref.cols)
    return ValueMismatch{0, 0, nan, nan, true};
  const std::uint32_t n = got.rows;
  for (std::uint32_t i = 0; i < n; ++i) {
    auto gc = got.row_cols(i);
    auto rc = ref.row_cols(i);
    auto gv = got.row_vals(i);
    auto rv = ref.row_vals(i);
    const std::size_t len = std::min(gc.size(), rc.size());
    for (std::size_t k = 0; k < len; ++k) {
      if (gc[k] != rc[k]) return ValueMismatch{i, std::min(gc[k], rc[k]), nan, nan, true};
      const double diff = std::abs(static_cast<double>(gv[k]) - rv[k]);
      if (diff > abs_tol && diff > rel_tol * std::abs(static_cast<double>(rv[k])))
        return ValueMismatch{i, gc[k], gv[k], rv[k], false};
    }
    if (gc.size() != rc.size()) {
      const auto& longer = gc.size() > rc.size() ? gc : rc;
      return ValueMismatch{i, longer[len], nan, nan, true};
    }
  }
  return std::nullopt;
}

}  // namespace spz
