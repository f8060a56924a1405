#pragma once

#include <iosfwd>
#include <string>

#include "spz/csr.hpp"

namespace spz {

/// Parses Matrix Market coordinate format. Supported header kinds:
/// real/integer/pattern x general/symmetric. 1-based indices are converted
/// to 0-based, pattern entries get value 1.0, and symmetric matrices are
/// expanded to both triangles (diagonal not duplicated). Duplicate
/// coordinates are kept and summed later by coo_to_csr.
/// Throws parse_error naming the offending line.
CooMatrix parse_matrix_market(std::istream& in);
CooMatrix parse_matrix_market(const std::string& text);

/// Writes coordinate real general with full precision; output re-parses to a
/// semantically identical matrix.
void write_matrix_market(std::ostream& out, const CsrMatrix& m);

/// Versioned little-endian binary cache: row_ptr as 64-bit, col_idx as
/// 32-bit, values as 32-bit IEEE-754.
void save_csr_binary(std::ostream& out, const CsrMatrix& m);
CsrMatrix load_csr_binary(std::istream& in);

/// Loads a matrix by extension: ".spzb" binary cache, everything else
/// Matrix Market text.
CsrMatrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const CsrMatrix& m);

}  // namespace spz
