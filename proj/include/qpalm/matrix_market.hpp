#pragma once

#include <iosfwd>
#include <string>

#include "qpalm/sparse_matrix.hpp"

namespace qpalm {

/// Reads a Matrix Market coordinate file ("real" or "integer" field,
/// "general" or "symmetric" kind). Symmetric files (lower triangle by
/// convention) come back in upper storage.
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::string& path);

/// Writes a coordinate file. Upper-stored matrices are written as
/// "symmetric" with the lower triangle, as the format expects.
void write_matrix_market(std::ostream& out, const SparseMatrix& m);
void write_matrix_market(const std::string& path, const SparseMatrix& m);

}  // namespace qpalm
