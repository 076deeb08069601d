#include "qpalm/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "format_util.hpp"

namespace qpalm {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("matrix market: empty input");
  }
  std::istringstream header(line);
  std::string banner, object, format, field, kind;
  header >> banner >> object >> format >> field >> kind;
  if (lower(banner) != "%%matrixmarket" || lower(object) != "matrix" ||
      lower(format) != "coordinate") {
    throw std::runtime_error("matrix market: unsupported header: " + line);
  }
  field = lower(field);
  kind = lower(kind);
  if (field != "real" && field != "integer" && field != "double") {
    throw std::runtime_error("matrix market: unsupported field " + field);
  }
  if (kind != "general" && kind != "symmetric") {
    throw std::runtime_error("matrix market: unsupported symmetry " + kind);
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream sizes(line);
  long nrows = 0, ncols = 0, nnz = 0;
  if (!(sizes >> nrows >> ncols >> nnz)) {
    throw std::runtime_error("matrix market: bad size line");
  }
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nnz));
  for (long k = 0; k < nnz; ++k) {
    std::string si, sj, sv;
    if (!(in >> si >> sj >> sv)) {
      throw std::runtime_error("matrix market: truncated entry list");
    }
    const long i = std::stol(si) - 1;
    const long j = std::stol(sj) - 1;
    t.push_back({static_cast<Index>(i), static_cast<Index>(j),
                 detail::parse_double(sv)});
  }
  const Symmetry sym = kind == "symmetric" ? Symmetry::upper : Symmetry::general;
  return SparseMatrix::from_triplets(static_cast<Index>(nrows),
                                     static_cast<Index>(ncols), t, sym);
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real "
      << (m.is_symmetric() ? "symmetric" : "general") << '\n';
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  for (const auto& e : m.triplets()) {
    // upper (i <= j) becomes lower (j >= i) for the symmetric kind
    const Index r = m.is_symmetric() ? e.col : e.row;
    const Index c = m.is_symmetric() ? e.row : e.col;
    out << r + 1 << ' ' << c + 1 << ' ' << detail::format_double(e.value)
        << '\n';
  }
}

void write_matrix_market(const std::string& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_matrix_market(out, m);
}

}  // namespace qpalm
