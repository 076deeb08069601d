#include "qpalm/problem_file.hpp"

#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "format_util.hpp"

namespace qpalm {

namespace {

class Tokenizer {
 public:
  explicit Tokenizer(std::istream& in) : in_(in) {}

  bool next(std::string& tok) {
    for (;;) {
      if (line_ >> tok) {
        if (tok.front() == '#') {
          line_.clear();
          line_.str({});
          continue;
        }
        return true;
      }
      std::string line;
      if (!std::getline(in_, line)) return false;
      line_.clear();
      line_.str(line);
    }
  }

  std::string expect(const char* what) {
    std::string tok;
    if (!next(tok)) throw std::runtime_error(std::string("problem file: missing ") + what);
    return tok;
  }

  long integer(const char* what) {
    const std::string tok = expect(what);
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size()) {
      throw std::runtime_error(std::string("problem file: bad integer for ") + what +
                               ": '" + tok + "'");
    }
    return v;
  }

  double real(const char* what) {
    const std::string tok = expect(what);
    try {
      return detail::parse_double(tok);
    } catch (const std::runtime_error&) {
      throw std::runtime_error(std::string("problem file: bad number for ") + what +
                               ": '" + tok + "'");
    }
  }

 private:
  std::istream& in_;
  std::istringstream line_;
};

Vector read_values(Tokenizer& tk, long count, const char* what) {
  Vector v(static_cast<std::size_t>(count));
  for (auto& e : v) e = tk.real(what);
  return v;
}

std::vector<Triplet> read_triplets(Tokenizer& tk, long count, long rows, long cols,
                                   const char* what) {
  if (count < 0) throw std::runtime_error(std::string("problem file: negative count for ") + what);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    const long i = tk.integer(what);
    const long j = tk.integer(what);
    const double v = tk.real(what);
    if (i < 0 || i >= rows || j < 0 || j >= cols) {
      throw std::runtime_error(std::string("problem file: index out of range in ") + what);
    }
    t.push_back({static_cast<Index>(i), static_cast<Index>(j), v});
  }
  return t;
}

void write_values(std::ostream& out, const char* key, std::span<const double> v) {
  out << key;
  for (double e : v) out << ' ' << detail::format_double(e);
  out << '\n';
}

void write_triplets(std::ostream& out, const char* key, const SparseMatrix& m) {
  out << key << ' ' << m.nnz() << '\n';
  for (Index j = 0; j < m.cols(); ++j) {
    auto rows = m.col_rows(j);
    auto vals = m.col_values(j);
    for (std::size_t p = 0; p < rows.size(); ++p) {
      out << rows[p] << ' ' << j << ' ' << detail::format_double(vals[p]) << '\n';
    }
  }
}

}  // namespace

ProblemFile read_problem(std::istream& in) {
  Tokenizer tk(in);
  if (tk.expect("header") != "qpalm-problem") {
    throw std::runtime_error("problem file: expected 'qpalm-problem' header");
  }
  if (tk.integer("version") != 1) throw std::runtime_error("problem file: unsupported version");
  long n = -1;
  long m = -1;
  ProblemFile pf;
  bool have_q_mat = false, have_q = false, have_a = false, have_l = false, have_u = false;
  std::string key;
  for (;;) {
    if (!tk.next(key)) throw std::runtime_error("problem file: missing 'end'");
    if (key == "end") break;
    if (key == "n") {
      n = tk.integer("n");
    } else if (key == "m") {
      m = tk.integer("m");
    } else if (n < 0 || m < 0) {
      throw std::runtime_error("problem file: 'n' and 'm' must precede '" + key + "'");
    } else if (key == "Q") {
      const auto t = read_triplets(tk, tk.integer("Q count"), n, n, "Q");
      for (const auto& e : t) {
        if (e.row > e.col) throw std::runtime_error("problem file: Q entries must be upper triangular");
      }
      pf.problem.Q = SparseMatrix::from_triplets(static_cast<Index>(n), static_cast<Index>(n),
                                                 t, Symmetry::upper);
      have_q_mat = true;
    } else if (key == "q") {
      pf.problem.q = read_values(tk, n, "q");
      have_q = true;
    } else if (key == "A") {
      const auto t = read_triplets(tk, tk.integer("A count"), m, n, "A");
      pf.problem.A = SparseMatrix::from_triplets(static_cast<Index>(m), static_cast<Index>(n), t);
      have_a = true;
    } else if (key == "l") {
      pf.problem.l = read_values(tk, m, "l");
      have_l = true;
    } else if (key == "u") {
      pf.problem.u = read_values(tk, m, "u");
      have_u = true;
    } else if (key == "x0") {
      pf.x0 = read_values(tk, n, "x0");
    } else if (key == "y0") {
      pf.y0 = read_values(tk, m, "y0");
    } else {
      throw std::runtime_error("problem file: unknown section '" + key + "'");
    }
  }
  if (n < 0 || m < 0) throw std::runtime_error("problem file: missing dimensions");
  const auto nn = static_cast<Index>(n);
  const auto mm = static_cast<Index>(m);
  if (!have_q_mat) pf.problem.Q = SparseMatrix::zero(nn, nn, Symmetry::upper);
  if (!have_q) pf.problem.q.assign(static_cast<std::size_t>(n), 0.0);
  if (!have_a) pf.problem.A = SparseMatrix::zero(mm, nn);
  if (!have_l) pf.problem.l.assign(static_cast<std::size_t>(m), -INFINITY);
  if (!have_u) pf.problem.u.assign(static_cast<std::size_t>(m), INFINITY);
  pf.problem.validate();
  return pf;
}

ProblemFile read_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_problem(in);
}

void write_problem(std::ostream& out, const QpProblem& p, const Vector* x0,
                   const Vector* y0) {
  out << "qpalm-problem 1\n";
  out << "n " << p.n() << '\n';
  out << "m " << p.m() << '\n';
  write_triplets(out, "Q", p.Q);
  write_values(out, "q", p.q);
  write_triplets(out, "A", p.A);
  write_values(out, "l", p.l);
  write_values(out, "u", p.u);
  if (x0) write_values(out, "x0", *x0);
  if (y0) write_values(out, "y0", *y0);
  out << "end\n";
}

void write_problem_file(const std::string& path, const QpProblem& p,
                        const Vector* x0, const Vector* y0) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_problem(out, p, x0, y0);
}

WarmStart read_warm_start_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto first = text.find_first_not_of(" \t\r\n");
  WarmStart ws;
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("warm start: " + std::string(e.what()));
    }
    auto vec = [&](const char* key) -> std::optional<Vector> {
      if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
      Vector v;
      for (const auto& e : doc[key]) {
        v.push_back(e.is_string() ? detail::parse_double(e.get<std::string>()) : e.get<double>());
      }
      return v;
    };
    ws.x = vec("x");
    ws.y = vec("y");
    return ws;
  }
  std::istringstream ss(text);
  Tokenizer tk(ss);
  std::string key;
  while (tk.next(key)) {
    if (key == "end") break;
    if (key != "x0" && key != "y0") {
      throw std::runtime_error("warm start: unknown section '" + key + "'");
    }
    const long count = tk.integer("vector length");
    auto v = read_values(tk, count, key.c_str());
    (key == "x0" ? ws.x : ws.y) = std::move(v);
  }
  return ws;
}

}  // namespace qpalm
