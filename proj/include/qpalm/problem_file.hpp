#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "qpalm/problem.hpp"

namespace qpalm {

/// Text problem document:
///
///   qpalm-problem 1
///   n <n>
///   m <m>
///   Q <nnz>           followed by nnz lines "row col value" (upper, 0-based)
///   q <n values>
///   A <nnz>           followed by nnz lines "row col value"
///   l <m values>      "inf" / "-inf" allowed
///   u <m values>
///   x0 <n values>     optional
///   y0 <m values>     optional
///   end
///
/// Lines starting with '#' are comments. Values are written in the shortest
/// form that reads back to the same double.
struct ProblemFile {
  QpProblem problem;
  std::optional<Vector> x0;
  std::optional<Vector> y0;
};

ProblemFile read_problem(std::istream& in);
ProblemFile read_problem_file(const std::string& path);
void write_problem(std::ostream& out, const QpProblem& p,
                   const Vector* x0 = nullptr, const Vector* y0 = nullptr);
void write_problem_file(const std::string& path, const QpProblem& p,
                        const Vector* x0 = nullptr, const Vector* y0 = nullptr);

struct WarmStart {
  std::optional<Vector> x;
  std::optional<Vector> y;
};

/// Reads a warm start either from a solve result document (JSON with "x"
/// and "y" arrays) or from a text with sections "x0 <k> v1 ... vk" and
/// "y0 <k> v1 ... vk".
WarmStart read_warm_start_file(const std::string& path);

}  // namespace qpalm
