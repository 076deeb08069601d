#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qpalm/solver.hpp"

namespace qpalm {

struct BenchRecord {
  std::string problem;
  std::string solver;
  double runtime = 0.0;  // seconds
  Status status = Status::solved;
  double objective = 0.0;
  double prim_res = 0.0;
  double dual_res = 0.0;
  // Not serialized; used by bench summaries.
  long newton_iterations = 0;
};

/// Shifted geometric mean exp(mean(log(t + shift))) - shift. Throws
/// std::invalid_argument on an empty array, negative times or shift <= 0.
double sgm(std::span<const double> times, double shift = 1.0);

/// CSV with header problem,solver,runtime,status,objective,prim_res,dual_res.
void write_records_csv(std::ostream& out, std::span<const BenchRecord> records);
std::vector<BenchRecord> read_records_csv(std::istream& in);
std::vector<BenchRecord> read_records_csv_file(const std::string& path);

struct SgmRow {
  std::string solver;
  double sgm = 0.0;
  int problems = 0;
  int failures = 0;
};

/// Per solver sgm in order of first appearance. Failed runs count with
/// runtime = time_limit.
std::vector<SgmRow> sgm_table(std::span<const BenchRecord> records, double time_limit,
                              double shift = 1.0);

struct ProfileBreakpoint {
  std::string solver;
  double f = 1.0;
  double q = 0.0;  // fraction of problems with ratio <= f
};

struct PerformanceProfile {
  std::vector<ProfileBreakpoint> breakpoints;
  std::vector<std::string> excluded;  // problems no solver finished
  int problems = 0;                   // problems kept
};

/// Runtime ratios r = t / min_s t over successful runs, r = inf on failure.
/// Each solver gets a breakpoint at f = 1 and one at every distinct finite
/// ratio above 1. Every (solver, problem) pair must be present exactly once.
PerformanceProfile performance_profile(std::span<const BenchRecord> records);

}  // namespace qpalm
