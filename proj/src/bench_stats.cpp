#include "qpalm/bench_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "format_util.hpp"

namespace qpalm {

namespace {

constexpr const char* kHeader = "problem,solver,runtime,status,objective,prim_res,dual_res";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::string> solver_order(std::span<const BenchRecord> records) {
  std::vector<std::string> order;
  for (const auto& r : records) {
    if (std::find(order.begin(), order.end(), r.solver) == order.end()) {
      order.push_back(r.solver);
    }
  }
  return order;
}

}  // namespace

double sgm(std::span<const double> times, double shift) {
  if (times.empty()) throw std::invalid_argument("sgm: empty array");
  if (!(shift > 0.0)) throw std::invalid_argument("sgm: shift must be positive");
  double acc = 0.0;
  for (double t : times) {
    if (!(t >= 0.0)) throw std::invalid_argument("sgm: negative time");
    acc += std::log(t + shift);
  }
  return std::exp(acc / static_cast<double>(times.size())) - shift;
}

void write_records_csv(std::ostream& out, std::span<const BenchRecord> records) {
  out << kHeader << '\n';
  for (const auto& r : records) {
    out << r.problem << ',' << r.solver << ',' << detail::format_double(r.runtime) << ','
        << to_string(r.status) << ',' << detail::format_double(r.objective) << ','
        << detail::format_double(r.prim_res) << ',' << detail::format_double(r.dual_res)
        << '\n';
  }
}

std::vector<BenchRecord> read_records_csv(std::istream& in) {
  std::vector<BenchRecord> records;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != kHeader) throw std::runtime_error("records: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    const auto cols = split_csv(line);
    if (cols.size() != 7) {
      throw std::runtime_error("records: line " + std::to_string(lineno) +
                               ": expected 7 columns");
    }
    BenchRecord r;
    try {
      r.problem = cols[0];
      r.solver = cols[1];
      r.runtime = detail::parse_double(cols[2]);
      r.status = parse_status(cols[3]);
      r.objective = detail::parse_double(cols[4]);
      r.prim_res = detail::parse_double(cols[5]);
      r.dual_res = detail::parse_double(cols[6]);
    } catch (const std::exception& e) {
      throw std::runtime_error("records: line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!(r.runtime >= 0.0)) {
      throw std::runtime_error("records: line " + std::to_string(lineno) + ": negative runtime");
    }
    records.push_back(std::move(r));
  }
  if (!header) throw std::runtime_error("records: missing header");
  return records;
}

std::vector<BenchRecord> read_records_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_records_csv(in);
}

std::vector<SgmRow> sgm_table(std::span<const BenchRecord> records, double time_limit,
                              double shift) {
  std::vector<SgmRow> rows;
  for (const auto& solver : solver_order(records)) {
    SgmRow row;
    row.solver = solver;
    std::vector<double> times;
    for (const auto& r : records) {
      if (r.solver != solver) continue;
      if (is_success(r.status)) {
        times.push_back(r.runtime);
      } else {
        times.push_back(time_limit);
        ++row.failures;
      }
    }
    row.problems = static_cast<int>(times.size());
    row.sgm = sgm(times, shift);
    rows.push_back(row);
  }
  return rows;
}

PerformanceProfile performance_profile(std::span<const BenchRecord> records) {
  const auto solvers = solver_order(records);
  std::vector<std::string> problems;
  std::map<std::pair<std::string, std::string>, const BenchRecord*> table;
  for (const auto& r : records) {
    if (!table.emplace(std::make_pair(r.problem, r.solver), &r).second) {
      throw std::invalid_argument("performance_profile: duplicate record for (" + r.solver +
                                  ", " + r.problem + ")");
    }
    if (std::find(problems.begin(), problems.end(), r.problem) == problems.end()) {
      problems.push_back(r.problem);
    }
  }
  PerformanceProfile prof;
  std::map<std::string, std::vector<double>> ratios;
  for (const auto& p : problems) {
    double best = INFINITY;
    for (const auto& s : solvers) {
      auto it = table.find({p, s});
      if (it == table.end()) {
        throw std::invalid_argument("performance_profile: missing record for (" + s + ", " +
                                    p + ")");
      }
      if (is_success(it->second->status)) best = std::min(best, it->second->runtime);
    }
    if (!std::isfinite(best)) {
      prof.excluded.push_back(p);
      continue;
    }
    ++prof.problems;
    for (const auto& s : solvers) {
      const BenchRecord* r = table.at({p, s});
      if (!is_success(r->status)) {
        ratios[s].push_back(INFINITY);
      } else if (best > 0.0) {
        ratios[s].push_back(r->runtime / best);
      } else {
        ratios[s].push_back(r->runtime > 0.0 ? INFINITY : 1.0);
      }
    }
  }
  if (prof.problems == 0) return prof;
  const double count = prof.problems;
  for (const auto& s : solvers) {
    auto& r = ratios[s];
    std::sort(r.begin(), r.end());
    std::size_t k = 0;
    while (k < r.size() && r[k] <= 1.0) ++k;
    prof.breakpoints.push_back({s, 1.0, static_cast<double>(k) / count});
    while (k < r.size() && std::isfinite(r[k])) {
      const double f = r[k];
      while (k < r.size() && r[k] == f) ++k;
      prof.breakpoints.push_back({s, f, static_cast<double>(k) / count});
    }
  }
  return prof;
}

}  // namespace qpalm
