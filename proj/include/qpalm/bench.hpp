#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qpalm/bench_stats.hpp"
#include "qpalm/generators.hpp"
#include "qpalm/settings.hpp"

namespace qpalm {

struct BenchInstance {
  QpProblem problem;
  std::optional<Vector> x0;
  std::optional<Vector> y0;
};

/// One benchmark problem. Cases with several instances (the portfolio risk
/// sweep) report the arithmetic mean runtime, the mean objective, the largest
/// residuals and the first failing status.
struct BenchCase {
  std::string id;
  std::function<std::vector<BenchInstance>()> generate;
};

struct SolverConfig {
  std::string name;
  Settings settings;
};

/// Runs every (case, config) pair on `threads` workers. Records come back in
/// case-major order regardless of scheduling.
std::vector<BenchRecord> run_bench(const std::vector<BenchCase>& cases,
                                   const std::vector<SolverConfig>& configs,
                                   int threads = 1);

/// Inclusive range lo, lo + step, ..., <= hi.
std::vector<Index> index_range(Index lo, Index hi, Index step);

inline const std::vector<double> kPortfolioBetas = {1e-2, 1e-1, 1.0, 1e1, 1e2};

std::vector<BenchCase> portfolio_cases(const std::vector<Index>& sizes, std::uint64_t seed,
                                       const std::vector<double>& betas = kPortfolioBetas);
std::vector<BenchCase> mpc_cases(const std::vector<Index>& horizons, Index nx, Index nu,
                                 std::uint64_t seed);
std::vector<BenchCase> random_cases(const std::vector<Index>& sizes, double m_ratio,
                                    double density, bool convex, std::uint64_t seed);

struct MpcSequenceStep {
  SolveResult cold;
  SolveResult warm;
};

/// Closed-loop run: after an initial cold solve, applies the first input,
/// adds N(0, disturbance^2) noise to the next state and re-solves `steps`
/// times, both cold and from the shifted previous solution. The trajectory
/// follows the warm-started solutions.
std::vector<MpcSequenceStep> mpc_sequence(const MpcOptions& options, int steps,
                                          const Settings& settings,
                                          double disturbance = 0.01,
                                          std::uint64_t noise_seed = 1);

}  // namespace qpalm
