#include "qpalm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

namespace qpalm {

namespace {

BenchRecord run_case(const BenchCase& c, const SolverConfig& cfg) {
  BenchRecord rec;
  rec.problem = c.id;
  rec.solver = cfg.name;
  const auto instances = c.generate();
  if (instances.empty()) throw std::runtime_error("bench case '" + c.id + "' is empty");
  double runtime = 0.0;
  double objective = 0.0;
  bool failed = false;
  for (const auto& inst : instances) {
    const Vector x0 = inst.x0.value_or(Vector{});
    const Vector y0 = inst.y0.value_or(Vector{});
    const SolveResult res = solve(inst.problem, cfg.settings, x0, y0);
    runtime += res.info.runtime;
    objective += res.objective;
    rec.prim_res = std::max(rec.prim_res, res.prim_res);
    rec.dual_res = std::max(rec.dual_res, res.dual_res);
    rec.newton_iterations += res.info.newton_iterations;
    if (!failed && res.status != Status::solved) {
      rec.status = res.status;
      failed = !is_success(res.status);
    }
  }
  const double count = static_cast<double>(instances.size());
  rec.runtime = runtime / count;
  rec.objective = objective / count;
  return rec;
}

}  // namespace

std::vector<BenchRecord> run_bench(const std::vector<BenchCase>& cases,
                                   const std::vector<SolverConfig>& configs,
                                   int threads) {
  const std::size_t jobs = cases.size() * configs.size();
  std::vector<BenchRecord> records(jobs);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      try {
        records[job] = run_case(cases[job / configs.size()], configs[job % configs.size()]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int count = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(jobs, 1))));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return records;
}

std::vector<Index> index_range(Index lo, Index hi, Index step) {
  if (step <= 0) throw std::invalid_argument("range step must be positive");
  std::vector<Index> out;
  for (Index v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

std::vector<BenchCase> portfolio_cases(const std::vector<Index>& sizes, std::uint64_t seed,
                                       const std::vector<double>& betas) {
  std::vector<BenchCase> cases;
  for (Index n : sizes) {
    cases.push_back({"portfolio_n" + std::to_string(n), [n, seed, betas] {
                       std::vector<BenchInstance> out;
                       for (double beta : betas) out.push_back({gen_portfolio(n, seed, beta), {}, {}});
                       return out;
                     }});
  }
  return cases;
}

std::vector<BenchCase> mpc_cases(const std::vector<Index>& horizons, Index nx, Index nu,
                                 std::uint64_t seed) {
  std::vector<BenchCase> cases;
  for (Index N : horizons) {
    cases.push_back({"mpc_N" + std::to_string(N), [N, nx, nu, seed] {
                       return std::vector<BenchInstance>{{gen_mpc(nx, nu, N, seed), {}, {}}};
                     }});
  }
  return cases;
}

std::vector<BenchCase> random_cases(const std::vector<Index>& sizes, double m_ratio,
                                    double density, bool convex, std::uint64_t seed) {
  std::vector<BenchCase> cases;
  for (Index n : sizes) {
    cases.push_back({std::string(convex ? "random" : "random_nc") + "_n" + std::to_string(n),
                     [=] {
                       RandomQpOptions o;
                       o.n = n;
                       o.m = std::max<Index>(1, static_cast<Index>(m_ratio * n));
                       o.density = density;
                       o.convex = convex;
                       o.seed = seed + static_cast<std::uint64_t>(n);
                       return std::vector<BenchInstance>{{gen_random_qp(o), {}, {}}};
                     }});
  }
  return cases;
}

std::vector<MpcSequenceStep> mpc_sequence(const MpcOptions& options, int steps,
                                          const Settings& settings, double disturbance,
                                          std::uint64_t noise_seed) {
  MpcInstance inst = gen_mpc(options);
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> noise(0.0, disturbance);
  Solver solver(inst.qp, settings);
  SolveResult prev = solver.solve();
  std::vector<MpcSequenceStep> out;
  for (int t = 0; t < steps; ++t) {
    const std::span<const double> z(prev.x);
    Vector next = inst.step(z.subspan(0, inst.nx),
                            z.subspan(static_cast<std::size_t>(inst.nx), inst.nu));
    for (double& v : next) v += noise(rng);
    set_initial_state(inst, next);
    solver.update_bounds(inst.qp.l, inst.qp.u);
    MpcSequenceStep step;
    step.cold = solver.solve();
    const auto [zw, yw] = shift_warm_start(inst, prev.x, prev.y);
    step.warm = solver.solve(zw, yw);
    prev = step.warm;
    out.push_back(std::move(step));
  }
  return out;
}

}  // namespace qpalm
