#include "qpalm/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "format_util.hpp"
#include "qpalm/bench.hpp"
#include "qpalm/bench_stats.hpp"
#include "qpalm/problem_file.hpp"

namespace qpalm {

namespace {

using json = nlohmann::ordered_json;

std::optional<double> env_time_limit() {
  const char* v = std::getenv("QPALM_TIME_LIMIT");
  if (!v || !*v) return std::nullopt;
  try {
    return detail::parse_double(v);
  } catch (const std::runtime_error&) {
    throw std::runtime_error(std::string("QPALM_TIME_LIMIT: invalid value '") + v + "'");
  }
}

struct LinsysOption {
  std::string value = "auto";
};

void add_settings_options(CLI::App* app, Settings& s, LinsysOption& linsys) {
  app->add_option("--eps-abs", s.eps_abs, "absolute tolerance")->capture_default_str();
  app->add_option("--eps-rel", s.eps_rel, "relative tolerance")->capture_default_str();
  app->add_option("--delta-abs0", s.delta_abs0, "initial absolute inner tolerance")
      ->capture_default_str();
  app->add_option("--delta-rel0", s.delta_rel0, "initial relative inner tolerance")
      ->capture_default_str();
  app->add_option("--eps-pinf", s.eps_pinf, "primal infeasibility tolerance")
      ->capture_default_str();
  app->add_option("--eps-dinf", s.eps_dinf, "dual infeasibility tolerance")
      ->capture_default_str();
  app->add_option("--rho", s.rho, "tolerance reduction factor")->capture_default_str();
  app->add_option("--theta", s.theta, "residual decrease ratio")->capture_default_str();
  app->add_option("--delta", s.delta, "penalty growth factor")->capture_default_str();
  app->add_option("--sigma-init", s.sigma_init, "initial penalty factor")->capture_default_str();
  app->add_option("--sigma-max", s.sigma_max, "penalty cap")->capture_default_str();
  app->add_option("--gamma-init", s.gamma_init, "proximal weight")->capture_default_str();
  app->add_option("--gamma-upd", s.gamma_upd, "proximal weight growth")->capture_default_str();
  app->add_option("--gamma-max", s.gamma_max, "proximal weight cap")->capture_default_str();
  app->add_flag("--gamma-update", s.gamma_update, "grow the proximal weight");
  app->add_option("--scaling", s.scaling_iters, "Ruiz iterations")->capture_default_str();
  app->add_option("--max-rank-update", s.max_rank_update, "factor update limit")
      ->capture_default_str();
  app->add_option("--max-rank-update-fraction", s.max_rank_update_fraction,
                  "factor update limit relative to n + m")
      ->capture_default_str();
  app->add_flag("--nonconvex", s.nonconvex, "nonconvex mode");
  app->add_option("--linsys", linsys.value, "linear system")
      ->check(CLI::IsMember({"auto", "kkt", "schur"}))
      ->capture_default_str();
  app->add_option("--max-iter", s.max_outer_iter, "outer iteration limit")->capture_default_str();
  app->add_option("--max-newton-iter", s.max_total_newton_iter, "total Newton iteration limit")
      ->capture_default_str();
  app->add_option("--time-limit", s.time_limit, "time limit in seconds");
  app->add_option("--inner-max-iter", s.inner_max_iter, "Newton steps per outer iteration")
      ->capture_default_str();
  app->add_option("--eig-eps", s.eig_eps, "eigenvalue tolerance")->capture_default_str();
  app->add_option("--eig-max-iter", s.eig_max_iter, "eigenvalue iteration limit")
      ->capture_default_str();
  app->add_flag("--dual-residual-at-trial,!--no-dual-residual-at-trial",
                s.dual_residual_at_trial,
                "evaluate the dual residual at the trial multiplier");
  app->add_flag("!--no-warm-start", s.warm_start, "ignore x0 and y0");
  app->add_option("--proximal-stall-iters", s.proximal_stall_iters,
                  "outer iterations before the proximal term is lowered")
      ->capture_default_str();
}

void finish_settings(Settings& s, const LinsysOption& linsys) {
  s.linsys = parse_linsys_mode(linsys.value);
  s.validate();
}

json vector_json(std::span<const double> v) {
  json a = json::array();
  for (double e : v) a.push_back(e);
  return a;
}

struct RangeSpec {
  std::string text;
  Index step = 0;
};

std::vector<Index> parse_range(const RangeSpec& r) {
  const auto dots = r.text.find("..");
  auto to_index = [](const std::string& s) {
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty()) throw std::runtime_error("invalid range '" + s + "'");
    return static_cast<Index>(v);
  };
  if (dots == std::string::npos) return {to_index(r.text)};
  const Index lo = to_index(r.text.substr(0, dots));
  const Index hi = to_index(r.text.substr(dots + 2));
  if (hi < lo) throw std::runtime_error("empty range '" + r.text + "'");
  return index_range(lo, hi, r.step > 0 ? r.step : 1);
}

std::vector<SolverConfig> solver_configs(const std::vector<std::string>& names,
                                         const Settings& base) {
  std::vector<SolverConfig> configs;
  for (const auto& name : names) {
    Settings s = base;
    if (name == "qpalm") {
    } else if (name == "qpalm_kkt") {
      s.linsys = LinsysMode::kkt;
    } else if (name == "qpalm_schur") {
      s.linsys = LinsysMode::schur;
    } else if (name == "qpalm_noscale") {
      s.scaling_iters = 0;
    } else {
      throw std::runtime_error("unknown solver configuration '" + name + "'");
    }
    configs.push_back({name, s});
  }
  return configs;
}

}  // namespace

std::string result_to_json(const SolveResult& r) {
  json doc;
  doc["status"] = std::string(to_string(r.status));
  doc["objective"] = r.objective;
  doc["prim_res"] = r.prim_res;
  doc["dual_res"] = r.dual_res;
  doc["x"] = vector_json(r.x);
  doc["y"] = vector_json(r.y);
  doc["certificate"] = r.certificate ? vector_json(*r.certificate) : json(nullptr);
  const SolveInfo& i = r.info;
  doc["info"] = {
      {"outer_iterations", i.outer_iterations},
      {"newton_iterations", i.newton_iterations},
      {"factorizations", i.factorizations},
      {"update_rounds", i.update_rounds},
      {"rank1_updates", i.rank1_updates},
      {"row_modifications", i.row_modifications},
      {"setup_time", i.setup_time},
      {"solve_time", i.solve_time},
      {"runtime", i.runtime},
      {"linsys", i.linsys == LinsysKind::kkt ? "kkt" : "schur"},
      {"linsys_ratio", i.linsys_ratio},
      {"lambda_star", i.lambda_star},
      {"objective_scaling", i.c},
      {"proximal_lowered", i.proximal_lowered},
      {"message", i.message},
  };
  return doc.dump(2);
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Proximal augmented Lagrangian QP solver", "qpalm"};
  app.require_subcommand(1);

  Settings settings;
  std::optional<double> env_limit;
  try {
    env_limit = env_time_limit();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_parse_error;
  }
  if (env_limit) settings.time_limit = *env_limit;
  LinsysOption linsys;

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve a problem file, print JSON");
  std::string problem_path;
  std::string warm_path;
  solve_cmd->add_option("file", problem_path, "problem file")->required();
  solve_cmd->add_option("--warm-start", warm_path, "warm start (JSON result or x0/y0 text)");
  add_settings_options(solve_cmd, settings, linsys);

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "write a generated problem file");
  gen_cmd->require_subcommand(1);
  std::string gen_output;
  std::uint64_t seed = 0;
  Index dim_n = 100;
  Index dim_m = 100;
  Index nx = 10;
  Index nu = 5;
  Index horizon = 10;
  double beta = 1.0;
  double density = 0.1;
  bool indefinite = false;
  double min_eig = -1.0;
  auto* gen_port = gen_cmd->add_subcommand("portfolio", "portfolio problem");
  gen_port->add_option("--n", dim_n, "assets")->capture_default_str();
  gen_port->add_option("--beta", beta, "risk aversion")->capture_default_str();
  auto* gen_mpc_cmd = gen_cmd->add_subcommand("mpc", "optimal control problem");
  gen_mpc_cmd->add_option("--nx", nx)->capture_default_str();
  gen_mpc_cmd->add_option("--nu", nu)->capture_default_str();
  gen_mpc_cmd->add_option("--N", horizon, "horizon")->capture_default_str();
  auto* gen_rand = gen_cmd->add_subcommand("random", "random QP");
  gen_rand->add_option("--n", dim_n)->capture_default_str();
  gen_rand->add_option("--m", dim_m)->capture_default_str();
  gen_rand->add_option("--density", density)->capture_default_str();
  gen_rand->add_flag("--indefinite", indefinite, "indefinite Hessian");
  gen_rand->add_option("--min-eig", min_eig, "smallest eigenvalue (indefinite)")
      ->capture_default_str();
  for (auto* c : {gen_port, gen_mpc_cmd, gen_rand}) {
    c->add_option("--seed", seed)->capture_default_str();
    c->add_option("-o,--output", gen_output, "output file")->required();
  }

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark family, print CSV records");
  bench_cmd->require_subcommand(1);
  RangeSpec range;
  std::vector<std::string> solver_names{"qpalm"};
  int threads = 1;
  std::string bench_output;
  int sequence = 0;
  double m_ratio = 1.0;
  auto* bench_port = bench_cmd->add_subcommand("portfolio", "portfolio sizes, mean over the risk sweep");
  bench_port->add_option("--n", range.text, "sizes, e.g. 100..500")->default_str("100..500");
  auto* bench_mpc = bench_cmd->add_subcommand("mpc", "optimal control horizons");
  bench_mpc->add_option("--N", range.text, "horizons, e.g. 5..30")->default_str("5..30");
  bench_mpc->add_option("--nx", nx)->capture_default_str();
  bench_mpc->add_option("--nu", nu)->capture_default_str();
  bench_mpc->add_option("--sequence", sequence,
                        "closed-loop re-solves at the first horizon, cold vs warm");
  auto* bench_rand = bench_cmd->add_subcommand("random", "random QPs");
  bench_rand->add_option("--n", range.text, "sizes")->default_str("100..500");
  bench_rand->add_option("--m-ratio", m_ratio, "rows per variable")->capture_default_str();
  bench_rand->add_option("--density", density)->capture_default_str();
  bench_rand->add_flag("--indefinite", indefinite, "indefinite Hessians (nonconvex mode)");
  for (auto* c : {bench_port, bench_mpc, bench_rand}) {
    c->add_option("--step", range.step, "range step");
    c->add_option("--seed", seed)->capture_default_str();
    c->add_option("--solvers", solver_names,
                  "configurations: qpalm, qpalm_kkt, qpalm_schur, qpalm_noscale")
        ->delimiter(',');
    c->add_option("--threads", threads, "worker threads")->capture_default_str();
    c->add_option("-o,--output", bench_output, "CSV file (default stdout)");
    add_settings_options(c, settings, linsys);
  }

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "statistics over benchmark records");
  stats_cmd->require_subcommand(1);
  std::string records_path;
  double shift = 1.0;
  double stats_limit = env_limit.value_or(3600.0);
  auto* stats_sgm = stats_cmd->add_subcommand("sgm", "shifted geometric means per solver");
  stats_sgm->add_option("--shift", shift, "shift")->capture_default_str();
  stats_sgm->add_option("--time-limit", stats_limit, "runtime charged to failures")
      ->capture_default_str();
  auto* stats_prof = stats_cmd->add_subcommand("profile", "performance profile breakpoints");
  for (auto* c : {stats_sgm, stats_prof}) {
    c->add_option("records", records_path, "records CSV")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_parse_error;
  }

  try {
    if (*solve_cmd) {
      finish_settings(settings, linsys);
      ProblemFile pf = read_problem_file(problem_path);
      Vector x0 = pf.x0.value_or(Vector{});
      Vector y0 = pf.y0.value_or(Vector{});
      if (!warm_path.empty()) {
        WarmStart ws = read_warm_start_file(warm_path);
        if (ws.x) x0 = *ws.x;
        if (ws.y) y0 = *ws.y;
      }
      SolveResult res;
      try {
        Solver solver(std::move(pf.problem), settings);
        res = solver.solve(x0, y0);
      } catch (const std::invalid_argument&) {
        throw;
      } catch (const std::exception& e) {
        err << "error: solver failed: " << e.what() << '\n';
        return exit_solver_failure;
      }
      out << result_to_json(res) << '\n';
      return is_success(res.status) ? exit_ok : exit_solver_failure;
    }
    if (*gen_cmd) {
      QpProblem p;
      if (*gen_port) {
        p = gen_portfolio(dim_n, seed, beta);
      } else if (*gen_mpc_cmd) {
        p = gen_mpc(nx, nu, horizon, seed);
      } else {
        RandomQpOptions o;
        o.n = dim_n;
        o.m = dim_m;
        o.density = density;
        o.convex = !indefinite;
        o.min_eig = min_eig;
        o.seed = seed;
        p = gen_random_qp(o);
      }
      write_problem_file(gen_output, p);
      return exit_ok;
    }
    if (*bench_cmd) {
      finish_settings(settings, linsys);
      std::vector<BenchRecord> records;
      std::string preamble;
      if (*bench_port) {
        if (range.text.empty()) range.text = "100..500";
        if (range.step == 0) range.step = 100;
        records = run_bench(portfolio_cases(parse_range(range), seed),
                            solver_configs(solver_names, settings), threads);
      } else if (*bench_mpc) {
        if (range.text.empty()) range.text = "5..30";
        if (range.step == 0) range.step = 5;
        preamble = "# mpc terminal ingredients: Q_N = Q, X_N = X\n";
        const auto horizons = parse_range(range);
        if (sequence > 0) {
          MpcOptions o;
          o.nx = nx;
          o.nu = nu;
          o.horizon = horizons.front();
          o.seed = seed;
          const auto steps = mpc_sequence(o, sequence, settings);
          for (std::size_t t = 0; t < steps.size(); ++t) {
            const std::string id = "mpc_step" + std::to_string(t + 1);
            for (const auto& [name, r] :
                 {std::pair{"cold", &steps[t].cold}, std::pair{"warm", &steps[t].warm}}) {
              records.push_back({id, name, r->info.runtime, r->status, r->objective,
                                 r->prim_res, r->dual_res, r->info.newton_iterations});
            }
          }
        } else {
          records = run_bench(mpc_cases(horizons, nx, nu, seed),
                              solver_configs(solver_names, settings), threads);
        }
      } else {
        if (range.text.empty()) range.text = "100..500";
        if (range.step == 0) range.step = 100;
        if (indefinite) settings.nonconvex = true;
        records = run_bench(random_cases(parse_range(range), m_ratio, density, !indefinite, seed),
                            solver_configs(solver_names, settings), threads);
      }
      std::ofstream file;
      if (!bench_output.empty()) {
        file.open(bench_output);
        if (!file) throw std::runtime_error("cannot write '" + bench_output + "'");
      }
      std::ostream& dst = bench_output.empty() ? out : file;
      dst << preamble;
      write_records_csv(dst, records);
      return exit_ok;
    }
    if (*stats_cmd) {
      const auto records = read_records_csv_file(records_path);
      if (*stats_sgm) {
        out << "solver,sgm\n";
        for (const auto& row : sgm_table(records, stats_limit, shift)) {
          out << row.solver << ',' << detail::format_double(row.sgm) << '\n';
        }
      } else {
        const auto prof = performance_profile(records);
        for (const auto& p : prof.excluded) {
          err << "warning: problem '" << p << "' solved by no solver, excluded\n";
        }
        out << "solver,f,q\n";
        for (const auto& b : prof.breakpoints) {
          out << b.solver << ',' << detail::format_double(b.f) << ','
              << detail::format_double(b.q) << '\n';
        }
      }
      return exit_ok;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_parse_error;
  }
  return exit_parse_error;
}

}  // namespace qpalm
