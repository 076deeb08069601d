#include "qpalm/settings.hpp"

#include <stdexcept>
#include <string>

namespace qpalm {

LinsysMode parse_linsys_mode(std::string_view s) {
  if (s == "auto") return LinsysMode::automatic;
  if (s == "kkt") return LinsysMode::kkt;
  if (s == "schur") return LinsysMode::schur;
  throw std::invalid_argument("unknown linear system mode '" + std::string(s) + "'");
}

std::string_view to_string(LinsysMode mode) {
  switch (mode) {
    case LinsysMode::automatic: return "auto";
    case LinsysMode::kkt: return "kkt";
    case LinsysMode::schur: return "schur";
  }
  return "auto";
}

void Settings::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("settings: ") + what);
  };
  require(eps_abs > 0 && eps_rel >= 0, "eps_abs must be > 0 and eps_rel >= 0");
  require(delta_abs0 > 0 && delta_rel0 >= 0, "initial inner tolerances must be positive");
  require(eps_pinf > 0 && eps_dinf > 0, "infeasibility tolerances must be > 0");
  require(rho > 0 && rho < 1, "rho must lie in (0,1)");
  require(theta > 0 && theta < 1, "theta must lie in (0,1)");
  require(delta > 1, "delta must be > 1");
  require(sigma_init > 0, "sigma_init must be > 0");
  require(sigma_max > 0, "sigma_max must be > 0");
  require(gamma_init > 0 && gamma_upd >= 1 && gamma_max >= gamma_init,
          "gamma parameters out of range");
  require(scaling_iters >= 0, "scaling must be >= 0");
  require(max_rank_update >= 0 && max_rank_update_fraction >= 0,
          "rank update limits must be >= 0");
  require(max_outer_iter > 0 && max_total_newton_iter > 0, "iteration limits must be > 0");
  require(time_limit > 0, "time limit must be > 0");
  require(inner_max_iter > 0, "inner_max_iter must be > 0");
  require(eig_eps > 0 && eig_max_iter > 0, "eigenvalue settings must be > 0");
  require(proximal_stall_iters >= 0, "proximal_stall_iters must be >= 0");
}

}  // namespace qpalm
