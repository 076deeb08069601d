#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qpalm/ldl.hpp"
#include "qpalm/problem.hpp"
#include "qpalm/settings.hpp"

namespace qpalm {

/// Constraints i with (Ax + Sigma_y^{-1} y)_i outside the closed box
/// [l_i, u_i], with the changes relative to a previous set.
struct ActiveSet {
  std::vector<Index> members;  // sorted
  std::vector<Index> entered;
  std::vector<Index> left;
  std::vector<char> flags;     // flags[i] != 0 iff i is a member

  bool contains(Index i) const { return flags[i] != 0; }
};

/// `shifted` holds Ax + Sigma_y^{-1} y.
ActiveSet detect_active_set(std::span<const double> shifted,
                            std::span<const double> l,
                            std::span<const double> u,
                            const ActiveSet* previous = nullptr);
ActiveSet detect_active_set(const QpProblem& p, std::span<const double> x,
                            std::span<const double> y,
                            std::span<const double> sigma_y,
                            const ActiveSet* previous = nullptr);

struct SubproblemGradient {
  Vector grad;    // Qx + q + A'ytrial + Sigma_x^{-1}(x - xhat)
  Vector ytrial;  // y + Sigma_y(Ax - z)
  Vector z;       // clamp(Ax + Sigma_y^{-1} y, l, u)
  Vector ax;
  Vector qx;
};

SubproblemGradient subproblem_gradient(const QpProblem& p,
                                       std::span<const double> x,
                                       std::span<const double> xhat,
                                       std::span<const double> y,
                                       std::span<const double> sigma_y,
                                       std::span<const double> sigma_x_inv);

enum class LinsysKind { kkt, schur };

struct LinsysChoice {
  LinsysKind kind = LinsysKind::schur;
  double ratio = 0.0;        // n/(n+m) |K|^2 / |H~|^2
  double kkt_nnz = 0.0;      // |K|
  double schur_estimate = 0.0;  // |H~|
};

/// Chooses between the KKT and Schur formulations from nonzero counts of
/// the full (all constraints active) matrices. KKT iff ratio < 2.
LinsysChoice select_linsys(const SparseMatrix& Q, const SparseMatrix& A,
                           LinsysMode mode = LinsysMode::automatic);

struct NewtonCounters {
  long factorizations = 0;
  long update_rounds = 0;    // refreshes handled by updates
  long rank1_updates = 0;    // rank-1 modifications (Schur, KKT reweighting)
  long row_modifications = 0;  // KKT row additions/deletions
  long solves = 0;
};

/// Factored Newton system of the inner subproblem, kept consistent with an
/// active set and penalty vector through low-rank modifications when few
/// entries change.
class NewtonSystem {
 public:
  /// `p` must outlive the system. When `perm` is empty a minimum degree
  /// ordering is computed for the worst-case pattern of the chosen kind.
  NewtonSystem(const QpProblem& p, LinsysKind kind, int max_rank_update,
               double max_rank_update_fraction, Permutation perm = {});

  /// Brings the factorization in line with (active, sigma_y, sigma_x_inv).
  /// Returns true when the call refactorized from scratch.
  bool refresh(const ActiveSet& active, std::span<const double> sigma_y,
               std::span<const double> sigma_x_inv, bool force_refactor = false);

  /// Newton direction d with H d = -grad (or the KKT equivalent).
  Vector direction(std::span<const double> grad);
  /// KKT mode only: the multiplier block of the last direction solve.
  const Vector& last_lambda() const { return lambda_; }

  LinsysKind kind() const { return kind_; }
  bool factored() const { return factored_; }
  void invalidate() { factored_ = false; }
  const NewtonCounters& counters() const { return counters_; }
  const Permutation& permutation() const { return perm_; }
  const LdlFactors& factors() const { return factors_; }

  /// Pattern used for the fill-reducing ordering.
  static SparseMatrix worst_case_pattern(const QpProblem& p, LinsysKind kind);

 private:
  void factorize(std::span<const double> sigma_y,
                 std::span<const double> sigma_x_inv);
  bool try_update(const ActiveSet& active, std::span<const double> sigma_y);
  SparseVector kkt_column(Index i) const;
  SparseVector schur_vector(Index i, double weight) const;

  const QpProblem* p_;
  LinsysKind kind_;
  int max_rank_update_;
  double max_rank_update_fraction_;
  Permutation perm_;
  SparseMatrix at_;  // A^T: column i holds row i of A
  LdlFactors factors_;
  bool factored_ = false;
  std::vector<char> active_;
  Vector sigma_snapshot_;  // penalty each row was last written with
  Vector sigma_x_inv_;
  Vector lambda_;
  NewtonCounters counters_;
};

}  // namespace qpalm
