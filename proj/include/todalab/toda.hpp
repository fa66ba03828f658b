#pragma once

#include "todalab/folding.hpp"
#include "todalab/grid.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace todalab {

/// raw:     Lap log e_i = kappa + 4 sum_j nu_ij e_j          (unknown e)
/// variant: Lap log w_i = kappa + 2 sum_j A_ij w_j           (w = nu_ii e_i)
/// lemma66: (1/2) Lap log w_i = sum_j A_ij w_j - c           (kappa = -2c)
enum class Mode { raw, variant, lemma66 };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

/// Discrete system for the node unknowns W_i = t^2 G_i exp(u_i):
///   Lap_h u_i = kappa + 4 pi deg(D_i) / A + sum_j M_ij W_j.
/// The point masses of log W sit in rho_i = Lap_h log G_i, so the smooth
/// unknown u never sees a logarithmic singularity. The solution family is
/// one-dimensional; it is pinned by mean(sum_i lambda_i u_i) = 0.
struct TodaProblem {
  TorusGrid grid;
  AffineSystem system;
  Mode mode = Mode::raw;
  Eigen::MatrixXd M;
  Eigen::VectorXd lambda;
  std::vector<Forcing> forcings;
  Field kappa;
  Eigen::VectorXd point_mass;  // 4 pi deg_i / A
  double t = 1.0;
  double c = 0.0;  // lemma66 constant term

  int nodes() const { return system.size; }
};

struct AssembleOptions {
  Mode mode = Mode::raw;
  double t = 1.0;
  /// Per-node additive constant in log G (default 0).
  std::vector<double> amplitudes;
  /// Overrides the compatible default kappa (raw, variant).
  std::optional<Field> kappa;
  /// Overrides the default lemma66 constant.
  std::optional<double> c;
};

class AssemblyError : public std::invalid_argument {
 public:
  AssemblyError(const std::string& what, double deficit) : std::invalid_argument(what), deficit(deficit) {}
  double deficit;
};

TodaProblem assemble(const TorusGrid& grid, const AffineSystem& system, const std::vector<Divisor>& divisors,
                     const AssembleOptions& opt);

/// Same data at a new scale t.
TodaProblem with_t(const TodaProblem& p, double t);

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int max_backtracks = 20;
};

struct TodaSolution {
  std::vector<Field> u;
  std::vector<Field> W;  // node unknowns t^2 G exp(u)
  double t = 1.0;
  int iterations = 0;
  double residual_sup = 0.0;
  std::vector<double> residual_per_node;
  double pin = 0.0;  // mean(sum lambda_i u_i)
  std::vector<double> history;  // L2 residual per iteration
};

class NewtonFailure : public std::runtime_error {
 public:
  NewtonFailure(const std::string& what, TodaSolution best) : std::runtime_error(what), best(std::move(best)) {}
  TodaSolution best;
};

/// Constant-shift starting point: solves the averaged system for constant u.
std::vector<Field> initial_guess(const TodaProblem& p);

/// Damped Newton with GMRES inner solves and a Fourier block preconditioner.
/// Throws NewtonFailure when max_iter is reached above tolerance.
TodaSolution newton_solve(const TodaProblem& p, const std::optional<std::vector<Field>>& init = std::nullopt,
                          const SolverOptions& opt = {});

struct SweepFailure : public std::runtime_error {
  SweepFailure(const std::string& what, double t) : std::runtime_error(what), t(t) {}
  double t;
};

/// Warm-started solves along a strictly ascending t ladder.
std::vector<TodaSolution> continuation_sweep(const TodaProblem& p, const std::vector<double>& t_values,
                                             const SolverOptions& opt = {});

/// Residual fields of the discrete system at u (no pin term).
std::vector<Field> residual(const TodaProblem& p, const std::vector<Field>& u);

struct DerivedFields {
  std::vector<Field> e;        // root energies
  std::vector<Field> e_tilde;  // nu_ii e_i
  Field energy;                // sum_i e_i over nodes
  Field Q;                     // 4 sum nu_ij e_i e_j
};

DerivedFields derived_fields(const TodaProblem& p, const TodaSolution& sol);

/// Q = 4 sum_ij nu_ij e_i e_j pointwise for a symmetric Gram matrix.
Field quadratic_form(const Eigen::MatrixXd& nu, const std::vector<Field>& e);

Eigen::MatrixXd to_eigen(const RationalMatrix& m);
Eigen::VectorXd to_eigen(const RationalVector& v);

}  // namespace todalab
