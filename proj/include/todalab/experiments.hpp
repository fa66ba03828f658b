#pragma once

#include "todalab/maxprin.hpp"
#include "todalab/toda.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace todalab {

struct ExperimentSetup {
  TorusGrid grid{2 * 3.14159265358979323846, 64};
  AffineSystem system;
  /// Diagram before folding, when `system` is a fold.
  std::optional<AffineSystem> unfolded;
  std::vector<Divisor> divisors;  // one per node of `system`
  std::vector<double> amplitudes;
  SolverOptions solver;
  double tau = 1e-6;
};

struct Verdict {
  std::string name;
  bool pass = false;
  double margin = 0.0;
  std::string mask;
  nlohmann::json metadata = nlohmann::json::object();
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::pair<std::string, Field>> fields;
};

/// Hypothesis of an experiment not met by its input.
class ExperimentRejected : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

nlohmann::json to_json(const Verdict& v);

/// Pointwise D >= E as divisor functions.
bool divisor_geq(const Divisor& D, const Divisor& E);
bool divisor_equal(const Divisor& D, const Divisor& E);

/// Energies of the unfolded diagram recovered from a raw-mode solve of a fold.
std::vector<Field> unfolded_energies(const TodaProblem& p, const TodaSolution& sol, const AffineSystem& unfolded);

/// Matrix field of the ratio system
///   Lap v_a = sum_b lambda_a M_ab L_b / lambda_b v_b,
///   v_a = lambda_a log(W_a(t) / W_a(s)),
/// with L_b the logarithmic mean of W_b(s), W_b(t).
MatrixField ratio_system(const TodaProblem& p, const TodaSolution& s, const TodaSolution& t,
                         std::vector<Field>* ratios = nullptr);

Verdict monotonicity_experiment(const ExperimentSetup& setup, const std::vector<double>& t_values);
Verdict ordering_experiment(const ExperimentSetup& setup);
Verdict curvature_experiment(const ExperimentSetup& setup, double t);
/// `divisors` and `amplitudes` index the extended diagram of (type, rank).
Verdict folding_consistency_experiment(LieType type, int rank, const TorusGrid& grid,
                                       const std::vector<Divisor>& divisors, const std::vector<double>& amplitudes,
                                       double t, const SolverOptions& solver);
Verdict limit_experiment(const ExperimentSetup& setup, const std::vector<double>& eps_values);

}  // namespace todalab
