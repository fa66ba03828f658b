#pragma once

#include "todalab/grid.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace todalab {

/// Sampled matrix field x -> C(x), one n x n matrix per sample.
struct MatrixField {
  int n = 0;
  std::vector<Eigen::MatrixXd> samples;

  static MatrixField constant(const Eigen::MatrixXd& C, std::size_t count = 1);
  void validate() const;
};

struct CheckVerdict {
  bool ok = true;
  std::size_t sample = 0;  // witness location
  int i = -1;
  int j = -1;
  double value = 0.0;
};

/// c_ii >= 0 and c_ij <= 0 (i != j) at every sample, up to tol.
CheckVerdict check_cooperative(const MatrixField& C, double tol = 1e-12);
/// sum_i c_ij >= 0 for every column j at every sample, up to tol. Witness in j.
CheckVerdict check_cdd(const MatrixField& C, double tol = 1e-12);

struct CouplingVerdict {
  bool ok = true;
  std::vector<int> part_a;  // c_ij == 0 for all i in A, j in B
  std::vector<int> part_b;
};

/// Support graph i -> j when c_ij is not identically zero (sup > zero_tol).
std::vector<std::vector<bool>> support(const MatrixField& C, double zero_tol = 1e-12);
CouplingVerdict check_fully_coupled(const MatrixField& C, double zero_tol = 1e-12);

struct WeakerResult {
  bool feasible = false;
  std::vector<Field> lambda;       // lambda[i][sample]
  double max_residual = 0.0;
  std::size_t witness_sample = 0;  // worst sample
  std::vector<bool> identically_zero;
  bool minimal = false;
};

struct WeakerOptions {
  double feasibility_tol = 1e-10;
  double zero_tol = 1e-12;
  /// Coefficients fixed in advance (index into vs -> value).
  std::map<int, double> pins;
  /// Try to pin zero coefficients to positive values to enlarge the support.
  bool maximize_support = true;
};

/// Finds lambda_i(x) >= 0 with A(x)^T v0 = sum_i lambda_i(x) (v0 - v_i).
WeakerResult a_weaker(const MatrixField& A, const Eigen::VectorXd& v0, const std::vector<Eigen::VectorXd>& vs,
                      const WeakerOptions& opt = {});

struct MPSetup {
  std::vector<Eigen::VectorXd> S;
  std::vector<bool> boundary;
  std::vector<std::vector<int>> edges;                 // out-neighbours
  std::vector<std::vector<Field>> lambda_fields;       // per vertex, per edge
  std::vector<std::string> labels;
};

struct SubsetGraph {
  MPSetup setup;
  bool hypotheses_ok = false;      // minimal weakness + reachability
  bool minimal_ok = false;
  bool reachable_ok = false;
  bool smaller_subset_ok = false;  // every proper nonempty A points to some B strictly inside A
  double closed_form_deviation = 0.0;
  std::string error;               // input hypothesis failure, if any
};

/// Vertices e_A (A encoded as a bitmask, vertex index = mask) plus K nu at
/// index 2^n; boundary {0, K nu}.
SubsetGraph build_subset_graph(const MatrixField& C, const Eigen::VectorXd& nu, double K);

/// Closed-form coefficients for e_A. A proper A has one neighbour per index
/// i: A \ {i} when i is in A, A u {i} otherwise. The full set has the
/// neighbours (full \ {i})_i followed by K nu, with K nu's coefficient 1.
std::vector<double> closed_form_lambda(const Eigen::MatrixXd& C, unsigned mask, const Eigen::VectorXd& nu, double K);

/// Per-vertex: can a boundary vertex be reached along directed edges.
std::vector<bool> reachable(const MPSetup& setup);

struct MPVerdict {
  double interior_min = 0.0;
  double boundary_min = 0.0;
  double margin = 0.0;  // interior_min - boundary_min
  bool inequality_holds = false;
  bool equality_case = false;
  bool constancy_holds = true;
  double pde_residual = -1.0;  // sup |Lap u - A u| when a grid is given
};

/// u[i] is the i-th component field; samples align with A.
MPVerdict mp_verdict(const std::vector<Field>& u, const MatrixField& A, const MPSetup& setup,
                     const TorusGrid* grid = nullptr, double tol = 1e-9);

enum class DaiLiOutcome { all_zero, all_positive, violation, refused };
std::string to_string(DaiLiOutcome o);

struct DaiLiVerdict {
  DaiLiOutcome outcome = DaiLiOutcome::refused;
  std::string reason;
  double min_value = 0.0;
  std::vector<double> min_per_component;
  std::vector<int> claim_a6_inconsistent;  // components vanishing somewhere but not identically
};

DaiLiVerdict dai_li_gen_verdict(const std::vector<Field>& u, const MatrixField& C, const Eigen::VectorXd& nu,
                                double tol = 1e-9);

nlohmann::json to_json(const CheckVerdict& v);
nlohmann::json to_json(const CouplingVerdict& v);
nlohmann::json to_json(const DaiLiVerdict& v);

}  // namespace todalab
