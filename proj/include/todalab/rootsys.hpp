#pragma once

#include "todalab/exact.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace todalab {

enum class LieType { A, B, C, D, E, F, G };

char to_char(LieType t);
/// Accepts "A".."G" (case-insensitive); throws std::invalid_argument otherwise.
LieType parse_lie_type(std::string_view s);

/// Finite root system of a simple Lie algebra in simple-root coordinates.
///
/// Simple roots follow the Bourbaki labeling (E: alpha_2 is the node attached
/// to alpha_4; B_n: alpha_n short; C_n: alpha_n long; F_4: alpha_3, alpha_4
/// short; G_2: alpha_1 short). The Killing form is normalized so long roots
/// have nu(alpha, alpha) = 2.
///
/// Extended data (gram_ext, ext_marks) is indexed over Z = {-delta} u Pi with
/// -delta at index 0 and alpha_i at index i.
struct RootSystem {
  LieType type{};
  int rank = 0;
  IntMatrix cartan;                // a_ij = 2 nu(a_i, a_j) / nu(a_j, a_j)
  RationalMatrix gram;             // nu on Pi
  std::vector<IntVector> roots;    // sorted lexicographically
  std::vector<IntVector> positive_roots;
  IntVector delta;                 // highest root
  IntVector marks;                 // n_alpha over Pi (equal to delta)
  int coxeter = 0;
  RationalMatrix gram_ext;         // nu over Z

  std::string name() const;
  /// (n_{-delta} = 1, n_1, ..., n_l)
  IntVector ext_marks() const;
  bool contains(const IntVector& v) const;
};

void validate_type_rank(LieType type, int rank);

RootSystem build_root_system(LieType type, int rank);

int height(const IntVector& v);

/// Sum of the marks over the extended simple roots.
int coxeter_number(const RootSystem& rs);

/// {beta in roots : height(beta) = 1 mod r} equals the extended simple roots.
bool height_grading_check(const RootSystem& rs);

/// alpha - beta is not a root for distinct simple alpha, beta; alpha + delta is
/// not a root for positive alpha.
bool extended_simple_sums_check(const RootSystem& rs);

struct DegreeData {
  IntVector degrees;
  int genus = 2;
};

struct PolystabilityReport {
  bool polystable = false;
  RationalVector inverse_gram_times_degrees;
  std::string violation;  // empty when polystable
};

/// 2 - 2g <= d_i and (R d)_i < 0 for all i, with R the inverse of the Gram
/// matrix on Pi.
PolystabilityReport polystability_degree_check(const RootSystem& rs, const DegreeData& deg);

/// Same inequalities for rational degree data and an arbitrary invertible
/// finite Gram matrix; `euler_characteristic` stands in for 2 - 2g.
PolystabilityReport polystability_check(const RationalMatrix& finite_gram, const RationalVector& degrees,
                                        const Rational& euler_characteristic);

struct InvariantCheck {
  std::string name;
  bool passed = false;
};

/// Every RootSystem invariant, individually reported.
std::vector<InvariantCheck> check_invariants(const RootSystem& rs);

nlohmann::json to_json(const RootSystem& rs);

}  // namespace todalab
