#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

namespace todalab {

using Rational = mpq_class;
using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;
using IntVector = std::vector<int>;
using IntMatrix = std::vector<IntVector>;

/// Formats a rational as "p/q" with q >= 1 (integers print as "p/1").
std::string to_fraction_string(const Rational& q);

RationalMatrix to_rational(const IntMatrix& m);
RationalMatrix transpose(const RationalMatrix& m);
RationalVector multiply(const RationalMatrix& m, const RationalVector& v);
RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b);

/// Basis of the right nullspace {x : m x = 0}, from the reduced row echelon form.
/// Each basis vector has a 1 in its free pivot slot.
std::vector<RationalVector> nullspace(const RationalMatrix& m);

/// Exact inverse; nullopt when singular.
std::optional<RationalMatrix> inverse(const RationalMatrix& m);

std::vector<double> to_double(const RationalVector& v);

}  // namespace todalab
