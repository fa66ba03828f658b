#pragma once

#include "todalab/exact.hpp"
#include "todalab/rootsys.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace todalab {

enum class Shape { path, prong, cycle, other };

std::string to_string(Shape s);

/// Generalized Cartan matrix of affine type.
///
/// Rows are equations: the variant Toda system reads
///   (1/2) Lap log w_i = sum_j A_ij w_j - c.
/// With A_ij = 2 nu(i,j)/nu(j,j) the left kernel lambda is the marks vector and
/// the right kernel u has u_j = n_j nu(j,j)/2 up to scale.
struct AffineSystem {
  std::string name;
  int size = 0;
  IntMatrix A;
  RationalVector right_kernel;  // u, A u = 0
  RationalVector left_kernel;   // lambda, lambda^T A = 0
  RationalVector symmetrizer;   // d with A diag(d) symmetric, d_0 = 2
  Shape shape = Shape::other;
  std::vector<std::string> node_labels;
  /// Unfolded nodes merged into each node (identity for unfolded systems).
  std::vector<IntVector> orbits;
  /// Nodes whose variant unknown was halved by the fold (w' = w / 2).
  std::vector<bool> halved;

  /// nu_sym = A diag(d) / 2; equals gram_ext for an unfolded system.
  RationalMatrix symmetric_gram() const;
};

struct Involution {
  IntVector perm;  // over extended nodes, index 0 = -delta
};

AffineSystem extended_affine(const RootSystem& rs);

/// Diagram involution sigma_0 used by the folds; identity except A_n (n >= 2)
/// and E_6. D_{2n+1} is rejected since no fold of it is implemented.
Involution sigma0(LieType type, int rank);

/// Merges the orbits of inv. Orbits are ordered by graph distance from node 0.
AffineSystem fold(const AffineSystem& ext, const Involution& inv);

struct Kernels {
  RationalVector u;
  RationalVector lambda;
};

/// Exact right and left kernels, normalized so the smallest entry is 1.
Kernels affine_kernels(const IntMatrix& A);

Shape classify_shape(const IntMatrix& A, const RationalVector& lambda);

/// Node order along a path diagram starting at node 0.
IntVector path_order(const AffineSystem& sys);

/// Relabels nodes by `order` (order[k] = old index of new node k).
AffineSystem permute(const AffineSystem& sys, const IntVector& order);

/// Extended diagram of (type, rank), folded by sigma_0 when requested.
AffineSystem affine_by_spec(LieType type, int rank, bool folded);

nlohmann::json to_json(const AffineSystem& sys);

}  // namespace todalab
