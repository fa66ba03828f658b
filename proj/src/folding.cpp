#include "todalab/folding.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>

namespace todalab {

std::string to_string(Shape s) {
  switch (s) {
    case Shape::path: return "path";
    case Shape::prong: return "prong";
    case Shape::cycle: return "cycle";
    case Shape::other: return "other";
  }
  return "other";
}

RationalMatrix AffineSystem::symmetric_gram() const {
  RationalMatrix g(size, RationalVector(size));
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) g[i][j] = Rational(A[i][j]) * symmetrizer[j] / 2;
  return g;
}

namespace {

std::vector<IntVector> adjacency(const IntMatrix& A) {
  const int n = static_cast<int>(A.size());
  std::vector<IntVector> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && A[i][j] != 0) adj[i].push_back(j);
  return adj;
}

IntVector bfs_distance(const IntMatrix& A, int root) {
  const auto adj = adjacency(A);
  IntVector dist(A.size(), -1);
  std::deque<int> q{root};
  dist[root] = 0;
  while (!q.empty()) {
    const int v = q.front();
    q.pop_front();
    for (int w : adj[v])
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        q.push_back(w);
      }
  }
  return dist;
}

RationalVector positive_kernel(const RationalMatrix& m, const char* which) {
  const auto basis = nullspace(m);
  if (basis.size() != 1)
    throw std::invalid_argument(std::string("not of affine type: ") + which + " kernel has dimension " +
                                std::to_string(basis.size()));
  RationalVector v = basis[0];
  if (v[0] < 0)
    for (auto& x : v) x = -x;
  Rational lo = v[0];
  for (const auto& x : v) {
    if (x <= 0) throw std::invalid_argument(std::string("not of affine type: ") + which + " kernel is not positive");
    lo = std::min(lo, x);
  }
  for (auto& x : v) x /= lo;
  return v;
}

RationalVector symmetrizer_of(const IntMatrix& A) {
  const int n = static_cast<int>(A.size());
  RationalVector d(n, Rational(0));
  d[0] = 2;
  const auto adj = adjacency(A);
  std::deque<int> q{0};
  std::vector<bool> seen(n, false);
  seen[0] = true;
  while (!q.empty()) {
    const int i = q.front();
    q.pop_front();
    for (int j : adj[i]) {
      // A_ij d_j = A_ji d_i
      const Rational dj = Rational(A[j][i]) * d[i] / A[i][j];
      if (!seen[j]) {
        seen[j] = true;
        d[j] = dj;
        q.push_back(j);
      } else if (d[j] != dj) {
        throw std::invalid_argument("matrix is not symmetrizable");
      }
    }
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw std::invalid_argument("diagram is not connected");
  return d;
}

std::string node_name(int i) { return i == 0 ? "-delta" : "alpha" + std::to_string(i); }

void validate_gcm(const IntMatrix& A) {
  const std::size_t n = A.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (A[i].size() != n) throw std::invalid_argument("matrix is not square");
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j && A[i][j] != 2) throw std::invalid_argument("diagonal entries must be 2");
      if (i != j && A[i][j] > 0) throw std::invalid_argument("off-diagonal entries must be <= 0");
      if ((A[i][j] == 0) != (A[j][i] == 0)) throw std::invalid_argument("A_ij = 0 must imply A_ji = 0");
    }
  }
}

AffineSystem finish(std::string name, IntMatrix A, std::vector<std::string> labels, std::vector<IntVector> orbits,
                    std::vector<bool> halved) {
  validate_gcm(A);
  AffineSystem s;
  s.name = std::move(name);
  s.size = static_cast<int>(A.size());
  const auto k = affine_kernels(A);
  s.right_kernel = k.u;
  s.left_kernel = k.lambda;
  s.symmetrizer = symmetrizer_of(A);
  s.shape = classify_shape(A, k.lambda);
  s.A = std::move(A);
  s.node_labels = std::move(labels);
  s.orbits = std::move(orbits);
  s.halved = std::move(halved);
  return s;
}

}  // namespace

Kernels affine_kernels(const IntMatrix& A) {
  const RationalMatrix m = to_rational(A);
  return {positive_kernel(m, "right"), positive_kernel(transpose(m), "left")};
}

Shape classify_shape(const IntMatrix& A, const RationalVector& lambda) {
  const auto adj = adjacency(A);
  const int n = static_cast<int>(A.size());
  int max_deg = 0;
  bool all_two = true;
  int edges = 0;
  for (const auto& a : adj) {
    max_deg = std::max<int>(max_deg, static_cast<int>(a.size()));
    all_two = all_two && a.size() == 2;
    edges += static_cast<int>(a.size());
  }
  edges /= 2;
  if (n >= 3 && all_two) return Shape::cycle;
  const bool tree = edges == n - 1;
  if (tree && max_deg <= 2) return Shape::path;
  if (tree && adj[0].size() == 1) {
    const int hub = adj[0][0];
    for (int w : adj[hub])
      if (w != 0 && adj[w].size() == 1 && lambda[w] == lambda[0]) return Shape::prong;
  }
  return Shape::other;
}

AffineSystem extended_affine(const RootSystem& rs) {
  const int n = rs.rank + 1;
  IntMatrix A(n, IntVector(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Rational a = 2 * rs.gram_ext[i][j] / rs.gram_ext[j][j];
      if (a.get_den() != 1) throw std::logic_error("non-integral extended Cartan entry");
      A[i][j] = static_cast<int>(a.get_num().get_si());
    }
  std::vector<std::string> labels;
  std::vector<IntVector> orbits;
  for (int i = 0; i < n; ++i) {
    labels.push_back(node_name(i));
    orbits.push_back({i});
  }
  AffineSystem s = finish(rs.name() + "~", std::move(A), std::move(labels), std::move(orbits),
                          std::vector<bool>(n, false));
  // lambda must reproduce the marks
  const IntVector marks = rs.ext_marks();
  for (int i = 0; i < n; ++i)
    if (s.left_kernel[i] != marks[i]) throw std::logic_error("left kernel differs from marks for " + rs.name());
  return s;
}

Involution sigma0(LieType type, int rank) {
  validate_type_rank(type, rank);
  Involution inv;
  inv.perm.resize(rank + 1);
  for (int i = 0; i <= rank; ++i) inv.perm[i] = i;
  if (type == LieType::A && rank >= 2) {
    for (int i = 1; i <= rank; ++i) inv.perm[i] = rank + 1 - i;
  } else if (type == LieType::E && rank == 6) {
    inv.perm[1] = 6;
    inv.perm[6] = 1;
    inv.perm[3] = 5;
    inv.perm[5] = 3;
  } else if (type == LieType::D && rank % 2 == 1) {
    throw std::invalid_argument("D" + std::to_string(rank) + ": the involution of odd D_n is not folded");
  }
  return inv;
}

AffineSystem fold(const AffineSystem& ext, const Involution& inv) {
  const int n = ext.size;
  const IntVector& p = inv.perm;
  if (static_cast<int>(p.size()) != n) throw std::invalid_argument("involution size mismatch");
  for (int i = 0; i < n; ++i) {
    if (p[i] < 0 || p[i] >= n || p[p[i]] != i) throw std::invalid_argument("not an involution");
    for (int j = 0; j < n; ++j)
      if (ext.A[p[i]][p[j]] != ext.A[i][j]) throw std::invalid_argument("involution is not a diagram automorphism");
  }
  if (p[0] != 0) throw std::invalid_argument("involution must fix node 0");
  bool identity = true;
  for (int i = 0; i < n; ++i) identity = identity && p[i] == i;
  if (identity) return ext;

  const IntVector dist = bfs_distance(ext.A, 0);
  std::vector<IntVector> orbits;
  std::vector<bool> used(n, false);
  IntVector order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });
  for (int i : order) {
    if (used[i]) continue;
    IntVector o{i};
    used[i] = true;
    if (p[i] != i) {
      o.push_back(p[i]);
      used[p[i]] = true;
      std::sort(o.begin(), o.end());
    }
    orbits.push_back(o);
  }

  const int m = static_cast<int>(orbits.size());
  IntMatrix F(m, IntVector(m, 0));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int j : orbits[b]) F[a][b] += ext.A[orbits[a][0]][j];

  std::vector<bool> halved(m, false);
  for (int b = 0; b < m; ++b) {
    if (F[b][b] == 2) continue;
    if (F[b][b] != 1) throw std::logic_error("unexpected folded diagonal entry");
    halved[b] = true;
    for (int a = 0; a < m; ++a) F[a][b] *= 2;
  }

  std::vector<std::string> labels;
  for (const auto& o : orbits) {
    if (o.size() == 1) {
      labels.push_back(ext.node_labels[o[0]]);
    } else {
      labels.push_back("{" + ext.node_labels[o[0]] + "," + ext.node_labels[o[1]] + "}");
    }
  }
  std::vector<IntVector> provenance;
  for (const auto& o : orbits) {
    IntVector merged;
    for (int i : o) merged.insert(merged.end(), ext.orbits[i].begin(), ext.orbits[i].end());
    provenance.push_back(merged);
  }

  std::string name = ext.name + " folded";
  const bool any_half = std::any_of(halved.begin(), halved.end(), [](bool b) { return b; });
  if (ext.name.rfind("A", 0) == 0) {
    name = any_half ? "C" + std::to_string(m - 1) + "~'" : "C" + std::to_string(m - 1) + "~t";
  } else if (ext.name == "E6~") {
    name = "F4~t";
  }
  return finish(name, std::move(F), std::move(labels), std::move(provenance), std::move(halved));
}

IntVector path_order(const AffineSystem& sys) {
  if (sys.shape != Shape::path) throw std::invalid_argument(sys.name + " is not a path diagram");
  const auto adj = adjacency(sys.A);
  if (sys.size > 1 && adj[0].size() != 1)
    throw std::invalid_argument(sys.name + ": node 0 is not an end of the path");
  IntVector order{0};
  int prev = -1;
  int cur = 0;
  while (static_cast<int>(order.size()) < sys.size) {
    int next = -1;
    for (int w : adj[cur])
      if (w != prev) next = w;
    prev = cur;
    cur = next;
    order.push_back(cur);
  }
  return order;
}

AffineSystem permute(const AffineSystem& sys, const IntVector& order) {
  const int n = sys.size;
  if (static_cast<int>(order.size()) != n) throw std::invalid_argument("permutation size mismatch");
  AffineSystem out = sys;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) out.A[a][b] = sys.A[order[a]][order[b]];
    out.right_kernel[a] = sys.right_kernel[order[a]];
    out.left_kernel[a] = sys.left_kernel[order[a]];
    out.symmetrizer[a] = sys.symmetrizer[order[a]];
    out.node_labels[a] = sys.node_labels[order[a]];
    out.orbits[a] = sys.orbits[order[a]];
    out.halved[a] = sys.halved[order[a]];
  }
  return out;
}

AffineSystem affine_by_spec(LieType type, int rank, bool folded) {
  AffineSystem ext = extended_affine(build_root_system(type, rank));
  if (!folded) return ext;
  return fold(ext, sigma0(type, rank));
}

nlohmann::json to_json(const AffineSystem& sys) {
  auto fracs = [](const RationalVector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& q : v) a.push_back(to_fraction_string(q));
    return a;
  };
  nlohmann::json j;
  j["name"] = sys.name;
  j["size"] = sys.size;
  j["A"] = sys.A;
  j["right_kernel"] = fracs(sys.right_kernel);
  j["left_kernel"] = fracs(sys.left_kernel);
  j["symmetrizer"] = fracs(sys.symmetrizer);
  j["shape"] = to_string(sys.shape);
  j["node_labels"] = sys.node_labels;
  j["orbits"] = sys.orbits;
  j["halved"] = sys.halved;
  return j;
}

}  // namespace todalab
