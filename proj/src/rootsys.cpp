#include "todalab/rootsys.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>
#include <stdexcept>

namespace todalab {

char to_char(LieType t) { return "ABCDEFG"[static_cast<int>(t)]; }

LieType parse_lie_type(std::string_view s) {
  if (s.size() != 1) throw std::invalid_argument("lie type must be a single letter A-G, got '" + std::string(s) + "'");
  const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  if (c < 'A' || c > 'G') throw std::invalid_argument("lie type must be one of A-G, got '" + std::string(s) + "'");
  return static_cast<LieType>(c - 'A');
}

void validate_type_rank(LieType type, int rank) {
  const std::string label = std::string(1, to_char(type)) + std::to_string(rank);
  switch (type) {
    case LieType::A:
      if (rank < 1) throw std::invalid_argument(label + ": A_n requires n >= 1");
      break;
    case LieType::B:
      if (rank < 2) throw std::invalid_argument(label + ": B_n requires n >= 2");
      break;
    case LieType::C:
      if (rank < 2) throw std::invalid_argument(label + ": C_n requires n >= 2");
      break;
    case LieType::D:
      if (rank < 4) throw std::invalid_argument(label + ": D_n requires n >= 4");
      break;
    case LieType::E:
      if (rank < 6 || rank > 8) throw std::invalid_argument(label + ": E_n exists only for n in {6, 7, 8}");
      break;
    case LieType::F:
      if (rank != 4) throw std::invalid_argument(label + ": F_n exists only for n = 4");
      break;
    case LieType::G:
      if (rank != 2) throw std::invalid_argument(label + ": G_n exists only for n = 2");
      break;
  }
}

namespace {

// Symmetric Gram matrix of the simple roots, long roots normalized to 2.
RationalMatrix simple_gram(LieType type, int n) {
  RationalMatrix g(n, RationalVector(n, Rational(0)));
  auto link = [&](int i, int j, const Rational& v) {  // 1-based labels
    g[i - 1][j - 1] = v;
    g[j - 1][i - 1] = v;
  };
  for (int i = 0; i < n; ++i) g[i][i] = 2;
  switch (type) {
    case LieType::A:
      for (int i = 1; i < n; ++i) link(i, i + 1, -1);
      break;
    case LieType::B:
      for (int i = 1; i < n; ++i) link(i, i + 1, -1);
      g[n - 1][n - 1] = 1;
      break;
    case LieType::C:
      for (int i = 1; i < n; ++i) g[i - 1][i - 1] = 1;
      for (int i = 1; i + 1 < n; ++i) link(i, i + 1, Rational(-1, 2));
      link(n - 1, n, -1);
      break;
    case LieType::D:
      for (int i = 1; i + 1 < n; ++i) link(i, i + 1, -1);
      link(n - 2, n, -1);
      break;
    case LieType::E:
      link(1, 3, -1);
      link(2, 4, -1);
      for (int i = 3; i < n; ++i) link(i, i + 1, -1);
      break;
    case LieType::F:
      g[2][2] = 1;
      g[3][3] = 1;
      link(1, 2, -1);
      link(2, 3, -1);
      link(3, 4, Rational(-1, 2));
      break;
    case LieType::G:
      g[0][0] = Rational(2, 3);
      link(1, 2, -1);
      break;
  }
  return g;
}

IntVector reflect(const IntVector& v, int j, const IntMatrix& cartan) {
  int pairing = 0;  // <v, alpha_j^vee>
  for (std::size_t k = 0; k < v.size(); ++k) pairing += v[k] * cartan[k][j];
  IntVector out = v;
  out[j] -= pairing;
  return out;
}

}  // namespace

int height(const IntVector& v) {
  int h = 0;
  for (int x : v) h += x;
  return h;
}

std::string RootSystem::name() const { return std::string(1, to_char(type)) + std::to_string(rank); }

IntVector RootSystem::ext_marks() const {
  IntVector n{1};
  n.insert(n.end(), marks.begin(), marks.end());
  return n;
}

bool RootSystem::contains(const IntVector& v) const { return std::binary_search(roots.begin(), roots.end(), v); }

RootSystem build_root_system(LieType type, int rank) {
  validate_type_rank(type, rank);
  RootSystem rs;
  rs.type = type;
  rs.rank = rank;
  rs.gram = simple_gram(type, rank);

  rs.cartan.assign(rank, IntVector(rank, 0));
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j) {
      const Rational a = 2 * rs.gram[i][j] / rs.gram[j][j];
      if (a.get_den() != 1) throw std::logic_error("non-integral Cartan entry");
      rs.cartan[i][j] = static_cast<int>(a.get_num().get_si());
    }

  // Orbit of the simple roots under the simple reflections.
  std::set<IntVector> seen;
  std::deque<IntVector> queue;
  for (int i = 0; i < rank; ++i) {
    IntVector e(rank, 0);
    e[i] = 1;
    if (seen.insert(e).second) queue.push_back(e);
  }
  while (!queue.empty()) {
    const IntVector v = queue.front();
    queue.pop_front();
    for (int j = 0; j < rank; ++j) {
      IntVector w = reflect(v, j, rs.cartan);
      if (seen.insert(w).second) queue.push_back(std::move(w));
    }
  }
  rs.roots.assign(seen.begin(), seen.end());
  for (const auto& r : rs.roots)
    if (std::all_of(r.begin(), r.end(), [](int x) { return x >= 0; })) rs.positive_roots.push_back(r);

  rs.delta = *std::max_element(rs.positive_roots.begin(), rs.positive_roots.end(),
                               [](const IntVector& a, const IntVector& b) { return height(a) < height(b); });
  rs.marks = rs.delta;
  rs.coxeter = 1 + height(rs.delta);

  // nu(-delta, alpha_i) = -sum_j n_j nu(alpha_j, alpha_i)
  RationalVector nu_delta(rank, Rational(0));
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j) nu_delta[i] += rs.marks[j] * rs.gram[j][i];
  Rational delta_sq = 0;
  for (int i = 0; i < rank; ++i) delta_sq += rs.marks[i] * nu_delta[i];

  rs.gram_ext.assign(rank + 1, RationalVector(rank + 1, Rational(0)));
  rs.gram_ext[0][0] = delta_sq;
  for (int i = 0; i < rank; ++i) {
    rs.gram_ext[0][i + 1] = -nu_delta[i];
    rs.gram_ext[i + 1][0] = -nu_delta[i];
    for (int j = 0; j < rank; ++j) rs.gram_ext[i + 1][j + 1] = rs.gram[i][j];
  }
  return rs;
}

int coxeter_number(const RootSystem& rs) {
  int r = 0;
  for (int n : rs.ext_marks()) r += n;
  return r;
}

bool height_grading_check(const RootSystem& rs) {
  const int r = coxeter_number(rs);
  std::set<IntVector> grade_one;
  for (const auto& b : rs.roots) {
    const int h = ((height(b) % r) + r) % r;
    if (h == 1 % r) grade_one.insert(b);
  }
  std::set<IntVector> z;
  IntVector minus_delta = rs.delta;
  for (int& x : minus_delta) x = -x;
  z.insert(minus_delta);
  for (int i = 0; i < rs.rank; ++i) {
    IntVector e(rs.rank, 0);
    e[i] = 1;
    z.insert(e);
  }
  return grade_one == z;
}

bool extended_simple_sums_check(const RootSystem& rs) {
  for (int i = 0; i < rs.rank; ++i)
    for (int j = 0; j < rs.rank; ++j) {
      if (i == j) continue;
      IntVector d(rs.rank, 0);
      d[i] = 1;
      d[j] = -1;
      if (rs.contains(d)) return false;
    }
  for (const auto& a : rs.positive_roots) {
    IntVector s = a;
    for (int k = 0; k < rs.rank; ++k) s[k] += rs.delta[k];
    if (rs.contains(s)) return false;
  }
  return true;
}

PolystabilityReport polystability_check(const RationalMatrix& finite_gram, const RationalVector& degrees,
                                        const Rational& euler_characteristic) {
  PolystabilityReport rep;
  const auto inv = inverse(finite_gram);
  if (!inv) throw std::invalid_argument("polystability check: finite Gram matrix is singular");
  rep.inverse_gram_times_degrees = multiply(*inv, degrees);
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (degrees[i] < euler_characteristic) {
      rep.violation = "2-2g <= d_" + std::to_string(i + 1) + " fails: d = " + to_fraction_string(degrees[i]) +
                      " < " + to_fraction_string(euler_characteristic);
      return rep;
    }
    if (rep.inverse_gram_times_degrees[i] >= 0) {
      rep.violation = "(R d)_" + std::to_string(i + 1) + " < 0 fails: value " +
                      to_fraction_string(rep.inverse_gram_times_degrees[i]);
      return rep;
    }
  }
  rep.polystable = true;
  return rep;
}

PolystabilityReport polystability_degree_check(const RootSystem& rs, const DegreeData& deg) {
  if (static_cast<int>(deg.degrees.size()) != rs.rank)
    throw std::invalid_argument("degree data must have one entry per simple root");
  RationalVector d;
  for (int x : deg.degrees) d.emplace_back(x);
  return polystability_check(rs.gram, d, Rational(2 - 2 * deg.genus));
}

std::vector<InvariantCheck> check_invariants(const RootSystem& rs) {
  std::vector<InvariantCheck> out;
  auto add = [&](std::string name, bool ok) { out.push_back({std::move(name), ok}); };

  bool closed = true;
  for (const auto& r : rs.roots) {
    IntVector neg = r;
    for (int& x : neg) x = -x;
    if (!rs.contains(neg)) closed = false;
    for (int j = 0; j < rs.rank; ++j)
      if (!rs.contains(reflect(r, j, rs.cartan))) closed = false;
  }
  add("roots closed under negation and simple reflections", closed);

  bool cartan_ok = true;
  for (int i = 0; i < rs.rank; ++i)
    for (int j = 0; j < rs.rank; ++j) {
      const int a = rs.cartan[i][j];
      if (i == j ? a != 2 : (a > 0 || a < -3)) cartan_ok = false;
      if (Rational(a) != 2 * rs.gram[i][j] / rs.gram[j][j]) cartan_ok = false;
    }
  add("cartan entries and a_ij = 2 nu(i,j)/nu(j,j)", cartan_ok);

  add("r = 1 + height(delta) = sum of marks",
      rs.coxeter == 1 + height(rs.delta) && rs.coxeter == coxeter_number(rs));

  const IntVector n = rs.ext_marks();
  bool kernel = true;
  for (std::size_t i = 0; i < n.size(); ++i) {
    Rational s = 0;
    for (std::size_t j = 0; j < n.size(); ++j) s += rs.gram_ext[i][j] * n[j];
    if (s != 0) kernel = false;
  }
  add("gram_ext * n = 0", kernel);

  bool signs = true;
  bool symmetric = true;
  bool long_normalized = false;
  for (std::size_t i = 0; i < n.size(); ++i)
    for (std::size_t j = 0; j < n.size(); ++j) {
      if (i == j ? rs.gram_ext[i][j] <= 0 : rs.gram_ext[i][j] > 0) signs = false;
      if (rs.gram_ext[i][j] != rs.gram_ext[j][i]) symmetric = false;
      if (i == j && rs.gram_ext[i][i] == 2) long_normalized = true;
    }
  add("gram_ext signs (diagonal > 0, off-diagonal <= 0)", signs);
  add("gram_ext symmetric", symmetric);
  add("long roots have nu = 2", long_normalized && rs.gram_ext[0][0] == 2);
  add("|roots| even", rs.roots.size() % 2 == 0);
  add("height grading check", height_grading_check(rs));
  add("extended simple sums check", extended_simple_sums_check(rs));
  return out;
}

nlohmann::json to_json(const RootSystem& rs) {
  nlohmann::json j;
  j["type"] = std::string(1, to_char(rs.type));
  j["rank"] = rs.rank;
  j["cartan"] = rs.cartan;
  j["roots"] = rs.roots;
  j["delta"] = rs.delta;
  j["marks"] = rs.marks;
  j["coxeter"] = rs.coxeter;
  nlohmann::json g = nlohmann::json::array();
  for (const auto& row : rs.gram_ext) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& q : row) r.push_back(to_fraction_string(q));
    g.push_back(r);
  }
  j["gram_ext"] = g;
  return j;
}

}  // namespace todalab
