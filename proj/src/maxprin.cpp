#include "todalab/maxprin.hpp"
#include "todalab/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace todalab {

MatrixField MatrixField::constant(const Eigen::MatrixXd& C, std::size_t count) {
  MatrixField f;
  f.n = static_cast<int>(C.rows());
  f.samples.assign(count, C);
  return f;
}

void MatrixField::validate() const {
  if (samples.empty()) throw std::invalid_argument("matrix field has no samples");
  for (const auto& m : samples) {
    if (m.rows() != n || m.cols() != n) throw std::invalid_argument("matrix field sample has inconsistent dimension");
    if (!m.allFinite()) throw std::invalid_argument("matrix field sample is not finite");
  }
}

namespace {

double scale_of(const MatrixField& C) {
  double s = 0.0;
  for (const auto& m : C.samples) s = std::max(s, m.cwiseAbs().maxCoeff());
  return 1.0 + s;
}

}  // namespace

CheckVerdict check_cooperative(const MatrixField& C, double tol) {
  C.validate();
  const double t = tol * scale_of(C);
  for (std::size_t x = 0; x < C.samples.size(); ++x) {
    const auto& m = C.samples[x];
    for (int i = 0; i < C.n; ++i)
      for (int j = 0; j < C.n; ++j) {
        const bool bad = i == j ? m(i, j) < -t : m(i, j) > t;
        if (bad) return {false, x, i, j, m(i, j)};
      }
  }
  return {};
}

CheckVerdict check_cdd(const MatrixField& C, double tol) {
  C.validate();
  const double t = tol * scale_of(C) * C.n;
  for (std::size_t x = 0; x < C.samples.size(); ++x) {
    const Eigen::RowVectorXd sums = C.samples[x].colwise().sum();
    for (int j = 0; j < C.n; ++j)
      if (sums[j] < -t) return {false, x, -1, j, sums[j]};
  }
  return {};
}

std::vector<std::vector<bool>> support(const MatrixField& C, double zero_tol) {
  std::vector<std::vector<bool>> s(C.n, std::vector<bool>(C.n, false));
  for (const auto& m : C.samples)
    for (int i = 0; i < C.n; ++i)
      for (int j = 0; j < C.n; ++j)
        if (std::abs(m(i, j)) > zero_tol) s[i][j] = true;
  return s;
}

CouplingVerdict check_fully_coupled(const MatrixField& C, double zero_tol) {
  C.validate();
  const auto s = support(C, zero_tol);
  // A violating partition exists iff some node cannot reach every other node.
  for (int start = 0; start < C.n; ++start) {
    std::vector<bool> seen(C.n, false);
    std::deque<int> q{start};
    seen[start] = true;
    while (!q.empty()) {
      const int i = q.front();
      q.pop_front();
      for (int j = 0; j < C.n; ++j)
        if (i != j && s[i][j] && !seen[j]) {
          seen[j] = true;
          q.push_back(j);
        }
    }
    if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) continue;
    CouplingVerdict v;
    v.ok = false;
    for (int i = 0; i < C.n; ++i) (seen[i] ? v.part_a : v.part_b).push_back(i);
    return v;
  }
  return {};
}

namespace {

struct SampleSolve {
  Eigen::VectorXd lambda;
  double residual = std::numeric_limits<double>::infinity();
};

SampleSolve solve_with_pins(const Eigen::MatrixXd& D, const Eigen::VectorXd& b, const std::map<int, double>& pins) {
  const Eigen::Index k = D.cols();
  Eigen::VectorXd rhs = b;
  std::vector<Eigen::Index> free_cols;
  for (Eigen::Index i = 0; i < k; ++i) {
    auto it = pins.find(static_cast<int>(i));
    if (it != pins.end()) rhs -= it->second * D.col(i);
    else free_cols.push_back(i);
  }
  SampleSolve out;
  out.lambda = Eigen::VectorXd::Zero(k);
  for (const auto& [i, v] : pins) out.lambda[i] = v;
  if (!free_cols.empty()) {
    Eigen::MatrixXd Df(D.rows(), static_cast<Eigen::Index>(free_cols.size()));
    for (std::size_t c = 0; c < free_cols.size(); ++c) Df.col(static_cast<Eigen::Index>(c)) = D.col(free_cols[c]);
    const NnlsResult r = nnls(Df, rhs);
    for (std::size_t c = 0; c < free_cols.size(); ++c) out.lambda[free_cols[c]] = r.x[static_cast<Eigen::Index>(c)];
  }
  out.residual = (D * out.lambda - b).norm();
  return out;
}

}  // namespace

WeakerResult a_weaker(const MatrixField& A, const Eigen::VectorXd& v0, const std::vector<Eigen::VectorXd>& vs,
                      const WeakerOptions& opt) {
  A.validate();
  const int k = static_cast<int>(vs.size());
  Eigen::MatrixXd D(A.n, k);
  for (int i = 0; i < k; ++i) D.col(i) = v0 - vs[i];

  WeakerResult res;
  res.feasible = true;
  res.lambda.assign(k, Field(A.samples.size(), 0.0));
  for (std::size_t x = 0; x < A.samples.size(); ++x) {
    const Eigen::VectorXd b = A.samples[x].transpose() * v0;
    std::map<int, double> pins = opt.pins;
    SampleSolve best = solve_with_pins(D, b, pins);
    if (best.residual <= opt.feasibility_tol && opt.maximize_support) {
      for (int i = 0; i < k; ++i) {
        if (pins.count(i) || best.lambda[i] > opt.zero_tol) continue;
        for (double tau : {1.0, 0.1, 0.01, 1e-3}) {
          auto trial_pins = pins;
          trial_pins[i] = tau;
          SampleSolve trial = solve_with_pins(D, b, trial_pins);
          if (trial.residual <= opt.feasibility_tol) {
            pins = trial_pins;
            best = trial;
            break;
          }
        }
      }
    }
    for (int i = 0; i < k; ++i) res.lambda[i][x] = best.lambda[i];
    if (best.residual > res.max_residual) {
      res.max_residual = best.residual;
      res.witness_sample = x;
    }
    if (best.residual > opt.feasibility_tol) res.feasible = false;
  }
  res.identically_zero.assign(k, true);
  for (int i = 0; i < k; ++i) res.identically_zero[i] = sup_norm(res.lambda[i]) < opt.zero_tol;
  res.minimal = res.feasible && std::none_of(res.identically_zero.begin(), res.identically_zero.end(),
                                             [](bool z) { return z; });
  return res;
}

std::vector<double> closed_form_lambda(const Eigen::MatrixXd& C, unsigned mask, const Eigen::VectorXd& nu, double K) {
  const int n = static_cast<int>(C.rows());
  const unsigned full = (1u << n) - 1;
  Eigen::VectorXd eA(n);
  for (int i = 0; i < n; ++i) eA[i] = (mask >> i) & 1u;
  const Eigen::VectorXd ce = C.transpose() * eA;
  std::vector<double> out;
  if (mask == full) {
    for (int i = 0; i < n; ++i) out.push_back(K * nu[i] - 1.0 + ce[i]);
    out.push_back(1.0);
  } else {
    for (int i = 0; i < n; ++i) out.push_back(((mask >> i) & 1u) ? ce[i] : -ce[i]);
  }
  return out;
}

namespace {

std::string subset_label(unsigned mask, int n) {
  std::string s = "{";
  bool first = true;
  for (int i = 0; i < n; ++i)
    if ((mask >> i) & 1u) {
      if (!first) s += ",";
      s += std::to_string(i + 1);
      first = false;
    }
  return s + "}";
}

}  // namespace

SubsetGraph build_subset_graph(const MatrixField& C, const Eigen::VectorXd& nu, double K) {
  SubsetGraph g;
  C.validate();
  const int n = C.n;
  if (n < 1 || n > 16) throw std::invalid_argument("subset graph supports 1 <= n <= 16");
  if (nu.size() != n || (nu.array() <= 0).any()) throw std::invalid_argument("nu must be a positive n-vector");
  if (const auto v = check_cooperative(C); !v.ok) g.error = "C is not cooperative";
  else if (const auto w = check_cdd(C); !w.ok) g.error = "C is not column-diagonally dominant";
  else if (const auto f = check_fully_coupled(C); !f.ok) g.error = "C is not fully coupled";
  else if (!(K > 1.0 / nu.minCoeff())) g.error = "K must exceed 1 / min nu";
  if (!g.error.empty()) return g;

  const unsigned full = (1u << n) - 1;
  const int kv = static_cast<int>(full) + 1;
  MPSetup& s = g.setup;
  s.S.resize(kv + 1);
  s.boundary.assign(kv + 1, false);
  s.edges.resize(kv + 1);
  s.lambda_fields.resize(kv + 1);
  s.labels.resize(kv + 1);
  for (unsigned m = 0; m <= full; ++m) {
    s.S[m] = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) s.S[m][i] = (m >> i) & 1u;
    s.labels[m] = "e" + subset_label(m, n);
  }
  s.S[kv] = K * nu;
  s.labels[kv] = "K nu";
  s.boundary[0] = true;
  s.boundary[kv] = true;

  g.minimal_ok = true;
  g.smaller_subset_ok = true;
  for (unsigned m = 1; m <= full; ++m) {
    std::vector<int> cand;
    for (int i = 0; i < n; ++i) cand.push_back(static_cast<int>(m ^ (1u << i)));
    WeakerOptions opt;
    if (m == full) {
      for (int i = 0; i < n; ++i) cand[i] = static_cast<int>(full & ~(1u << i));
      cand.push_back(kv);
      opt.pins[n] = 1.0;
    }
    std::vector<Eigen::VectorXd> vs;
    for (int c : cand) vs.push_back(s.S[c]);
    const WeakerResult all = a_weaker(C, s.S[m], vs, opt);
    if (!all.feasible) {
      g.minimal_ok = false;
      continue;
    }
    for (std::size_t x = 0; x < C.samples.size(); ++x) {
      const auto cf = closed_form_lambda(C.samples[x], m, nu, K);
      for (std::size_t i = 0; i < cf.size(); ++i)
        g.closed_form_deviation = std::max(g.closed_form_deviation, std::abs(cf[i] - all.lambda[i][x]));
    }
    // prune identically zero coefficients and re-verify minimality on the pruned set
    std::vector<Eigen::VectorXd> kept_vs;
    for (std::size_t i = 0; i < cand.size(); ++i)
      if (!all.identically_zero[i]) {
        s.edges[m].push_back(cand[i]);
        kept_vs.push_back(vs[i]);
      }
    WeakerOptions opt2;
    if (m == full) {
      for (std::size_t i = 0; i < s.edges[m].size(); ++i)
        if (s.edges[m][i] == kv) opt2.pins[static_cast<int>(i)] = 1.0;
    }
    const WeakerResult pruned = a_weaker(C, s.S[m], kept_vs, opt2);
    if (!pruned.minimal) g.minimal_ok = false;
    s.lambda_fields[m] = pruned.lambda;
    if (m != full) {
      const bool smaller = std::any_of(s.edges[m].begin(), s.edges[m].end(), [&](int b) {
        return b != kv && (static_cast<unsigned>(b) & ~m) == 0 && static_cast<unsigned>(b) != m;
      });
      if (!smaller) g.smaller_subset_ok = false;
    }
  }
  const auto r = reachable(s);
  g.reachable_ok = std::all_of(r.begin(), r.end(), [](bool b) { return b; });
  g.hypotheses_ok = g.minimal_ok && g.reachable_ok;
  return g;
}

std::vector<bool> reachable(const MPSetup& setup) {
  const std::size_t V = setup.S.size();
  std::vector<std::vector<int>> rev(V);
  for (std::size_t v = 0; v < V; ++v)
    for (int w : setup.edges[v]) rev[w].push_back(static_cast<int>(v));
  std::vector<bool> ok(V, false);
  std::deque<int> q;
  for (std::size_t v = 0; v < V; ++v)
    if (setup.boundary[v]) {
      ok[v] = true;
      q.push_back(static_cast<int>(v));
    }
  while (!q.empty()) {
    const int w = q.front();
    q.pop_front();
    for (int v : rev[w])
      if (!ok[v]) {
        ok[v] = true;
        q.push_back(v);
      }
  }
  return ok;
}

MPVerdict mp_verdict(const std::vector<Field>& u, const MatrixField& A, const MPSetup& setup, const TorusGrid* grid,
                     double tol) {
  const int n = static_cast<int>(u.size());
  if (n != A.n) throw std::invalid_argument("mp_verdict: component count mismatch");
  const std::size_t X = u[0].size();
  auto pairing = [&](const Eigen::VectorXd& v, std::size_t x) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += v[i] * u[i][x];
    return s;
  };
  MPVerdict out;
  out.interior_min = std::numeric_limits<double>::infinity();
  out.boundary_min = std::numeric_limits<double>::infinity();
  std::vector<double> bv(setup.S.size());
  for (std::size_t v = 0; v < setup.S.size(); ++v) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < X; ++x) m = std::min(m, pairing(setup.S[v], x));
    bv[v] = m;
    if (setup.boundary[v]) out.boundary_min = std::min(out.boundary_min, m);
    else out.interior_min = std::min(out.interior_min, m);
  }
  out.margin = out.interior_min - out.boundary_min;
  out.inequality_holds = out.margin >= -tol;
  out.equality_case = std::abs(out.margin) <= tol;
  if (out.equality_case) {
    for (std::size_t v = 0; v < setup.S.size(); ++v) {
      if (setup.boundary[v] || bv[v] > out.interior_min + tol) continue;
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t x = 0; x < X; ++x) {
        const double p = pairing(setup.S[v], x);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
      }
      if (hi - lo > tol) out.constancy_holds = false;
    }
  }
  if (grid) {
    double r = 0.0;
    for (int i = 0; i < n; ++i) {
      const Field lap = grid->laplacian(u[i]);
      for (std::size_t x = 0; x < X; ++x) {
        double s = lap[x];
        const auto& m = A.samples.size() == 1 ? A.samples[0] : A.samples[x];
        for (int j = 0; j < n; ++j) s -= m(i, j) * u[j][x];
        r = std::max(r, std::abs(s));
      }
    }
    out.pde_residual = r;
  }
  return out;
}

std::string to_string(DaiLiOutcome o) {
  switch (o) {
    case DaiLiOutcome::all_zero: return "all_zero";
    case DaiLiOutcome::all_positive: return "all_positive";
    case DaiLiOutcome::violation: return "violation";
    case DaiLiOutcome::refused: return "refused";
  }
  return "refused";
}

DaiLiVerdict dai_li_gen_verdict(const std::vector<Field>& u, const MatrixField& C, const Eigen::VectorXd& nu,
                                double tol) {
  DaiLiVerdict v;
  const int n = static_cast<int>(u.size());
  if (n != C.n || nu.size() != n) {
    v.reason = "dimension mismatch between u, C and nu";
    return v;
  }
  if ((nu.array() <= 0).any()) {
    v.reason = "nu must be positive";
    return v;
  }
  if (!check_cooperative(C).ok) {
    v.reason = "C is not cooperative";
    return v;
  }
  if (!check_cdd(C).ok) {
    v.reason = "C is not column-diagonally dominant";
    return v;
  }
  if (!check_fully_coupled(C).ok) {
    v.reason = "C is not fully coupled";
    return v;
  }
  const std::size_t X = u[0].size();
  for (std::size_t x = 0; x < X; ++x) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += nu[i] * u[i][x];
    if (s < -tol) {
      v.reason = "hypothesis sum nu_i u_i >= 0 fails at sample " + std::to_string(x);
      return v;
    }
  }
  bool all_zero = true, all_pos = true;
  v.min_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double lo = *std::min_element(u[i].begin(), u[i].end());
    const double hi = *std::max_element(u[i].begin(), u[i].end());
    v.min_per_component.push_back(lo);
    v.min_value = std::min(v.min_value, lo);
    if (sup_norm(u[i]) > tol) all_zero = false;
    if (lo <= tol) all_pos = false;
    if (lo < tol && hi > 10 * tol) v.claim_a6_inconsistent.push_back(i);
  }
  v.outcome = all_zero ? DaiLiOutcome::all_zero : all_pos ? DaiLiOutcome::all_positive : DaiLiOutcome::violation;
  if (v.outcome == DaiLiOutcome::violation) v.reason = "components vanish or dip below zero without vanishing identically";
  return v;
}

nlohmann::json to_json(const CheckVerdict& v) {
  nlohmann::json j{{"ok", v.ok}};
  if (!v.ok) {
    j["witness"] = {{"sample", v.sample}, {"value", v.value}};
    if (v.i >= 0) j["witness"]["i"] = v.i;
    j["witness"]["j"] = v.j;
  }
  return j;
}

nlohmann::json to_json(const CouplingVerdict& v) {
  nlohmann::json j{{"ok", v.ok}};
  if (!v.ok) j["partition"] = {{"A", v.part_a}, {"B", v.part_b}};
  return j;
}

nlohmann::json to_json(const DaiLiVerdict& v) {
  nlohmann::json j{{"outcome", to_string(v.outcome)}, {"min_value", v.min_value},
                   {"min_per_component", v.min_per_component}, {"claim_a6_inconsistent", v.claim_a6_inconsistent}};
  if (!v.reason.empty()) j["reason"] = v.reason;
  return j;
}

}  // namespace todalab
