#include "todalab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace todalab {

namespace {

using Json = nlohmann::json;

std::map<std::pair<int, int>, int> as_function(const Divisor& D) {
  std::map<std::pair<int, int>, int> f;
  for (const auto& [p, m] : D.points) f[{p.i, p.j}] += m;
  return f;
}

Json divisor_json(const Divisor& D) {
  Json pts = Json::array();
  for (const auto& [p, m] : D.points) pts.push_back({{"i", p.i}, {"j", p.j}, {"m", m}});
  return pts;
}

Json divisors_json(const std::vector<Divisor>& ds) {
  Json j = Json::array();
  for (const auto& d : ds) j.push_back(divisor_json(d));
  return j;
}

Json solve_record(const TodaSolution& s) {
  return {{"t", s.t}, {"iterations", s.iterations}, {"residual_sup", s.residual_sup}, {"pin", s.pin}};
}

/// Recomputes the residual of a returned solution; the solver's own report is
/// not trusted.
double certify(const TodaProblem& p, const TodaSolution& s, const SolverOptions& opt, Json& log) {
  double sup = 0.0;
  for (const auto& r : residual(p, s.u)) sup = std::max(sup, sup_norm(r));
  Json rec = solve_record(s);
  rec["recomputed_residual_sup"] = sup;
  log.push_back(rec);
  if (!(sup <= opt.tol * (1.0 + 1e-6)) || !(std::abs(s.pin) <= opt.tol))
    throw NewtonFailure("residual certificate failed on re-verification (sup " + std::to_string(sup) + ")", s);
  return sup;
}

/// min over {mask} of f, +inf on an empty mask.
double masked_min(const Field& f, const std::vector<bool>& mask) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < f.size(); ++k)
    if (mask[k]) m = std::min(m, f[k]);
  return m;
}

std::vector<bool> all_masks(const std::vector<Forcing>& fs, double tau) {
  std::vector<bool> mask(fs.front().G.size(), true);
  for (const auto& f : fs) {
    const auto m = forcing_mask(f.G, tau);
    for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = mask[k] && m[k];
  }
  return mask;
}

std::string mask_text(double tau, const std::string& which) {
  std::ostringstream s;
  s << "{G_" << which << " >= " << tau << " * max G_" << which << "}";
  return s.str();
}

Json base_metadata(const ExperimentSetup& setup) {
  Json m{{"coupling", setup.system.name},
         {"nodes", setup.system.node_labels},
         {"grid", {{"L", setup.grid.L()}, {"N", setup.grid.N()}}},
         {"divisors", divisors_json(setup.divisors)},
         {"amplitudes", setup.amplitudes},
         {"tau", setup.tau}};
  if (setup.unfolded) m["unfolded"] = setup.unfolded->name;
  return m;
}

AssembleOptions options(Mode mode, double t, const std::vector<double>& amplitudes) {
  AssembleOptions o;
  o.mode = mode;
  o.t = t;
  o.amplitudes = amplitudes;
  return o;
}

bool is_empty(const Divisor& D) { return D.degree() == 0; }

Field difference(const Field& a, const Field& b) {
  Field d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  return d;
}

}  // namespace

nlohmann::json to_json(const Verdict& v) {
  Json j{{"name", v.name}, {"pass", v.pass}, {"margin", v.margin}, {"mask", v.mask},
         {"metadata", v.metadata}, {"details", v.details}};
  Json names = Json::array();
  for (const auto& f : v.fields) names.push_back(f.first);
  j["fields"] = names;
  return j;
}

bool divisor_geq(const Divisor& D, const Divisor& E) {
  const auto d = as_function(D);
  for (const auto& [p, m] : as_function(E)) {
    auto it = d.find(p);
    if (it == d.end() || it->second < m) return false;
  }
  return true;
}

bool divisor_equal(const Divisor& D, const Divisor& E) { return as_function(D) == as_function(E); }

std::vector<Field> unfolded_energies(const TodaProblem& p, const TodaSolution& sol, const AffineSystem& unfolded) {
  if (p.mode != Mode::raw) throw std::invalid_argument("unfolded energies need a raw-mode solve");
  const DerivedFields d = derived_fields(p, sol);
  std::vector<Field> e(unfolded.size);
  for (int o = 0; o < p.nodes(); ++o) {
    for (int a : p.system.orbits[o]) {
      e[a] = d.e_tilde[o];
      const double scale = (p.system.halved[o] ? 2.0 : 1.0) / unfolded.symmetrizer[a].get_d();
      for (double& v : e[a]) v *= scale;
    }
  }
  return e;
}

MatrixField ratio_system(const TodaProblem& p, const TodaSolution& s, const TodaSolution& t,
                         std::vector<Field>* ratios) {
  const int n = p.nodes();
  const std::size_t X = p.grid.size();
  std::vector<Field> v(n, Field(X));
  Eigen::MatrixXd L(n, X);
  for (int b = 0; b < n; ++b)
    for (std::size_t x = 0; x < X; ++x) {
      const double ws = s.W[b][x], wt = t.W[b][x];
      const double lr = std::log(wt / ws);
      v[b][x] = p.lambda[b] * lr;
      L(b, static_cast<Eigen::Index>(x)) = std::abs(lr) < 1e-12 ? 0.5 * (ws + wt) : (wt - ws) / lr;
    }
  MatrixField C;
  C.n = n;
  C.samples.resize(X, Eigen::MatrixXd(n, n));
  for (std::size_t x = 0; x < X; ++x)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        C.samples[x](a, b) = p.lambda[a] * p.M(a, b) * L(b, static_cast<Eigen::Index>(x)) / p.lambda[b];
  if (ratios) *ratios = std::move(v);
  return C;
}

Verdict monotonicity_experiment(const ExperimentSetup& setup, const std::vector<double>& t_values) {
  Verdict v;
  v.name = "monotonicity";
  v.mask = mask_text(setup.tau, "alpha") + " per node alpha";
  v.metadata = base_metadata(setup);
  v.metadata["t_values"] = t_values;
  if (t_values.empty()) throw ExperimentRejected("empty t ladder");
  for (std::size_t k = 1; k < t_values.size(); ++k)
    if (t_values[k] < t_values[k - 1]) throw ExperimentRejected("t ladder must be nondecreasing");

  const TodaProblem base = assemble(setup.grid, setup.system, setup.divisors,
                                    options(Mode::raw, t_values.front(), setup.amplitudes));
  // Repeated rungs are solved once and compared against themselves.
  std::vector<double> distinct;
  for (double t : t_values)
    if (distinct.empty() || t != distinct.back()) distinct.push_back(t);
  const auto sols = continuation_sweep(base, distinct, setup.solver);

  Json certs = Json::array();
  std::vector<TodaProblem> probs;
  for (std::size_t k = 0; k < sols.size(); ++k) {
    probs.push_back(with_t(base, distinct[k]));
    certify(probs.back(), sols[k], setup.solver, certs);
  }
  v.details["certificates"] = certs;

  const int n = base.nodes();
  std::vector<std::vector<bool>> masks;
  for (const auto& f : base.forcings) masks.push_back(forcing_mask(f.G, setup.tau));

  auto sol_at = [&](double t) -> std::size_t {
    return static_cast<std::size_t>(std::find(distinct.begin(), distinct.end(), t) - distinct.begin());
  };

  bool pass = true;
  double margin = std::numeric_limits<double>::infinity();
  Json steps = Json::array();
  for (std::size_t k = 1; k < t_values.size(); ++k) {
    const auto& s = sols[sol_at(t_values[k - 1])];
    const auto& t = sols[sol_at(t_values[k])];
    const bool identity = t_values[k] == t_values[k - 1];
    Json step{{"t", t_values[k - 1]}, {"t_next", t_values[k]}};
    std::vector<double> node_margin(n);
    double step_margin = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      node_margin[a] = masked_min(difference(t.W[a], s.W[a]), masks[a]);
      step_margin = std::min(step_margin, node_margin[a]);
    }
    step["node_margins"] = node_margin;
    step["margin"] = step_margin;
    if (identity) {
      step["equality_case"] = true;
      step_margin = 0.0;
      step["margin"] = 0.0;
    } else {
      if (!(step_margin > 0)) pass = false;

      std::vector<Field> ratios;
      const MatrixField C = ratio_system(probs[sol_at(t_values[k])], s, t, &ratios);
      const DaiLiVerdict dl = dai_li_gen_verdict(ratios, C, Eigen::VectorXd::Ones(n));
      step["dai_li"] = to_json(dl);
      const bool direct_positive = step_margin > 0;
      const bool dl_positive = dl.outcome == DaiLiOutcome::all_positive;
      step["routes_agree"] = direct_positive == dl_positive;
      if (!dl_positive) pass = false;

      // sum lambda (u(t') - u(t)) is constant; its value plus 2 sum lambda log(t'/t)
      // is the constant of sum lambda log(e(t') / e(t)).
      Field P(base.grid.size(), 0.0);
      for (int a = 0; a < n; ++a)
        for (std::size_t x = 0; x < P.size(); ++x) P[x] += base.lambda[a] * (t.u[a][x] - s.u[a][x]);
      const auto [lo, hi] = std::minmax_element(P.begin(), P.end());
      const double spread = *hi - *lo;
      const double log_ratio = std::log(t_values[k] / t_values[k - 1]);
      step["product_identity"] = {{"spread", spread},
                                  {"log_ratio_sum", base.grid.mean(P) + 2.0 * base.lambda.sum() * log_ratio},
                                  {"two_r_log_ratio", 2.0 * base.lambda.sum() * log_ratio},
                                  {"two_log_ratio", 2.0 * log_ratio}};
      if (!(spread <= 1e-8)) pass = false;
    }
    margin = std::min(margin, step_margin);
    steps.push_back(step);
  }
  if (t_values.size() == 1) margin = 0.0;
  v.details["steps"] = steps;
  v.pass = pass;
  v.margin = margin;

  const auto& last = sols.back();
  const DerivedFields d = derived_fields(probs.back(), last);
  for (int a = 0; a < n; ++a) v.fields.emplace_back("e_" + std::to_string(a), d.e[a]);
  if (sols.size() > 1)
    for (int a = 0; a < n; ++a)
      v.fields.emplace_back("log_ratio_" + std::to_string(a),
                            difference(last.u[a], sols[sols.size() - 2].u[a]));
  return v;
}

Verdict ordering_experiment(const ExperimentSetup& setup) {
  Verdict v;
  v.name = "ordering";
  v.metadata = base_metadata(setup);
  if (setup.system.shape != Shape::path)
    throw ExperimentRejected("ordering needs a path diagram, got " + to_string(setup.system.shape));
  const int n = setup.system.size;
  const IntVector order = path_order(setup.system);
  const AffineSystem sys = permute(setup.system, order);
  std::vector<Divisor> divs(n);
  std::vector<double> amps;
  for (int k = 0; k < n; ++k) {
    divs[k] = setup.divisors[order[k]];
    if (!setup.amplitudes.empty()) amps.push_back(setup.amplitudes[order[k]]);
  }
  v.metadata["path_order"] = order;

  if (!divisor_geq(divs[0], divs[1]) || divisor_equal(divs[0], divs[1]))
    throw ExperimentRejected("divisor chain needs D_1 > D_2");
  for (int k = 1; k + 1 < n; ++k)
    if (!divisor_geq(divs[k], divs[k + 1]))
      throw ExperimentRejected("divisor chain needs D_" + std::to_string(k + 1) + " >= D_" + std::to_string(k + 2));
  if (!is_empty(divs[n - 1])) throw ExperimentRejected("divisor chain needs D_n = 0");

  const TodaProblem p = assemble(setup.grid, sys, divs, options(Mode::lemma66, 1.0, amps));
  const TodaSolution sol = newton_solve(p, std::nullopt, setup.solver);
  Json certs = Json::array();
  certify(p, sol, setup.solver, certs);
  v.details["certificates"] = certs;
  v.details["c"] = p.c;

  const auto u = to_double(sys.right_kernel);
  std::vector<Field> f(n);
  for (int k = 0; k < n; ++k) {
    f[k] = sol.W[k];
    for (double& x : f[k]) x /= u[k];
  }
  bool pass = true;
  double margin = std::numeric_limits<double>::infinity();
  Json links = Json::array();
  for (int k = 0; k + 1 < n; ++k) {
    const auto mask = forcing_mask(p.forcings[k + 1].G, setup.tau);
    const Field diff = difference(f[k + 1], f[k]);
    const double m = masked_min(diff, mask);
    const double global = *std::min_element(diff.begin(), diff.end());
    links.push_back({{"link", std::to_string(k + 1) + "<" + std::to_string(k + 2)},
                     {"margin", m},
                     {"unmasked_min", global}});
    if (!(m > 0)) pass = false;
    margin = std::min(margin, m);
  }
  v.details["links"] = links;

  // Coefficients of the system for the ratios w_i / u_i.
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = sys.A[i][j] * u[j];
  const MatrixField BF = MatrixField::constant(B);
  const MatrixField BT = MatrixField::constant(B.transpose());
  v.details["ratio_coefficients"] = {{"cooperative", to_json(check_cooperative(BF))},
                                     {"row_sums_nonnegative", to_json(check_cdd(BT))}};

  v.mask = mask_text(setup.tau, "{i+1}") + " for the link i < i+1";
  v.pass = pass;
  v.margin = margin;
  for (int k = 0; k < n; ++k) v.fields.emplace_back("w_over_u_" + std::to_string(k + 1), f[k]);
  return v;
}

Verdict curvature_experiment(const ExperimentSetup& setup, double t) {
  Verdict v;
  v.name = "curvature";
  v.metadata = base_metadata(setup);
  v.metadata["t"] = t;
  const AffineSystem& sys = setup.system;
  const int n = sys.size;
  const AffineSystem& unf = setup.unfolded ? *setup.unfolded : sys;

  const bool degenerate = std::all_of(setup.divisors.begin(), setup.divisors.end(), is_empty);
  bool others_empty = true;
  for (int a = 1; a < n; ++a) others_empty = others_empty && is_empty(setup.divisors[a]);
  const bool theorem_c = !degenerate && others_empty;

  int prong_leaf = -1;
  if (!degenerate && sys.shape == Shape::prong) {
    int hub = -1;
    for (int j = 1; j < n; ++j)
      if (sys.A[0][j] != 0) hub = j;
    for (int j = 1; j < n; ++j) {
      if (j == hub || sys.A[hub][j] == 0 || sys.left_kernel[j] != sys.left_kernel[0]) continue;
      int degree = 0;
      for (int k = 0; k < n; ++k) degree += (k != j && sys.A[j][k] != 0);
      if (degree == 1) prong_leaf = j;
    }
    const Divisor& D0 = setup.divisors[0];
    const Divisor& Da = setup.divisors[prong_leaf];
    if (!divisor_geq(D0, Da) || divisor_equal(D0, Da))
      throw ExperimentRejected("prong hypothesis needs the divisor of the sibling leaf strictly inside D_0");
  } else if (!degenerate && sys.shape == Shape::path) {
    const IntVector order = path_order(sys);
    if (!divisor_geq(setup.divisors[order[0]], setup.divisors[order[1]]) ||
        divisor_equal(setup.divisors[order[0]], setup.divisors[order[1]]))
      throw ExperimentRejected("divisor chain needs D_0 > D_1");
    for (int k = 1; k + 1 < n; ++k)
      if (!divisor_geq(setup.divisors[order[k]], setup.divisors[order[k + 1]]))
        throw ExperimentRejected("divisor chain needs D_" + std::to_string(k) + " >= D_" + std::to_string(k + 1));
    if (!is_empty(setup.divisors[order[n - 1]])) throw ExperimentRejected("divisor chain needs D_last = 0");
  } else if (!degenerate && !theorem_c) {
    throw ExperimentRejected("this diagram needs D_0 > 0 and every other divisor empty");
  }

  const TodaProblem p = assemble(setup.grid, sys, setup.divisors, options(Mode::raw, t, setup.amplitudes));
  const TodaSolution sol = newton_solve(p, std::nullopt, setup.solver);
  Json certs = Json::array();
  certify(p, sol, setup.solver, certs);
  v.details["certificates"] = certs;

  // Energies and Q in the unfolded picture.
  const std::vector<Field> e = setup.unfolded ? unfolded_energies(p, sol, unf) : derived_fields(p, sol).e;
  const Field Q = quadratic_form(to_eigen(unf.symmetric_gram()), e);
  const double Qmin = *std::min_element(Q.begin(), Q.end());
  const double Qmax = *std::max_element(Q.begin(), Q.end());
  v.details["Q_min"] = Qmin;
  v.details["Q_max"] = Qmax;
  v.fields.emplace_back("Q", Q);

  const bool exceptional = unf.name.rfind("E7", 0) == 0 || unf.name.rfind("E8", 0) == 0;
  v.details["proven_regime"] = !exceptional;
  if (exceptional) v.details["note"] = "E7/E8 lie outside the proven regime; Q's sign is reported, not asserted";

  if (degenerate) {
    v.mask = "none (whole grid)";
    v.margin = -std::max(std::abs(Qmin), std::abs(Qmax));
    v.pass = std::max(std::abs(Qmin), std::abs(Qmax)) <= 1e-12;
    v.details["branch"] = "flat";
    return v;
  }

  bool pass = true;
  double margin = std::numeric_limits<double>::infinity();
  const auto marks = to_double(unf.left_kernel);
  const auto nu_diag = to_double(unf.symmetrizer);

  if (theorem_c) {
    // e_0 < e_a / n_a, i.e. e~_0 / u_0 < e~_a / u_a with u the right kernel.
    Json per = Json::array();
    double literal = std::numeric_limits<double>::infinity();
    for (int a = 1; a < unf.size; ++a) {
      Field d(e[a].size()), lit(e[a].size());
      for (std::size_t x = 0; x < d.size(); ++x) {
        d[x] = e[a][x] / marks[a] - e[0][x];
        lit[x] = nu_diag[a] * e[a][x] / marks[a] - nu_diag[0] * e[0][x];
      }
      const double m = *std::min_element(d.begin(), d.end());
      const double ml = *std::min_element(lit.begin(), lit.end());
      per.push_back({{"node", unf.node_labels[a]}, {"margin", m}, {"literal_margin", ml}});
      margin = std::min(margin, m);
      literal = std::min(literal, ml);
    }
    v.details["root_inequality"] = per;
    v.details["literal_margin"] = literal;
    if (!(margin > 0)) pass = false;
  }

  if (prong_leaf >= 0) {
    const auto mask = forcing_mask(p.forcings[prong_leaf].G, setup.tau);
    const double m = masked_min(difference(e[prong_leaf], e[0]), mask);
    v.details["prong"] = {{"node", sys.node_labels[prong_leaf]}, {"margin", m}};
    if (!(m > 0)) pass = false;
    margin = std::min(margin, m);
  }

  if (!exceptional) {
    if (!(Qmin > 0)) pass = false;
    margin = std::min(margin, Qmin);
  }
  v.mask = prong_leaf >= 0 ? mask_text(setup.tau, "alpha") + " for the prong inequality, whole grid otherwise"
                           : "none (whole grid)";
  v.pass = pass;
  v.margin = std::isfinite(margin) ? margin : Qmin;
  for (int a = 0; a < unf.size; ++a) v.fields.emplace_back("e_" + std::to_string(a), e[a]);
  return v;
}

Verdict folding_consistency_experiment(LieType type, int rank, const TorusGrid& grid,
                                       const std::vector<Divisor>& divisors, const std::vector<double>& amplitudes,
                                       double t, const SolverOptions& solver) {
  Verdict v;
  v.name = "fold";
  v.mask = "none (whole grid)";
  const AffineSystem ext = affine_by_spec(type, rank, false);
  const Involution inv = sigma0(type, rank);
  const AffineSystem folded = fold(ext, inv);
  const int n = ext.size;
  if (static_cast<int>(divisors.size()) != n)
    throw ExperimentRejected("expected " + std::to_string(n) + " divisors on the unfolded diagram");
  if (!amplitudes.empty() && static_cast<int>(amplitudes.size()) != n)
    throw ExperimentRejected("amplitude count must match the unfolded node count");
  for (int a = 0; a < n; ++a) {
    const int b = inv.perm[a];
    if (!divisor_equal(divisors[a], divisors[b]))
      throw ExperimentRejected("divisors are not symmetric under the involution (nodes " + std::to_string(a) + ", " +
                               std::to_string(b) + ")");
    if (!amplitudes.empty() && amplitudes[a] != amplitudes[b])
      throw ExperimentRejected("amplitudes are not symmetric under the involution");
  }
  v.metadata = {{"unfolded", ext.name},
                {"folded", folded.name},
                {"grid", {{"L", grid.L()}, {"N", grid.N()}}},
                {"divisors", divisors_json(divisors)},
                {"amplitudes", amplitudes},
                {"t", t},
                {"orbits", folded.orbits},
                {"halved", folded.halved}};

  const int m = folded.size;
  std::vector<Divisor> fdiv(m);
  std::vector<double> famp(m, 0.0);
  for (int o = 0; o < m; ++o) {
    const int rep = folded.orbits[o][0];
    fdiv[o] = divisors[rep];
    famp[o] = (amplitudes.empty() ? 0.0 : amplitudes[rep]) - (folded.halved[o] ? std::log(2.0) : 0.0);
  }

  const TodaProblem pu = assemble(grid, ext, divisors, options(Mode::variant, t, amplitudes));
  const TodaProblem pf = assemble(grid, folded, fdiv, options(Mode::variant, t, famp));
  const TodaSolution su = newton_solve(pu, std::nullopt, solver);
  const TodaSolution sf = newton_solve(pf, std::nullopt, solver);
  Json certs = Json::array();
  certify(pu, su, solver, certs);
  certify(pf, sf, solver, certs);
  v.details["certificates"] = certs;

  double dev = 0.0, sym = 0.0;
  Json per = Json::array();
  for (int o = 0; o < m; ++o)
    for (int a : folded.orbits[o]) {
      const double scale = folded.halved[o] ? 2.0 : 1.0;
      double d = 0.0;
      for (std::size_t x = 0; x < grid.size(); ++x) d = std::max(d, std::abs(scale * sf.W[o][x] - su.W[a][x]));
      per.push_back({{"unfolded", ext.node_labels[a]}, {"folded", folded.node_labels[o]}, {"deviation", d}});
      dev = std::max(dev, d);
    }
  for (int a = 0; a < n; ++a) sym = std::max(sym, sup_norm(difference(su.u[a], su.u[inv.perm[a]])));
  v.details["per_node"] = per;
  v.details["sup_deviation"] = dev;
  v.details["symmetry_deviation"] = sym;
  v.pass = dev <= 1e-8 && sym <= 1e-9;
  v.margin = 1e-8 - dev;
  for (int o = 0; o < m; ++o) v.fields.emplace_back("w_folded_" + std::to_string(o), sf.W[o]);
  for (int a = 0; a < n; ++a) v.fields.emplace_back("w_unfolded_" + std::to_string(a), su.W[a]);
  return v;
}

Verdict limit_experiment(const ExperimentSetup& setup, const std::vector<double>& eps_values) {
  Verdict v;
  v.name = "limit";
  v.metadata = base_metadata(setup);
  v.metadata["eps_values"] = eps_values;
  v.mask = "intersection of " + mask_text(setup.tau, "alpha") + " over all nodes";
  const AffineSystem& sys = setup.system;
  const int n = sys.size;
  if (eps_values.empty()) throw ExperimentRejected("empty epsilon ladder");
  for (std::size_t k = 0; k < eps_values.size(); ++k) {
    if (!(eps_values[k] > 0)) throw ExperimentRejected("epsilon values must be positive");
    if (k > 0 && !(eps_values[k] < eps_values[k - 1])) throw ExperimentRejected("epsilon ladder must descend");
  }

  // Limiting degree data: d_i = deg D_i - k on the simple nodes, where k plays the
  // role of 2g - 2 (the lambda-weighted mean degree fixed by compatibility).
  Rational lsum = 0, ldeg = 0;
  for (int i = 0; i < n; ++i) {
    lsum += sys.left_kernel[i];
    ldeg += sys.left_kernel[i] * setup.divisors[i].degree();
  }
  const Rational k = ldeg / lsum;
  const RationalMatrix nu = sys.symmetric_gram();
  RationalMatrix finite(n - 1, RationalVector(n - 1));
  RationalVector degrees(n - 1);
  for (int i = 1; i < n; ++i) {
    degrees[i - 1] = Rational(setup.divisors[i].degree()) - k;
    for (int j = 1; j < n; ++j) finite[i - 1][j - 1] = nu[i][j];
  }
  const PolystabilityReport report = polystability_check(finite, degrees, -k);
  Json deg_json = Json::array();
  for (const auto& d : degrees) deg_json.push_back(to_fraction_string(d));
  v.details["limiting_degrees"] = deg_json;
  v.details["euler_characteristic"] = to_fraction_string(Rational(-k));
  if (!report.polystable) throw ExperimentRejected("limiting degree data is not polystable: " + report.violation);

  std::vector<double> amps = setup.amplitudes.empty() ? std::vector<double>(n, 0.0) : setup.amplitudes;
  const double a0 = amps[0];
  std::optional<std::vector<Field>> warm;
  std::vector<Field> energies;
  std::vector<bool> mask;
  Json certs = Json::array();
  Json steps = Json::array();
  bool pass = true;
  double margin = std::numeric_limits<double>::infinity();
  for (double eps : eps_values) {
    amps[0] = a0 + 2.0 * std::log(eps);
    const TodaProblem p = assemble(setup.grid, sys, setup.divisors, options(Mode::raw, 1.0, amps));
    const TodaSolution sol = newton_solve(p, warm, setup.solver);
    certify(p, sol, setup.solver, certs);
    warm = sol.u;
    if (mask.empty()) mask = all_masks(p.forcings, setup.tau);
    Field energy(setup.grid.size(), 0.0);
    const std::vector<Field> e = setup.unfolded ? unfolded_energies(p, sol, *setup.unfolded) : derived_fields(p, sol).e;
    for (const auto& f : e)
      for (std::size_t x = 0; x < energy.size(); ++x) energy[x] += f[x];
    if (!energies.empty()) {
      const Field drop = difference(energies.back(), energy);
      const double m = masked_min(drop, mask);
      steps.push_back({{"eps", eps}, {"decrease_margin", m}, {"sup_change", sup_norm(drop)}});
      if (!(m > 0)) pass = false;
      margin = std::min(margin, m);
    }
    energies.push_back(std::move(energy));
  }
  v.details["certificates"] = certs;
  v.details["steps"] = steps;
  if (energies.size() >= 2) {
    const double tail = sup_norm(difference(energies.back(), energies[energies.size() - 2]));
    v.details["cauchy_tail"] = tail;
    if (!(tail <= 1e-4)) pass = false;
  } else {
    margin = 0.0;
  }
  v.pass = pass;
  v.margin = margin;
  v.fields.emplace_back("energy_limit", energies.back());
  return v;
}

}  // namespace todalab
