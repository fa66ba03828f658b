#include "todalab/toda.hpp"
#include "todalab/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace todalab {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::raw: return "raw";
    case Mode::variant: return "variant";
    case Mode::lemma66: return "lemma66";
  }
  return "raw";
}

Mode parse_mode(const std::string& s) {
  if (s == "raw") return Mode::raw;
  if (s == "variant") return Mode::variant;
  if (s == "lemma66") return Mode::lemma66;
  throw std::invalid_argument("unknown mode '" + s + "' (expected raw, variant or lemma66)");
}

Eigen::MatrixXd to_eigen(const RationalMatrix& m) {
  Eigen::MatrixXd out(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) out(i, j) = m[i][j].get_d();
  return out;
}

Eigen::VectorXd to_eigen(const RationalVector& v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].get_d();
  return out;
}

TodaProblem assemble(const TorusGrid& grid, const AffineSystem& system, const std::vector<Divisor>& divisors,
                     const AssembleOptions& opt) {
  const int n = system.size;
  if (static_cast<int>(divisors.size()) != n)
    throw std::invalid_argument("expected " + std::to_string(n) + " divisors, got " + std::to_string(divisors.size()));
  if (!opt.amplitudes.empty() && static_cast<int>(opt.amplitudes.size()) != n)
    throw std::invalid_argument("amplitude count must match the node count");
  if (!(opt.t > 0.0)) throw std::invalid_argument("t must be positive");

  TodaProblem p{grid, system, opt.mode, {}, {}, {}, {}, {}, opt.t, 0.0};
  RationalMatrix Mq(n, RationalVector(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      Mq[i][j] = opt.mode == Mode::raw ? Rational(system.A[i][j]) * system.symmetrizer[j] * 2  // 4 nu_sym
                                       : Rational(2 * system.A[i][j]);
  p.M = to_eigen(Mq);
  p.lambda = to_eigen(system.left_kernel);

  Rational lambda_sum = 0, lambda_deg = 0;
  for (int i = 0; i < n; ++i) {
    lambda_sum += system.left_kernel[i];
    lambda_deg += system.left_kernel[i] * divisors[i].degree();
  }
  const double area = grid.area();
  const double pi = std::numbers::pi;
  p.point_mass.resize(n);
  for (int i = 0; i < n; ++i) p.point_mass[i] = 4.0 * pi * divisors[i].degree() / area;
  for (int i = 0; i < n; ++i)
    p.forcings.push_back(forcing_from_divisor(grid, divisors[i], opt.amplitudes.empty() ? 0.0 : opt.amplitudes[i]));

  // lambda-weighted integral of the system: sum lambda_i (int kappa + 4 pi deg_i) = 0.
  const double ratio = Rational(lambda_deg / lambda_sum).get_d();
  if (opt.mode == Mode::lemma66) {
    if (opt.kappa) throw std::invalid_argument("lemma66 mode takes a constant c, not a kappa field");
    const double c_default = 2.0 * pi * ratio / area;
    p.c = opt.c.value_or(c_default);
    const double deficit = lambda_sum.get_d() * (-2.0 * p.c * area) + 4.0 * pi * lambda_deg.get_d();
    if (std::abs(deficit) > 1e-10 * (1.0 + 4.0 * pi * std::abs(lambda_deg.get_d()))) {
      std::ostringstream msg;
      msg << "incompatible lemma66 constant c = " << p.c << ": lambda-weighted deficit " << deficit;
      throw AssemblyError(msg.str(), deficit);
    }
    if (!(p.c > 0.0))
      throw AssemblyError("lemma66 mode needs c > 0, i.e. a nonempty divisor (the zero set of w_1 must be nonempty)",
                          0.0);
    p.kappa.assign(grid.size(), -2.0 * p.c);
  } else if (opt.kappa) {
    if (opt.kappa->size() != grid.size()) throw std::invalid_argument("kappa field size mismatch");
    p.kappa = *opt.kappa;
    const double deficit = lambda_sum.get_d() * grid.integrate(p.kappa) + 4.0 * pi * lambda_deg.get_d();
    if (std::abs(deficit) > 1e-10 * (1.0 + lambda_sum.get_d() * sup_norm(p.kappa) * area)) {
      std::ostringstream msg;
      msg << "incompatible kappa: lambda-weighted deficit " << deficit;
      throw AssemblyError(msg.str(), deficit);
    }
  } else {
    p.kappa.assign(grid.size(), -4.0 * pi * ratio / area);
  }
  return p;
}

TodaProblem with_t(const TodaProblem& p, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
  TodaProblem q = p;
  q.t = t;
  return q;
}

namespace {

std::vector<Field> unknowns_W(const TodaProblem& p, const std::vector<Field>& u) {
  const double t2 = p.t * p.t;
  std::vector<Field> W(p.nodes(), Field(p.grid.size()));
  for (int i = 0; i < p.nodes(); ++i)
    for (std::size_t k = 0; k < W[i].size(); ++k) W[i][k] = t2 * p.forcings[i].G[k] * std::exp(u[i][k]);
  return W;
}

double pin_value(const TodaProblem& p, const std::vector<Field>& u) {
  double s = 0.0;
  for (int i = 0; i < p.nodes(); ++i) s += p.lambda[i] * p.grid.mean(u[i]);
  return s;
}

std::vector<Field> residual_with_W(const TodaProblem& p, const std::vector<Field>& u, const std::vector<Field>& W) {
  const int n = p.nodes();
  std::vector<Field> R(n);
  for (int i = 0; i < n; ++i) {
    R[i] = p.grid.laplacian(u[i]);
    for (std::size_t k = 0; k < R[i].size(); ++k) {
      double s = p.kappa[k] + p.point_mass[i];
      for (int j = 0; j < n; ++j)
        if (p.M(i, j) != 0.0) s += p.M(i, j) * W[j][k];
      R[i][k] -= s;
    }
  }
  return R;
}

double l2(const std::vector<Field>& R, double pin_res) {
  double s = 0.0;
  std::size_t count = 0;
  for (const auto& f : R) {
    for (double v : f) s += v * v;
    count += f.size();
  }
  return std::sqrt(s / static_cast<double>(count) + pin_res * pin_res);
}

double sup(const std::vector<Field>& R) {
  double s = 0.0;
  for (const auto& f : R) s = std::max(s, sup_norm(f));
  return s;
}

bool all_finite(const std::vector<Field>& R) {
  for (const auto& f : R)
    for (double v : f)
      if (!std::isfinite(v)) return false;
  return true;
}

// Fourier block preconditioner built from the grid-averaged coupling.
class Preconditioner {
 public:
  Preconditioner(const TodaProblem& p, const std::vector<Field>& W) : p_(p), n_(p.nodes()) {
    Eigen::VectorXd Wbar(n_);
    for (int j = 0; j < n_; ++j) Wbar[j] = p.grid.mean(W[j]);
    const Eigen::MatrixXd Cbar = p.M * Wbar.asDiagonal();
    const auto& sym = p.grid.symbol();
    blocks_.resize(sym.size());
    for (std::size_t k = 1; k < sym.size(); ++k) {
      Eigen::MatrixXd B = sym[k] * Eigen::MatrixXd::Identity(n_, n_) - Cbar;
      blocks_[k] = B.partialPivLu().inverse();
    }
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n_ + 1, n_ + 1);
    Z.topLeftCorner(n_, n_) = -Cbar;
    Z.topRightCorner(n_, 1).setOnes();
    Z.bottomLeftCorner(1, n_) = p.lambda.transpose();
    zero_ = Z.partialPivLu();
  }

  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
    const std::size_t G = p_.grid.size();
    const double NN = static_cast<double>(G);
    std::vector<std::vector<std::complex<double>>> hat(n_);
    for (int i = 0; i < n_; ++i) {
      Field f(in.data() + i * G, in.data() + (i + 1) * G);
      p_.grid.forward(f, hat[i]);
    }
    Eigen::VectorXcd v(n_);
    for (std::size_t k = 1; k < blocks_.size(); ++k) {
      for (int i = 0; i < n_; ++i) v[i] = hat[i][k];
      const Eigen::VectorXcd z = blocks_[k].cast<std::complex<double>>() * v;
      for (int i = 0; i < n_; ++i) hat[i][k] = z[i];
    }
    Eigen::VectorXd rhs(n_ + 1);
    for (int i = 0; i < n_; ++i) rhs[i] = hat[i][0].real() / NN;
    rhs[n_] = in[static_cast<Eigen::Index>(n_ * G)];
    const Eigen::VectorXd sol = zero_.solve(rhs);
    out.resize(in.size());
    for (int i = 0; i < n_; ++i) {
      hat[i][0] = sol[i] * NN;
      Field f;
      p_.grid.backward(hat[i], f);
      std::copy(f.begin(), f.end(), out.data() + i * G);
    }
    out[static_cast<Eigen::Index>(n_ * G)] = sol[n_];
  }

 private:
  const TodaProblem& p_;
  int n_;
  std::vector<Eigen::MatrixXd> blocks_;
  Eigen::PartialPivLU<Eigen::MatrixXd> zero_;
};

TodaSolution package(const TodaProblem& p, const std::vector<Field>& u, const std::vector<double>& history,
                     int iterations) {
  TodaSolution s;
  s.u = u;
  s.W = unknowns_W(p, u);
  s.t = p.t;
  s.iterations = iterations;
  const auto R = residual_with_W(p, u, s.W);
  for (const auto& f : R) s.residual_per_node.push_back(sup_norm(f));
  s.residual_sup = sup(R);
  s.pin = pin_value(p, u);
  s.history = history;
  return s;
}

}  // namespace

std::vector<Field> residual(const TodaProblem& p, const std::vector<Field>& u) {
  return residual_with_W(p, u, unknowns_W(p, u));
}

std::vector<Field> initial_guess(const TodaProblem& p) {
  const int n = p.nodes();
  // Averaged system: M X = -(kappa_bar + point_mass), X_j = mean W_j.
  Eigen::VectorXd b(n);
  const double kbar = p.grid.mean(p.kappa);
  for (int i = 0; i < n; ++i) b[i] = -(kbar + p.point_mass[i]);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(p.M);
  Eigen::VectorXd Xp = lu.solve(b);
  Eigen::MatrixXd ker = lu.kernel();
  Eigen::VectorXd k = ker.col(0);
  if (k.sum() < 0) k = -k;
  Eigen::VectorXd Gbar(n);
  for (int i = 0; i < n; ++i) Gbar[i] = p.grid.mean(p.forcings[i].G) * p.t * p.t;

  double s_lo = -1e300;
  for (int i = 0; i < n; ++i) s_lo = std::max(s_lo, -Xp[i] / k[i]);
  auto pin_at = [&](double s) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += p.lambda[i] * std::log((Xp[i] + s * k[i]) / Gbar[i]);
    return v;
  };
  double width = 1.0 + std::abs(s_lo);
  while (pin_at(s_lo + width) < 0) width *= 2;
  double lo = s_lo, hi = s_lo + width;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pin_at(mid) < 0) lo = mid;
    else hi = mid;
  }
  const double s = hi;
  std::vector<Field> u(n);
  for (int i = 0; i < n; ++i) u[i].assign(p.grid.size(), std::log((Xp[i] + s * k[i]) / Gbar[i]));
  return u;
}

TodaSolution newton_solve(const TodaProblem& p, const std::optional<std::vector<Field>>& init,
                          const SolverOptions& opt) {
  const int n = p.nodes();
  const std::size_t G = p.grid.size();
  std::vector<Field> u;
  if (init) {
    u = *init;
  } else {
    // zero is pinned; keep it when it already certifies
    u.assign(n, Field(G, 0.0));
    if (sup(residual(p, u)) > opt.tol) u = initial_guess(p);
  }
  if (static_cast<int>(u.size()) != n) throw std::invalid_argument("initial guess has the wrong node count");
  {
    // re-project onto the pinned slice
    const double shift = pin_value(p, u) / p.lambda.sum();
    for (auto& f : u)
      for (double& v : f) v -= shift;
  }

  std::vector<double> history;
  auto W = unknowns_W(p, u);
  auto R = residual_with_W(p, u, W);
  double pin_res = pin_value(p, u);
  double norm = l2(R, pin_res);
  history.push_back(norm);

  const Eigen::Index dim = static_cast<Eigen::Index>(n * G + 1);
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    if (sup(R) <= opt.tol && std::abs(pin_res) <= opt.tol) return package(p, u, history, iter);

    Preconditioner P(p, W);
    LinearMap J = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
      out.resize(dim);
      double pin = 0.0;
      for (int i = 0; i < n; ++i) {
        Field xi(x.data() + i * G, x.data() + (i + 1) * G);
        const Field lap = p.grid.laplacian(xi);
        pin += p.lambda[i] * p.grid.mean(xi);
        for (std::size_t k = 0; k < G; ++k) {
          double s = lap[k] + x[dim - 1];
          for (int j = 0; j < n; ++j)
            if (p.M(i, j) != 0.0) s -= p.M(i, j) * W[j][k] * x[static_cast<Eigen::Index>(j * G + k)];
          out[static_cast<Eigen::Index>(i * G + k)] = s;
        }
      }
      out[dim - 1] = pin;
    };
    LinearMap Minv = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) { P.apply(x, out); };

    Eigen::VectorXd rhs(dim);
    for (int i = 0; i < n; ++i)
      for (std::size_t k = 0; k < G; ++k) rhs[static_cast<Eigen::Index>(i * G + k)] = -R[i][k];
    rhs[dim - 1] = -pin_res;
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(dim);
    GmresOptions gopt;
    gopt.rel_tol = 1e-12;
    gmres(J, Minv, rhs, delta, gopt);

    double alpha = 1.0;
    bool accepted = false;
    std::vector<Field> u_new(n, Field(G));
    for (int bt = 0; bt <= opt.max_backtracks; ++bt, alpha *= 0.5) {
      for (int i = 0; i < n; ++i)
        for (std::size_t k = 0; k < G; ++k) u_new[i][k] = u[i][k] + alpha * delta[static_cast<Eigen::Index>(i * G + k)];
      auto W_new = unknowns_W(p, u_new);
      auto R_new = residual_with_W(p, u_new, W_new);
      if (!all_finite(R_new)) continue;
      const double pin_new = pin_value(p, u_new);
      const double norm_new = l2(R_new, pin_new);
      if (norm_new < (1.0 - 1e-4 * alpha) * norm || (norm_new <= norm && sup(R_new) <= opt.tol)) {
        u.swap(u_new);
        W.swap(W_new);
        R.swap(R_new);
        pin_res = pin_new;
        norm = norm_new;
        accepted = true;
        break;
      }
    }
    history.push_back(norm);
    if (!accepted) {
      if (sup(R) <= opt.tol && std::abs(pin_res) <= opt.tol) return package(p, u, history, iter + 1);
      throw NewtonFailure("line search failed to reduce the residual at iteration " + std::to_string(iter + 1),
                          package(p, u, history, iter + 1));
    }
  }
  if (sup(R) <= opt.tol && std::abs(pin_res) <= opt.tol) return package(p, u, history, opt.max_iter);
  std::ostringstream msg;
  msg << "Newton did not converge in " << opt.max_iter << " iterations (sup residual " << sup(R) << ")";
  throw NewtonFailure(msg.str(), package(p, u, history, opt.max_iter));
}

std::vector<TodaSolution> continuation_sweep(const TodaProblem& p, const std::vector<double>& t_values,
                                             const SolverOptions& opt) {
  std::vector<TodaSolution> out;
  for (std::size_t k = 0; k < t_values.size(); ++k) {
    if (k > 0 && !(t_values[k] > t_values[k - 1]))
      throw std::invalid_argument("t ladder must be strictly ascending");
    const TodaProblem q = with_t(p, t_values[k]);
    try {
      if (out.empty()) out.push_back(newton_solve(q, std::nullopt, opt));
      else out.push_back(newton_solve(q, out.back().u, opt));
    } catch (const NewtonFailure& f) {
      throw SweepFailure(std::string(f.what()) + " (t = " + std::to_string(t_values[k]) + ")", t_values[k]);
    }
  }
  return out;
}

Field quadratic_form(const Eigen::MatrixXd& nu, const std::vector<Field>& e) {
  const std::size_t G = e.empty() ? 0 : e[0].size();
  Field Q(G, 0.0);
  const int n = static_cast<int>(e.size());
  for (std::size_t k = 0; k < G; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += nu(i, j) * e[i][k] * e[j][k];
    Q[k] = 4.0 * s;
  }
  return Q;
}

DerivedFields derived_fields(const TodaProblem& p, const TodaSolution& sol) {
  const int n = p.nodes();
  DerivedFields d;
  d.e.resize(n);
  d.e_tilde.resize(n);
  for (int i = 0; i < n; ++i) {
    const double di = p.system.symmetrizer[i].get_d();
    d.e[i] = sol.W[i];
    d.e_tilde[i] = sol.W[i];
    if (p.mode == Mode::raw) {
      for (double& v : d.e_tilde[i]) v *= di;
    } else {
      for (double& v : d.e[i]) v /= di;
    }
  }
  d.energy.assign(p.grid.size(), 0.0);
  for (int i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d.energy.size(); ++k) d.energy[k] += d.e[i][k];
  d.Q = quadratic_form(to_eigen(p.system.symmetric_gram()), d.e);
  return d;
}

}  // namespace todalab
