#include "todalab/krylov.hpp"

#include <cmath>
#include <vector>

namespace todalab {

GmresResult gmres(const LinearMap& A, const LinearMap& M, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                  const GmresOptions& opt) {
  GmresResult res;
  const Eigen::Index n = b.size();
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero(n);
    res.converged = true;
    return res;
  }
  if (x.size() != n) x.setZero(n);

  const int m = opt.restart;
  Eigen::VectorXd r(n), w(n), z(n);
  std::vector<Eigen::VectorXd> V(m + 1, Eigen::VectorXd(n));
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);

  while (res.iterations < opt.max_iter) {
    A(x, w);
    r = b - w;
    double beta = r.norm();
    res.rel_residual = beta / bnorm;
    if (res.rel_residual <= opt.rel_tol) {
      res.converged = true;
      return res;
    }
    V[0] = r / beta;
    g.setZero();
    g[0] = beta;
    H.setZero();
    int k = 0;
    for (; k < m && res.iterations < opt.max_iter; ++k) {
      ++res.iterations;
      M(V[k], z);
      A(z, w);
      for (int i = 0; i <= k; ++i) {  // modified Gram-Schmidt
        H(i, k) = V[i].dot(w);
        w -= H(i, k) * V[i];
      }
      H(k + 1, k) = w.norm();
      if (H(k + 1, k) > 0) V[k + 1] = w / H(k + 1, k);
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double d = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = d == 0.0 ? 1.0 : H(k, k) / d;
      sn[k] = d == 0.0 ? 0.0 : H(k + 1, k) / d;
      H(k, k) = d;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      res.rel_residual = std::abs(g[k + 1]) / bnorm;
      if (res.rel_residual <= opt.rel_tol) {
        ++k;
        break;
      }
    }
    Eigen::VectorXd y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    Eigen::VectorXd update = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < k; ++i) update += y[i] * V[i];
    M(update, z);
    x += z;
    if (res.rel_residual <= opt.rel_tol) {
      A(x, w);
      res.rel_residual = (b - w).norm() / bnorm;
      res.converged = res.rel_residual <= 10 * opt.rel_tol;
      if (res.converged) return res;
    }
  }
  return res;
}

}  // namespace todalab
