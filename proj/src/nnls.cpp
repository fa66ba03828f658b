#include "todalab/nnls.hpp"

#include <limits>
#include <vector>

namespace todalab {

namespace {

Eigen::VectorXd solve_passive(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const std::vector<bool>& passive) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    if (passive[j]) idx.push_back(j);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(A.cols());
  if (idx.empty()) return z;
  Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
  const Eigen::VectorXd zp = Ap.completeOrthogonalDecomposition().solve(b);
  for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zp[static_cast<Eigen::Index>(k)];
  return z;
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter) {
  const Eigen::Index n = A.cols();
  if (max_iter <= 0) max_iter = static_cast<int>(3 * n + 10);
  NnlsResult res;
  res.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 10 * std::numeric_limits<double>::epsilon() * A.norm() * std::max<Eigen::Index>(A.rows(), n) *
                     (1.0 + b.norm());

  Eigen::VectorXd w = A.transpose() * (b - A * res.x);
  while (res.iterations < max_iter) {
    Eigen::Index best = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    if (best < 0) {
      res.converged = true;
      break;
    }
    passive[best] = true;
    ++res.iterations;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      Eigen::VectorXd z = solve_passive(A, b, passive);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0) feasible = false;
      if (feasible) {
        res.x = z;
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0) alpha = std::min(alpha, res.x[j] / (res.x[j] - z[j]));
      res.x += alpha * (z - res.x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && res.x[j] <= tol) {
          passive[j] = false;
          res.x[j] = 0.0;
        }
    }
    w = A.transpose() * (b - A * res.x);
  }
  res.residual = (A * res.x - b).norm();
  return res;
}

}  // namespace todalab
