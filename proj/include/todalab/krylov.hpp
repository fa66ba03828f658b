#pragma once

#include <Eigen/Dense>

#include <functional>

namespace todalab {

using LinearMap = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

struct GmresOptions {
  double rel_tol = 1e-12;
  int restart = 60;
  int max_iter = 600;
};

struct GmresResult {
  bool converged = false;
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Restarted GMRES for A x = b with right preconditioner M (x = M y).
/// x holds the initial guess on entry.
GmresResult gmres(const LinearMap& A, const LinearMap& M, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                  const GmresOptions& opt = {});

}  // namespace todalab
