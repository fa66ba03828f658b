#pragma once

#include <Eigen/Dense>

namespace todalab {

struct NnlsResult {
  Eigen::VectorXd x;
  double residual = 0.0;  // ||A x - b||_2
  bool converged = false;
  int iterations = 0;
};

/// Lawson-Hanson active set method for min ||A x - b|| subject to x >= 0.
NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = 0);

}  // namespace todalab
