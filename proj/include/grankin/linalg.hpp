#pragma once
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace grankin {

using MatVec = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& y)>;

// Ritz values of a symmetric operator from `steps` Lanczos iterations with
// full reorthogonalization. Directions in `deflate` (orthonormal) are
// projected out. Returned ascending.
std::vector<double> lanczos_ritz(const MatVec& A, int n, int steps, const std::vector<Eigen::VectorXd>& deflate = {},
                                 unsigned seed = 1);

struct CGResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Jacobi-preconditioned CG for A x = b restricted to the orthogonal
// complement of the unit vector `null` (b must be orthogonal to it).
CGResult projected_cg(const MatVec& A, const Eigen::VectorXd& diag, const Eigen::VectorXd& b,
                      const Eigen::VectorXd& null, double rtol, int max_iter, const Eigen::VectorXd* x0 = nullptr);

}  // namespace grankin
