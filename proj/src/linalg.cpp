#include "grankin/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace grankin {

std::vector<double> lanczos_ritz(const MatVec& A, int n, int steps, const std::vector<Eigen::VectorXd>& deflate,
                                 unsigned seed) {
  steps = std::min(steps, n - int(deflate.size()));
  auto project = [&](Eigen::VectorXd& v) {
    for (const auto& d : deflate) v -= d.dot(v) * d;
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q[i] = nd(rng);
  project(q);
  q.normalize();
  std::vector<Eigen::VectorXd> Q{q};
  std::vector<double> alpha, beta;
  Eigen::VectorXd w(n);
  for (int j = 0; j < steps; ++j) {
    A(Q[j], w);
    project(w);
    const double a = Q[j].dot(w);
    alpha.push_back(a);
    // two passes of Gram-Schmidt against the whole basis
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : Q) w -= v.dot(w) * v;
    project(w);
    const double b = w.norm();
    if (j + 1 == steps || b < 1e-13 * std::abs(a) + 1e-300) break;
    beta.push_back(b);
    Q.push_back(w / b);
  }
  const int m = int(alpha.size());
  Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
  Eigen::VectorXd e(m > 1 ? m - 1 : 0);
  for (int i = 0; i + 1 < m; ++i) e[i] = beta[i];
  std::vector<double> out;
  if (m == 1) return {d[0]};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
  for (int i = 0; i < m; ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

CGResult projected_cg(const MatVec& A, const Eigen::VectorXd& diag, const Eigen::VectorXd& b,
                      const Eigen::VectorXd& null, double rtol, int max_iter, const Eigen::VectorXd* x0) {
  const int n = int(b.size());
  auto project = [&](Eigen::VectorXd& v) { v -= null.dot(v) * null; };
  CGResult res;
  res.x = x0 ? *x0 : Eigen::VectorXd::Zero(n);
  project(res.x);
  Eigen::VectorXd r(n), Ap(n);
  A(res.x, Ap);
  r = b - Ap;
  project(r);
  const double bn = b.norm();
  if (bn == 0.0) {
    res.converged = true;
    return res;
  }
  Eigen::VectorXd dinv = diag.cwiseInverse();
  Eigen::VectorXd z = r.cwiseProduct(dinv);
  project(z);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    if (r.norm() <= rtol * bn) break;
    A(p, Ap);
    project(Ap);
    const double alpha = rz / p.dot(Ap);
    res.x += alpha * p;
    r -= alpha * Ap;
    // periodic true residual refresh limits drift
    if ((it + 1) % 50 == 0) {
      A(res.x, Ap);
      r = b - Ap;
      project(r);
    }
    z = r.cwiseProduct(dinv);
    project(z);
    const double rz1 = r.dot(z);
    p = z + (rz1 / rz) * p;
    rz = rz1;
    res.iterations = it + 1;
  }
  project(res.x);
  A(res.x, Ap);
  Eigen::VectorXd tr = b - Ap;
  project(tr);
  res.relative_residual = tr.norm() / bn;
  res.converged = res.relative_residual <= rtol;
  return res;
}

}  // namespace grankin
