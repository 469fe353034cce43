#include "grankin/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <unsupported/Eigen/FFT>

#include "grankin/constants.hpp"
#include "grankin/errors.hpp"
#include "grankin/grid.hpp"
#include "grankin/linalg.hpp"
#include "grankin/spectral.hpp"

namespace grankin {

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::VectorXd first_coordinate(const OperatorMatrix& op) {
  Eigen::VectorXd x1(op.size());
  for (int i = 0; i < op.size(); ++i) x1[i] = op.grid.node(i).x() - op.params.u1.x();
  return x1;
}

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

}  // namespace

double diffusivity_maxwell(const Params& p) { return p.theta_sharp() / (p.m * p.kappa()) * p.mean_free_path; }

CellSolution solve_cell_problem(const OperatorMatrix& op, double rtol, const Eigen::VectorXd* x0) {
  if (op.params.u1.norm() != 0.0) throw ConfigError("the cell problem needs a background at rest (u1 = 0)");
  // in symmetric coordinates y = C^T chi/M the equation reads K y = -C^T v1
  const Eigen::VectorXd b = -apply_axes(op.chol.transpose(), op.grid.res, first_coordinate(op));
  const Eigen::VectorXd null = op.kernel_dir.normalized();
  const MatVec A = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = op.K * x; };
  Eigen::VectorXd y0;
  if (x0) y0 = op.to_sym(*x0);
  const CGResult cg = projected_cg(A, op.K.diagonal(), b - null.dot(b) * null, null, rtol, 5000, x0 ? &y0 : nullptr);

  CellSolution s;
  s.chi1 = op.from_sym(cg.x);
  s.residual = (op.K * cg.x - b).norm() / b.norm();
  s.mean = op.kernel_dir.dot(cg.x);
  s.iterations = cg.iterations;
  s.converged = s.residual <= 1e-8;
  if (!s.converged)
    throw NumericError("cell_problem", "CG stagnated at relative residual " + std::to_string(s.residual) + " after " +
                                           std::to_string(cg.iterations) + " iterations");
  return s;
}

double odd_symmetry_defect(const VelocityGrid& g, const Eigen::VectorXd& chi) {
  double worst = 0.0;
  for (int ix = 0; ix < g.res; ++ix)
    for (int iy = 0; iy < g.res; ++iy)
      for (int iz = 0; iz < g.res; ++iz)
        worst = std::max(worst, std::abs(chi[g.index(ix, iy, iz)] + chi[g.index(g.res - 1 - ix, iy, iz)]));
  return worst / chi.cwiseAbs().maxCoeff();
}

DiffusivityReport diffusivity_report(const OperatorMatrix& op, const CellSolution& cell) {
  const Params& p = op.params;
  DiffusivityReport r;
  r.kernel = op.kernel;
  const Eigen::VectorXd y1 = apply_axes(op.chol.transpose(), op.grid.res, first_coordinate(op));
  const Eigen::VectorXd y = op.to_sym(cell.chi1);
  r.d_value = -y1.dot(y);
  r.c_hs = y1.dot(op.K * y1) / y1.squaredNorm();
  r.c_star = c_star_lower(p);
  const double th = p.theta_sharp();
  r.d_lower = th / (r.c_hs * p.m);
  r.d_upper = th / (eigenvalue(p, 0, 1) / p.mean_free_path * r.c_star * p.m);
  r.chi_norm2 = y.squaredNorm();
  r.cell_residual = cell.residual;
  r.cell_mean = cell.mean;
  r.odd_defect = odd_symmetry_defect(op.grid, cell.chi1);
  r.cg_iterations = cell.iterations;
  r.bounds_hold = r.d_value >= 0.99 * r.d_lower && r.d_value <= 1.01 * r.d_upper;
  return r;
}

DiffusivityReport diffusivity_hs(const OperatorMatrix& op) { return diffusivity_report(op, solve_cell_problem(op)); }

double d_upper_closed_form(const Params& p) {
  const double a = p.alpha(), b = p.beta();
  return tau_numeric() * (1.0 - a) * (1.0 - b) / (a * (1.0 - b) * (1.0 - a * (1.0 - b))) * std::sqrt(p.m1 * p.theta1) /
         p.m * p.mean_free_path;
}

std::vector<double> cosine_profile(int nx, double a) {
  const double dx = 1.0 / nx;
  std::vector<double> rho(nx);
  for (int c = 0; c < nx; ++c)
    rho[c] = 1.0 + a * (std::sin(2.0 * kPi * (c + 1) * dx) - std::sin(2.0 * kPi * c * dx)) / (2.0 * kPi * dx);
  return rho;
}

DensityField heat_reference(double d, const std::vector<double>& rho0, double t) {
  const int n = int(rho0.size());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, rho0);
  for (int k = 0; k < n; ++k) {
    const int kk = std::min(k, n - k);
    spec[k] *= std::exp(-d * 4.0 * kPi * kPi * kk * kk * t);
  }
  DensityField out;
  out.t = t;
  out.dx = 1.0 / n;
  fft.inv(out.rho, spec);
  return out;
}

double l2_distance(const DensityField& a, const DensityField& b) {
  if (a.rho.size() != b.rho.size()) throw ConfigError("density fields on different grids");
  double acc = 0.0;
  for (std::size_t c = 0; c < a.rho.size(); ++c) acc += (a.rho[c] - b.rho[c]) * (a.rho[c] - b.rho[c]);
  return std::sqrt(acc * a.dx);
}

namespace {

// one upwind finite-volume step of u_t + c u_x = 0 on the periodic grid
void advect(double* u, int n, std::ptrdiff_t stride, double c, double tau, double dx, bool second_order,
            std::vector<double>& buf, std::vector<double>& flux) {
  if (c == 0.0) return;
  for (int j = 0; j < n; ++j) buf[j] = u[j * stride];
  const double nu = std::abs(c) * tau / dx;
  auto at = [&](int j) { return buf[(j + n) % n]; };
  for (int j = 0; j < n; ++j) {
    // flux through the right face of cell j
    double face;
    if (c > 0.0) {
      const double s = second_order ? minmod(at(j) - at(j - 1), at(j + 1) - at(j)) : 0.0;
      face = at(j) + 0.5 * (1.0 - nu) * s;
    } else {
      const double s = second_order ? minmod(at(j + 1) - at(j), at(j + 2) - at(j + 1)) : 0.0;
      face = at(j + 1) - 0.5 * (1.0 - nu) * s;
    }
    flux[j] = c * face;
  }
  for (int j = 0; j < n; ++j) u[j * stride] = buf[j] - tau / dx * (flux[j] - flux[(j - 1 + n) % n]);
}

}  // namespace

RescaledRun solve_rescaled(const OperatorMatrix& op, double eps, const std::vector<double>& rho0, double t_end,
                           double d_fick, const RescaledOptions& opt) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must lie in (0,1]");
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (rho0.size() < 4) throw ConfigError("need at least 4 spatial cells");
  if (opt.samples < 2) throw ConfigError("need at least 2 samples");
  if (!(opt.cfl > 0.0 && opt.cfl <= 1.0)) throw ConfigError("cfl must lie in (0,1]");
  const int nx = int(rho0.size()), N = op.size();
  const double dx = 1.0 / nx;
  const Eigen::VectorXd x1 = first_coordinate(op);
  const double vmax = x1.cwiseAbs().maxCoeff();

  RescaledRun run;
  run.eps = eps;
  run.first_order = !opt.second_order;
  run.steps = std::max(1L, long(std::ceil(t_end / (opt.cfl * eps * dx / vmax) - 1e-9)));
  const double dt = t_end / run.steps;
  run.dt = dt;

  // backward-Euler collision propagator for step dt/eps^2, in nodal values:
  // P = diag(M) C^{-T} (I + a K)^{-1} C^T diag(1/M)
  Eigen::MatrixXd P;
  {
    const double a = dt / (eps * eps);
    Eigen::MatrixXd A = a * op.K;
    A.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw NumericError("collision_solve", "I + a K is not positive definite");
    P = Eigen::MatrixXd::Identity(N, N);
    llt.solveInPlace(P);
    apply_axes(op.chol_inv.transpose(), op.grid.res, P.data(), N);
    P.transposeInPlace();
    apply_axes(op.chol, op.grid.res, P.data(), N);
    P.transposeInPlace();
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) P(i, j) *= op.M[i] / op.M[j];
  }

  Eigen::MatrixXd F(N, nx), tmp(N, nx);
  for (int c = 0; c < nx; ++c) F.col(c) = rho0[c] * op.M;
  const Eigen::RowVectorXd wr = op.weights.transpose();
  const Eigen::RowVectorXd wj = op.weights.cwiseProduct(x1).transpose() / eps;
  auto density = [&] { return Eigen::RowVectorXd(wr * F); };
  auto current = [&] { return Eigen::RowVectorXd(wj * F); };
  auto to_vec = [](const Eigen::RowVectorXd& r) { return std::vector<double>(r.data(), r.data() + r.size()); };
  auto ddx = [&](const Eigen::RowVectorXd& u) {
    Eigen::RowVectorXd d(nx);
    for (int c = 0; c < nx; ++c) d[c] = (u[(c + 1) % nx] - u[(c - 1 + nx) % nx]) / (2.0 * dx);
    return d;
  };

  const double mass0 = density().sum() * dx;
  double fick_num = 0.0, fick_den = 0.0;
  auto record = [&](double t) {
    if (t > 0.0) {
      const Eigen::RowVectorXd flux = d_fick * ddx(density());
      fick_num += (current() + flux).squaredNorm();
      fick_den += flux.squaredNorm();
    }
    DensityField s;
    s.t = t;
    s.dx = dx;
    s.rho = to_vec(density());
    s.j = to_vec(current());
    run.samples.push_back(std::move(s));
    // |(f - rho M)/eps| in the weighted norm
    tmp = F.array().colwise() / op.M.array();
    const Eigen::RowVectorXd rho = density();
    tmp.rowwise() -= rho;
    apply_axes(op.chol.transpose(), op.grid.res, tmp.data(), nx);
    run.h_max = std::max(run.h_max, std::sqrt(tmp.squaredNorm() * dx) / eps);
  };

  std::vector<long> sample_steps(opt.samples);
  for (int k = 0; k < opt.samples; ++k) sample_steps[k] = std::lround(double(k) * run.steps / (opt.samples - 1));

  std::vector<double> buf(nx), flux(nx);
  auto transport = [&](double tau) {
    for (int i = 0; i < N; ++i)
      advect(F.data() + i, nx, N, x1[i] / eps, tau, dx, opt.second_order, buf, flux);
  };

  Eigen::RowVectorXd rho_prev = density(), rho_before(nx), j_mid(nx);
  bool pending = false;
  std::size_t next = 1;
  record(0.0);
  for (long s = 1; s <= run.steps; ++s) {
    transport(0.5 * dt);
    tmp.noalias() = P * F;
    F.swap(tmp);
    transport(0.5 * dt);

    const Eigen::RowVectorXd rho = density();
    run.mass_drift = std::max(run.mass_drift, std::abs(rho.sum() * dx - mass0) / mass0);
    if (pending) {
      const Eigen::RowVectorXd dj = ddx(j_mid);
      const Eigen::RowVectorXd res = (rho - rho_before) / (2.0 * dt) + dj;
      if (dj.norm() > 0.0) run.continuity_residual = std::max(run.continuity_residual, res.norm() / dj.norm());
      pending = false;
    }
    if (next < sample_steps.size() && s == sample_steps[next]) {
      record(s == run.steps ? t_end : s * dt);
      ++next;
      if (s < run.steps) {
        rho_before = rho_prev;
        j_mid = current();
        pending = true;
      }
    }
    rho_prev = rho;
  }

  run.fick_error = fick_den > 0.0 ? std::sqrt(fick_num / fick_den) : 0.0;
  return run;
}

HydroReport hydrolimit_report(const OperatorMatrix& op, const std::vector<double>& eps_list, double d, int nx,
                              double t_end, const RescaledOptions& opt) {
  if (eps_list.empty()) throw ConfigError("empty eps list");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps list must be decreasing");
  HydroReport rep;
  rep.kernel = op.kernel;
  rep.d = d;
  rep.nx = nx;
  rep.t_end = t_end;
  const std::vector<double> rho0 = cosine_profile(nx);
  const DensityField ref = heat_reference(d, rho0, t_end);
  for (double eps : eps_list) {
    const RescaledRun run = solve_rescaled(op, eps, rho0, t_end, d, opt);
    HydroRow row;
    row.eps = eps;
    row.error = l2_distance(run.samples.back(), ref);
    row.order = std::numeric_limits<double>::quiet_NaN();
    if (!rep.rows.empty()) {
      const HydroRow& prev = rep.rows.back();
      row.order = std::log(prev.error / row.error) / std::log(prev.eps / eps);
    }
    row.mass_drift = run.mass_drift;
    row.continuity_residual = run.continuity_residual;
    row.fick_error = run.fick_error;
    row.h_max = run.h_max;
    row.steps = run.steps;
    row.first_order = run.first_order;
    rep.rows.push_back(row);
  }
  rep.decreasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].error < rep.rows[i - 1].error)) rep.decreasing = false;
  return rep;
}

}  // namespace grankin
