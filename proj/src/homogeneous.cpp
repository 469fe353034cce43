#include "grankin/homogeneous.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "grankin/errors.hpp"

namespace grankin {

Initial parse_initial(const std::string& s) {
  if (s == "equilibrium") return Initial::equilibrium;
  if (s == "shifted") return Initial::shifted;
  if (s == "heated") return Initial::heated;
  throw ConfigError("unknown initial state '" + s + "' (expected shifted, heated or equilibrium)");
}

double galerkin_dt_max(const OperatorMatrix& op) {
  if (op.kernel == Kernel::maxwell) return 0.1 * op.params.mean_free_path;
  return 0.1 / op.sigma.maxCoeff();
}

Eigen::VectorXd initial_grid(const OperatorMatrix& op, const InitialSpec& init) {
  const Params& p = op.params;
  if (init.kind == Initial::equilibrium) return op.M / op.weights.dot(op.M);
  // L^2(M) projection of f/M onto the interpolation basis; the initial states
  // are products of 1D Gaussians, so it splits by axis
  const double th = p.theta_sharp(), sd = std::sqrt(th / p.m);
  const double temp = init.kind == Initial::heated ? init.heat * th : th;
  const Vec3 u = (init.kind == Initial::shifted ? Vec3(p.u1 + Vec3(init.shift * sd, 0, 0)) : p.u1) - op.grid.center;
  const Eigen::MatrixXd G = equilibrium_mass_1d(p, op.grid, op.quad.interp_order, op.quad.src_gauss);
  const Eigen::LLT<Eigen::MatrixXd> llt(G);
  Eigen::VectorXd c[3];
  for (int d = 0; d < 3; ++d) {
    const double s = std::sqrt(temp / p.m);
    c[d] = llt.solve(basis_integrals_1d(op.grid, op.quad.interp_order, 8, [&](double x) {
      const double z = (x - u[d]) / s;
      return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
    }));
  }
  Eigen::VectorXd f(op.size());
  const int r = op.grid.res;
  for (int ix = 0; ix < r; ++ix)
    for (int iy = 0; iy < r; ++iy)
      for (int iz = 0; iz < r; ++iz) {
        const int i = op.grid.index(ix, iy, iz);
        f[i] = op.M[i] * c[0][ix] * c[1][iy] * c[2][iz];
      }
  return f / op.weights.dot(f);
}

namespace {

// mass and distance to equilibrium in symmetric coordinates
struct SymState {
  const OperatorMatrix& op;
  double y0y0;
  explicit SymState(const OperatorMatrix& o) : op(o), y0y0(o.kernel_dir.squaredNorm()) {}
  double mass(const Eigen::VectorXd& y) const { return op.kernel_dir.dot(y); }
  double dist(const Eigen::VectorXd& y) const {
    return (y - (mass(y) / y0y0) * op.kernel_dir).norm();
  }
};

// n RK4 steps of length h for y' = -K y (Taylor form, exact for linear ODEs)
void rk4_steps(const SymState& st, Eigen::VectorXd& y, double h, long n) {
  Eigen::VectorXd term(y.size()), acc(y.size()), tmp(y.size());
  double d = st.dist(y);
  for (long s = 0; s < n; ++s) {
    const double m0 = st.mass(y);
    term = y;
    acc = y;
    for (int j = 1; j <= 4; ++j) {
      tmp.noalias() = st.op.K * term;
      term = (-h / j) * tmp;
      acc += term;
    }
    const double m1 = st.mass(acc);
    if (std::abs(m1 - m0) > 1e-12 * std::max(1.0, std::abs(m0)))
      throw NumericError("mass", "galerkin step changed the mass by " + std::to_string(m1 - m0));
    const double d1 = st.dist(acc);
    if (!(d1 <= d * (1.0 + 1e-6) + 1e-13 * std::abs(m0)))
      throw NumericError("instability", "distance to equilibrium grew from " + std::to_string(d) + " to " +
                                            std::to_string(d1) + " in one step");
    y.swap(acc);
    d = d1;
  }
}

long substeps(double dt, double dt_max) { return std::max(1L, long(std::ceil(dt / dt_max - 1e-12))); }

}  // namespace

Eigen::VectorXd step_galerkin(const OperatorMatrix& op, const Eigen::VectorXd& f, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const SymState st(op);
  Eigen::VectorXd y = op.to_sym(f);
  const long n = substeps(dt, galerkin_dt_max(op));
  rk4_steps(st, y, dt / n, n);
  return op.from_sym(y);
}

RelaxationTrace relax_galerkin(const OperatorMatrix& op, const Eigen::VectorXd& f0, double t_end, int samples) {
  if (samples < 64) throw ConfigError("a relaxation trace needs at least 64 samples");
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  const Params& p = op.params;
  const SymState st(op);
  RelaxationTrace tr;
  tr.kernel = op.kernel;
  tr.method = "galerkin";
  Eigen::VectorXd y = op.to_sym(f0);
  if (std::abs(st.mass(y) - 1.0) > 1e-9) throw ConfigError("initial state must have unit mass");

  // moments of M I(f/M) with exact 1D moments of the basis
  const Eigen::MatrixXd mom = equilibrium_moments_1d(p, op.grid, op.quad.interp_order, 8);
  const int r = op.grid.res;
  auto contract = [&](const Eigen::VectorXd& g, int kx, int ky, int kz) {
    double acc = 0.0;
    for (int ix = 0; ix < r; ++ix)
      for (int iy = 0; iy < r; ++iy) {
        const double wxy = mom(ix, kx) * mom(iy, ky);
        double s = 0.0;
        for (int iz = 0; iz < r; ++iz) s += mom(iz, kz) * g[op.grid.index(ix, iy, iz)];
        acc += wxy * s;
      }
    return acc;
  };
  const Vec3 shift = op.grid.center - p.u1;
  auto record = [&](double t) {
    const Eigen::VectorXd g = op.from_sym(y).cwiseQuotient(op.M);
    const double m0 = contract(g, 0, 0, 0);
    const Vec3 m1(contract(g, 1, 0, 0), contract(g, 0, 1, 0), contract(g, 0, 0, 1));
    const double m2 = contract(g, 2, 0, 0) + contract(g, 0, 2, 0) + contract(g, 0, 0, 2);
    tr.t.push_back(t);
    tr.momentum.push_back(m1 / m0 + shift);
    tr.energy.push_back((m2 + 2.0 * shift.dot(m1)) / m0 + shift.squaredNorm());
    tr.l2dist.push_back(st.dist(y));
    tr.dissipation.push_back(y.dot(op.K * y));
  };

  const double dt = t_end / (samples - 1);
  const long n = substeps(dt, galerkin_dt_max(op));
  record(0.0);
  for (int k = 1; k < samples; ++k) {
    rk4_steps(st, y, dt / n, n);
    record(k == samples - 1 ? t_end : k * dt);
  }
  return tr;
}

namespace {

struct Line {
  double slope = 0.0;
  int n = 0;
};

Line least_squares(const std::vector<double>& t, const std::vector<double>& y, const std::vector<bool>& use) {
  double st = 0, sy = 0, stt = 0, sty = 0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!use[i]) continue;
    const double ly = std::log(y[i]);
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
    ++n;
  }
  Line l;
  l.n = n;
  if (n < 3) return l;
  const double den = n * stt - st * st;
  l.slope = den > 0.0 ? (n * sty - st * sy) / den : 0.0;
  return l;
}

double rate_from(const Line& l) {
  if (l.n < 3) throw NumericError("fit_rate", "fewer than 3 samples in the fit window");
  if (!(l.slope < 0.0)) throw NumericError("fit_rate", "data are not decaying");
  return -l.slope;
}

}  // namespace

double fit_rate(const std::vector<double>& t, const std::vector<double>& y, double lo, double hi) {
  if (t.size() != y.size() || t.empty()) throw NumericError("fit_rate", "empty or mismatched trace");
  const double y0 = y.front();
  if (!(y0 > 0.0)) throw NumericError("fit_rate", "initial value is not positive");
  std::vector<bool> use(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) use[i] = y[i] >= lo * y0 && y[i] <= hi * y0;
  return rate_from(least_squares(t, y, use));
}

double fit_rate_window(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
  if (t.size() != y.size() || t.empty()) throw NumericError("fit_rate", "empty or mismatched trace");
  std::vector<bool> use(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    use[i] = t[i] >= t0 && t[i] <= t1;
    if (use[i] && !(y[i] > 0.0)) throw NumericError("fit_rate", "non-positive value inside the fit window");
  }
  return rate_from(least_squares(t, y, use));
}

std::vector<double> trace_field(const RelaxationTrace& tr, const Params& p, const std::string& field) {
  std::vector<double> out(tr.size());
  const double e_inf = 3.0 * p.theta_sharp() / p.m;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (field == "l2dist") out[i] = tr.l2dist[i];
    else if (field == "px") out[i] = std::abs(tr.momentum[i].x());
    else if (field == "py") out[i] = std::abs(tr.momentum[i].y());
    else if (field == "pz") out[i] = std::abs(tr.momentum[i].z());
    else if (field == "momentum") out[i] = tr.momentum[i].norm();
    else if (field == "energy") out[i] = std::abs(tr.energy[i] - e_inf);
    else throw ConfigError("unknown trace field '" + field + "'");
  }
  return out;
}

double fit_rate(const RelaxationTrace& tr, const Params& p, const std::string& field) {
  return fit_rate(tr.t, trace_field(tr, p, field));
}

double dissipation_identity_error(const RelaxationTrace& tr, double floor) {
  const std::size_t n = tr.size();
  if (tr.dissipation.size() != n || n < 5) throw NumericError("dissipation", "trace carries no dissipation samples");
  const double h = tr.t[1] - tr.t[0];
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    if (tr.dissipation[i] < floor * tr.dissipation[0]) continue;
    auto e = [&](std::size_t j) { return tr.l2dist[j] * tr.l2dist[j]; };
    const double deriv = (-e(i + 2) + 8.0 * e(i + 1) - 8.0 * e(i - 1) + e(i - 2)) / (12.0 * h);
    worst = std::max(worst, std::abs(deriv + 2.0 * tr.dissipation[i]) / (2.0 * tr.dissipation[i]));
  }
  return worst;
}

}  // namespace grankin
