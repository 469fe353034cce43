#include "grankin/collision.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include "grankin/errors.hpp"
#include "grankin/linalg.hpp"
#include "grankin/quadrature.hpp"
#include "grankin/rng.hpp"

namespace grankin {

namespace {
constexpr double kPi = std::numbers::pi;

double normal_pdf(double s, double mean, double sd) {
  const double z = (s - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
}
}  // namespace

Kernel parse_kernel(const std::string& s) {
  if (s == "maxwell") return Kernel::maxwell;
  if (s == "hs" || s == "hard_sphere" || s == "hard-sphere") return Kernel::hard_sphere;
  throw ConfigError("unknown kernel '" + s + "' (expected maxwell or hs)");
}

const char* kernel_name(Kernel k) { return k == Kernel::maxwell ? "maxwell" : "hs"; }

std::pair<Vec3, Vec3> post_collision(const Params& p, const Vec3& v, const Vec3& w, const Vec3& n) {
  const double qn = (v - w).dot(n);
  return {v - 2.0 * p.kappa() * qn * n, w + 2.0 * p.gamma() * qn * n};
}

double collision_frequency(const Params& p, Kernel k, const Vec3& v) {
  if (k == Kernel::maxwell) return 1.0 / p.mean_free_path;
  const double sd = std::sqrt(p.theta1 / p.m1);
  const double b = (v - p.u1).norm() / sd;
  double e;
  if (b < 1e-8)
    e = std::sqrt(8.0 / kPi) * (1.0 + b * b / 6.0);
  else
    e = std::sqrt(2.0 / kPi) * std::exp(-0.5 * b * b) + (b + 1.0 / b) * std::erf(b / std::sqrt(2.0));
  return sd * e / p.mean_free_path;
}

NuBounds nu_bounds(const Params& p, double r_max) {
  NuBounds nb{1e300, 0.0};
  const int n = 4000;
  for (int i = 0; i <= n; ++i) {
    const double r = r_max * i / n;
    const double s = collision_frequency(p, Kernel::hard_sphere, p.u1 + Vec3(r, 0, 0)) / (1.0 + r);
    nb.nu0 = std::min(nb.nu0, s);
    nb.nu1 = std::max(nb.nu1, s);
  }
  return nb;
}

namespace {

// F(t, a) = E 1/sqrt(t^2 + |z - a e|^2) over standard normal z in the plane,
// as (1/sqrt(2 pi)) int_0^1 exp(-u t^2/(2(1-u)) - u a^2/2) du / sqrt(u(1-u))
double perp_factor_direct(double t, double a) {
  constexpr int n = 160;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double u = 0.5 * (1.0 + std::cos((j + 0.5) * kPi / n));
    acc += std::exp(-0.5 * u * t * t / (1.0 - u) - 0.5 * u * a * a);
  }
  return acc * (kPi / n) / std::sqrt(2.0 * kPi);
}

class PerpTable {
 public:
  static constexpr int n = 641;
  static constexpr double step = 1.0 / 16.0, top = (n - 1) * step;
  PerpTable() : v_(size_t(n) * n) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v_[size_t(i) * n + j] = perp_factor_direct(i * step, j * step);
  }
  double operator()(double t, double a) const {
    if (t >= top || a >= top) return perp_factor_direct(t, a);
    int it, ia;
    double wt[4], wa[4];
    stencil(t, it, wt);
    stencil(a, ia, wa);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double* row = &v_[size_t(it + i) * n + ia];
      acc += wt[i] * (wa[0] * row[0] + wa[1] * row[1] + wa[2] * row[2] + wa[3] * row[3]);
    }
    return acc;
  }

 private:
  static void stencil(double x, int& start, double* w) {
    const int c = std::min(int(x / step), n - 2);
    start = std::clamp(c - 1, 0, n - 4);
    lagrange_weights(3, start - c, x / step - c, w);
  }
  std::vector<double> v_;
};

const PerpTable& perp_table() {
  static const PerpTable t;
  return t;
}

}  // namespace

double maxwell_perp_factor(double t, double a) { return perp_table()(t, a); }

void for_each_jump(const Params& p, Kernel k, const QuadratureSpec& q, const Vec3& v,
                   const std::function<void(const Vec3&, double)>& fn, const Eigen::Matrix3d* rot) {
  const double kap = p.kappa(), lam = p.mean_free_path;
  const double sd = std::sqrt(p.theta1 / p.m1);
  const Vec3 x = v - p.u1;
  const Rule cr = gauss_legendre(q.dir_cos, 0.0, 1.0);
  const Rule& sr = gauss_legendre(q.line_s);
  const double pref = 1.0 / (2.0 * kPi * lam);
  const bool mx = k == Kernel::maxwell;
  const PerpTable* tab = mx ? &perp_table() : nullptr;
  for (int ic = 0; ic < q.dir_cos; ++ic) {
    const double c = cr.x[ic], st = std::sqrt(1.0 - c * c);
    // hemisphere weight, doubled for the antipodal normal
    const double wdir = 2.0 * cr.w[ic] * 2.0 * kPi / q.dir_phi;
    for (int ip = 0; ip < q.dir_phi; ++ip) {
      const double ph = 2.0 * kPi * (ip + 0.5) / q.dir_phi;
      Vec3 n(st * std::cos(ph), st * std::sin(ph), c);
      if (rot) n = *rot * n;
      // s = (v - w).n is normal with mean b; the rest of v - w is a planar
      // normal centred at distance xp
      const double b = x.dot(n);
      const double xp = (x - b * n).norm() / sd;
      const double ends[3] = {std::min(0.0, b - 8.0 * sd), 0.0, std::max(0.0, b + 8.0 * sd)};
      for (int half = 0; half < 2; ++half) {
        const double a0 = ends[half], a1 = ends[half + 1];
        if (a1 - a0 <= 0.0) continue;
        const double mid = 0.5 * (a0 + a1), hw = 0.5 * (a1 - a0);
        for (int is = 0; is < q.line_s; ++is) {
          const double s = mid + hw * sr.x[is];
          double r = pref * wdir * hw * sr.w[is] * std::abs(s) * normal_pdf(s, b, sd);
          // maxwell: |q.n|/|q| instead of |q.n|
          if (mx) r *= (*tab)(std::abs(s) / sd, xp) / sd;
          if (r > 0.0) fn(-2.0 * kap * s * n, r);
        }
      }
    }
  }
}

namespace {

// coefficients (ascending powers of theta) of the Lagrange basis on nodes off..off+order
std::vector<std::vector<double>> basis_coeffs(int order, int off) {
  const int n = order + 1;
  std::vector<std::vector<double>> out(n);
  for (int a = 0; a < n; ++a) {
    std::vector<double> c{1.0};
    double den = 1.0;
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      std::vector<double> nc(c.size() + 1, 0.0);
      for (size_t k = 0; k < c.size(); ++k) {
        nc[k + 1] += c[k];
        nc[k] -= (off + b) * c[k];
      }
      c = nc;
      den *= double(a - b);
    }
    for (double& v : c) v /= den;
    out[a] = c;
  }
  return out;
}

// pair products phi_a phi_b, indexed [a*n+b][power], exactly symmetric in (a,b)
std::vector<double> pair_coeffs(int order, int off) {
  const int n = order + 1, d = 2 * order + 1;
  const auto bc = basis_coeffs(order, off);
  std::vector<double> out(size_t(n * n * d), 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      double* dst = &out[size_t((a * n + b) * d)];
      for (int i = 0; i <= order; ++i)
        for (int j = 0; j <= order; ++j) dst[i + j] += bc[a][i] * bc[b][j];
      std::copy(dst, dst + d, &out[size_t((b * n + a) * d)]);
    }
  return out;
}

struct Locator {
  const VelocityGrid& g;
  int order;
  bool locate(const Vec3& v, AxisStencil s[3]) const {
    const Vec3 x = v - g.center;
    for (int d = 0; d < 3; ++d)
      if (!axis_stencil(g, order, x[d], s[d])) return false;
    return true;
  }
};


// Source points of the symmetric form: ng^3 Gauss points per cell, each
// carrying its position, weight and interpolation stencil.
template <class Fn>
void for_each_source(const VelocityGrid& g, int order, int ng, const QuadratureSpec& q, Fn&& fn) {
  AxisStencil s[3];
  std::uint64_t counter = 0;
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  const Rule gl = gauss_legendre(ng, 0.0, 1.0);
  const int nc = g.res - 1;
  const double h3 = g.h * g.h * g.h;
  for (int cx = 0; cx < nc; ++cx)
    for (int cy = 0; cy < nc; ++cy)
      for (int cz = 0; cz < nc; ++cz) {
        const int cell[3] = {cx, cy, cz};
        for (int a = 0; a < ng; ++a)
          for (int b = 0; b < ng; ++b)
            for (int c = 0; c < ng; ++c) {
              const int iq[3] = {a, b, c};
              Vec3 x;
              for (int d = 0; d < 3; ++d) {
                const int off = stencil_offset(g, order, cell[d]);
                s[d].cell = cell[d];
                s[d].theta = gl.x[iq[d]];
                s[d].start = cell[d] + off;
                lagrange_weights(order, off, s[d].theta, s[d].w.data());
                x[d] = g.coord(cell[d]) + s[d].theta * g.h;
              }
              const bool first = a == 0 && b == 0 && c == 0;
              const bool last = a == ng - 1 && b == ng - 1 && c == ng - 1;
              const Eigen::Matrix3d* r = nullptr;
              if (q.rotate) {
                CounterRng rng(q.rotation_seed, counter++);
                rot = random_rotation(rng);
                r = &rot;
              }
              fn(x, h3 * gl.w[a] * gl.w[b] * gl.w[c], s, first, last, r);
            }
      }
}

// Kronecker cube of a 1D vector
Eigen::VectorXd kron_cube(const Eigen::VectorXd& a) {
  const int r = int(a.size());
  Eigen::VectorXd out(r * r * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) out[(i * r + j) * r + k] = a[i] * a[j] * a[k];
  return out;
}

struct Metric {
  Eigen::MatrixXd chol, chol_inv;
  Eigen::VectorXd mass;  // int M phi_k
};

Metric make_metric(const Params& p, const VelocityGrid& g, const QuadratureSpec& q) {
  const Eigen::MatrixXd m1 = equilibrium_mass_1d(p, g, q.interp_order, q.src_gauss);
  Eigen::LLT<Eigen::MatrixXd> llt(m1);
  if (llt.info() != Eigen::Success) throw NumericError("metric", "equilibrium mass matrix is not positive definite");
  Metric m;
  m.chol = llt.matrixL();
  m.chol_inv = m.chol.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(g.res, g.res));
  m.mass = kron_cube(m1.rowwise().sum());
  return m;
}

// powers of theta for the cell moments
void add_moments(double* m, const AxisStencil s[3], int D, double weight) {
  double t[3][7];
  for (int d = 0; d < 3; ++d) {
    t[d][0] = 1.0;
    for (int e = 1; e < D; ++e) t[d][e] = t[d][e - 1] * s[d].theta;
  }
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      const double f = weight * t[0][a] * t[1][b];
      double* mm = m + (a * D + b) * D;
      for (int c = 0; c < D; ++c) mm[c] += f * t[2][c];
    }
}

}  // namespace

OperatorMatrix assemble_operator(const Params& p, const VelocityGrid& g, Kernel k, const QuadratureSpec& q,
                                 double tolerance) {
  validate(p);
  if (q.interp_order != 1 && q.interp_order != 3) throw ConfigError("interpolation order must be 1 or 3");
  if (q.src_gauss < 2 || q.src_gauss > 8) throw ConfigError("source Gauss points per axis must be in [2, 8]");
  OperatorMatrix op;
  op.kernel = k;
  op.params = p;
  op.grid = g;
  op.quad = q;
  const int N = g.size(), order = q.interp_order, P = order + 1, D = 2 * order + 1, P3 = P * P * P;
  op.M = nodal_equilibrium(p, g);
  if (!(op.M.minCoeff() > 1e-280 * op.M.maxCoeff()))
    throw NumericError("equilibrium_range", "equilibrium underflows at the cube corners; reduce v_max");
  const Metric met = make_metric(p, g, q);
  op.chol = met.chol;
  op.chol_inv = met.chol_inv;
  op.weights = met.mass.cwiseQuotient(op.M);
  op.sigma.resize(N);
  for (int i = 0; i < N; ++i) op.sigma[i] = collision_frequency(p, k, g.node(i));
  Eigen::VectorXd pcv = Eigen::VectorXd::Zero(N);  // equilibrium-weighted rate of leaving the cube, per node
  double gam = 0.0;

  const int nc = g.res - 1, D3 = D * D * D, ng = q.src_gauss, npts = ng * ng * ng;
  std::vector<double> mom(size_t(nc) * nc * nc * D3, 0.0);
  op.K.setZero(N, N);
  Eigen::MatrixXd& S = op.K;
  // per cell: rates into target nodes from each source point, and source stencil weights
  Eigen::MatrixXd A(N, npts), E(npts, P3);
  std::vector<int> sidx(P3);
  int ip = 0;
  Locator loc{g, order};

  for_each_source(g, order, ng, q,
                  [&](const Vec3& x, double omega, const AxisStencil* s0, bool first, bool last,
                      const Eigen::Matrix3d* rot) {
    if (first) {
      A.setZero();
      ip = 0;
      for (int a = 0; a < P; ++a)
        for (int b = 0; b < P; ++b)
          for (int c = 0; c < P; ++c) sidx[(a * P + b) * P + c] = g.index(s0[0].start + a, s0[1].start + b, s0[2].start + c);
    }
    const Vec3 v = g.center + x;
    const double pp = omega * equilibrium(p, v);
    double* col = A.col(ip).data();
    double sig = 0.0, out = 0.0;
    for_each_jump(p, k, q, v, [&](const Vec3& dv, double r) {
      sig += r;
      AxisStencil s[3];
      if (!loc.locate(v + dv, s)) {
        out += r;
        return;
      }
      for (int a = 0; a < P; ++a)
        for (int b = 0; b < P; ++b) {
          const double wab = pp * r * s[0].w[a] * s[1].w[b];
          const int base = g.index(s[0].start + a, s[1].start + b, s[2].start);
          for (int c = 0; c < P; ++c) col[base + c] += wab * s[2].w[c];
        }
      add_moments(&mom[size_t((s[0].cell * nc + s[1].cell) * nc + s[2].cell) * D3], s, D, pp * r);
    }, rot);
    add_moments(&mom[size_t((s0[0].cell * nc + s0[1].cell) * nc + s0[2].cell) * D3], s0, D, pp * sig);
    for (int a = 0; a < P; ++a)
      for (int b = 0; b < P; ++b)
        for (int c = 0; c < P; ++c) {
          const double e = s0[0].w[a] * s0[1].w[b] * s0[2].w[c];
          E(ip, (a * P + b) * P + c) = e;
          pcv[sidx[(a * P + b) * P + c]] += pp * out * e;
        }
    gam += pp * out;
    ++ip;
    if (last) {
      Eigen::MatrixXd C = A * E;
      for (int j = 0; j < P3; ++j) S.col(sidx[j]) += C.col(j);
    }
  });

  // S holds the cross terms T^T with T(j,:) = sum_p pi_p e_j(x_p) a_p; form -(T + T^T)/2
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < j; ++i) {
      const double t = -0.5 * (S(i, j) + S(j, i));
      S(i, j) = t;
      S(j, i) = t;
    }
    S(j, j) = -S(j, j);
  }

  // (1/2) sum over cells of pi r e e^T, rebuilt from the moments
  const int ntype = order == 1 ? 1 : 3;
  std::vector<std::vector<double>> pc(ntype);
  for (int t = 0; t < ntype; ++t) pc[t] = pair_coeffs(order, -t);
  const int PP = P * P;
  std::vector<double> X(size_t(D * D * PP)), Y(size_t(D * PP * PP)), Z(size_t(PP * PP * PP));
  std::vector<int> gidx(static_cast<size_t>(P3));
  for (int cx = 0; cx < nc; ++cx)
    for (int cy = 0; cy < nc; ++cy)
      for (int cz = 0; cz < nc; ++cz) {
        const double* m = &mom[size_t((cx * nc + cy) * nc + cz) * D3];
        bool any = false;
        for (int e = 0; e < D3 && !any; ++e) any = m[e] != 0.0;
        if (!any) continue;
        const int ox = stencil_offset(g, order, cx), oy = stencil_offset(g, order, cy),
                  oz = stencil_offset(g, order, cz);
        const double* C1 = pc[-ox].data();
        const double* C2 = pc[-oy].data();
        const double* C3 = pc[-oz].data();
        for (int a = 0; a < D; ++a)
          for (int b = 0; b < D; ++b)
            for (int u = 0; u < PP; ++u) {
              double acc = 0.0;
              for (int c = 0; c < D; ++c) acc += C3[u * D + c] * m[(a * D + b) * D + c];
              X[(a * D + b) * PP + u] = acc;
            }
        for (int a = 0; a < D; ++a)
          for (int u2 = 0; u2 < PP; ++u2)
            for (int u3 = 0; u3 < PP; ++u3) {
              double acc = 0.0;
              for (int b = 0; b < D; ++b) acc += C2[u2 * D + b] * X[(a * D + b) * PP + u3];
              Y[(a * PP + u2) * PP + u3] = acc;
            }
        for (int u1 = 0; u1 < PP; ++u1)
          for (int u2 = 0; u2 < PP; ++u2)
            for (int u3 = 0; u3 < PP; ++u3) {
              double acc = 0.0;
              for (int a = 0; a < D; ++a) acc += C1[u1 * D + a] * Y[(a * PP + u2) * PP + u3];
              Z[(u1 * PP + u2) * PP + u3] = acc;
            }
        for (int a1 = 0; a1 < P; ++a1)
          for (int a2 = 0; a2 < P; ++a2)
            for (int a3 = 0; a3 < P; ++a3)
              gidx[(a1 * P + a2) * P + a3] = g.index(cx + ox + a1, cy + oy + a2, cz + oz + a3);
        for (int a1 = 0; a1 < P; ++a1)
          for (int a2 = 0; a2 < P; ++a2)
            for (int a3 = 0; a3 < P; ++a3) {
              const int ga = gidx[(a1 * P + a2) * P + a3];
              for (int b1 = 0; b1 < P; ++b1)
                for (int b2 = 0; b2 < P; ++b2)
                  for (int b3 = 0; b3 < P; ++b3) {
                    const int gb = gidx[(b1 * P + b2) * P + b3];
                    S(ga, gb) += 0.5 * Z[((a1 * P + b1) * PP + (a2 * P + b2)) * PP + (a3 * P + b3)];
                  }
            }
      }

  // beyond the cube f/M is replaced by its mean, pn.g
  const Eigen::VectorXd pn = met.mass / met.mass.sum();
  op.out_rate = pcv.cwiseQuotient(met.mass);
  if (gam > 0.0)
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) S(i, j) += 0.5 * (gam * pn[i] * pn[j] - pn[i] * pcv[j] - pcv[i] * pn[j]);

  // K = C^{-1} S C^{-T}
  apply_axes(op.chol_inv, g.res, S.data(), N);
  S.transposeInPlace();
  apply_axes(op.chol_inv, g.res, S.data(), N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < j; ++i) {
      const double t = 0.5 * (S(i, j) + S(j, i));
      S(i, j) = t;
      S(j, i) = t;
    }

  op.kernel_dir = apply_axes(op.chol.transpose(), g.res, Eigen::VectorXd::Ones(N));
  op.kernel_residual = (op.K * op.kernel_dir).norm() / (op.K.diagonal().maxCoeff() * op.kernel_dir.norm());
  if (!(op.kernel_residual <= tolerance))
    throw NumericError("equilibrium_kernel",
                       "relative residual " + std::to_string(op.kernel_residual) + " exceeds tolerance");
  return op;
}

Eigen::VectorXd OperatorMatrix::to_sym(const Eigen::VectorXd& f) const {
  return apply_axes(chol.transpose(), grid.res, f.cwiseQuotient(M));
}

Eigen::VectorXd OperatorMatrix::from_sym(const Eigen::VectorXd& y) const {
  return apply_axes(chol_inv.transpose(), grid.res, y).cwiseProduct(M);
}

Eigen::VectorXd OperatorMatrix::apply(const Eigen::VectorXd& f) const { return -from_sym(K * to_sym(f)); }

double OperatorMatrix::inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  return to_sym(f).dot(to_sym(g));
}

double entropy_production(const OperatorMatrix& op, const Eigen::VectorXd& f) {
  Eigen::VectorXd y = op.to_sym(f);
  return y.dot(op.K * y);
}

double symmetric_entropy_production(const Params& p, const VelocityGrid& g, Kernel k, const Eigen::VectorXd& f,
                                    const QuadratureSpec& q) {
  const Eigen::VectorXd gv = f.cwiseQuotient(nodal_equilibrium(p, g));
  const Metric met = make_metric(p, g, q);
  const double mean = met.mass.dot(gv) / met.mass.sum();
  const int P = q.interp_order + 1;
  double total = 0.0;
  for_each_source(g, q.interp_order, q.src_gauss, q,
                  [&](const Vec3& x, double omega, const AxisStencil* s0, bool, bool, const Eigen::Matrix3d* rot) {
                    double g0 = 0.0;
                    for (int a = 0; a < P; ++a)
                      for (int b = 0; b < P; ++b)
                        for (int c = 0; c < P; ++c)
                          g0 += s0[0].w[a] * s0[1].w[b] * s0[2].w[c] *
                                gv[g.index(s0[0].start + a, s0[1].start + b, s0[2].start + c)];
                    const Vec3 v = g.center + x;
                    double acc = 0.0;
                    for_each_jump(p, k, q, v, [&](const Vec3& dv, double r) {
                      double gs;
                      if (!interpolate(g, q.interp_order, gv, v + dv, gs)) gs = mean;
                      acc += r * (gs - g0) * (gs - g0);
                    }, rot);
                    total += 0.5 * omega * equilibrium(p, v) * acc;
                  });
  return total;
}

double sigma_norm2(const OperatorMatrix& op, const Eigen::VectorXd& f) {
  double acc = 0.0;
  for (int i = 0; i < op.size(); ++i) acc += op.weights[i] * op.sigma[i] * f[i] * f[i] / op.M[i];
  return acc;
}

double gain_norm_estimate(const OperatorMatrix& op, int steps) {
  // y-coordinates: gain = -K + C^{-1} diag(m sigma) C^{-T}, m the lumped metric weights
  const Eigen::VectorXd ms = op.weights.cwiseProduct(op.M).cwiseProduct(op.sigma);
  const Eigen::MatrixXd cit = op.chol_inv.transpose();
  const MatVec A = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    Eigen::VectorXd t = apply_axes(cit, op.grid.res, x).cwiseProduct(ms);
    y = apply_axes(op.chol_inv, op.grid.res, t);
    y.noalias() -= op.K * x;
  };
  const std::vector<double> ritz = lanczos_ritz(A, op.size(), std::min(steps, op.size()));
  return std::max(std::abs(ritz.front()), std::abs(ritz.back()));
}

Eigen::VectorXd momentum_mode(const OperatorMatrix& op, int axis) {
  Eigen::VectorXd f(op.size());
  for (int i = 0; i < op.size(); ++i) f[i] = (op.grid.node(i) - op.params.u1)[axis] * op.M[i];
  return f;
}

Eigen::VectorXd energy_mode(const OperatorMatrix& op) {
  const double e0 = 3.0 * op.params.theta_sharp() / op.params.m;
  Eigen::VectorXd f(op.size());
  for (int i = 0; i < op.size(); ++i) f[i] = ((op.grid.node(i) - op.params.u1).squaredNorm() - e0) * op.M[i];
  return f;
}

OperatorCheck check_operator(const OperatorMatrix& op, unsigned seed) {
  OperatorCheck c;
  const int N = op.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto rnd = [&] {
    Eigen::VectorXd y(N);
    for (int i = 0; i < N; ++i) y[i] = nd(rng);
    return y;
  };
  for (int t = 0; t < 3; ++t) {
    Eigen::VectorXd yf = rnd(), yg = rnd();
    Eigen::VectorXd kf = op.K * yf, kg = op.K * yg;
    c.self_adjoint = std::max(c.self_adjoint, std::abs(kf.dot(yg) - kg.dot(yf)) / (yf.norm() * yg.norm()));
    c.negativity = std::max(c.negativity, -kf.dot(yf) / yf.squaredNorm());
    // integral of L f over v: -kernel_dir . K y
    const Eigen::VectorXd wl = op.kernel_dir.cwiseProduct(kf);
    c.mass = std::max(c.mass, std::abs(wl.sum()) / wl.cwiseAbs().sum());
  }
  c.equilibrium = op.kernel_residual;
  const double kap = op.params.kappa(), lam = op.params.mean_free_path;
  auto mode = [&](const Eigen::VectorXd& f, double expected, double& ray, double& res) {
    Eigen::VectorXd y = op.to_sym(f), ky = op.K * y;
    ray = y.dot(ky) / y.squaredNorm();
    const double target = expected > 0.0 ? expected : ray;
    res = (ky - target * y).norm() / (target * y.norm());
  };
  if (op.kernel == Kernel::maxwell) {
    c.momentum_expected = kap / lam;
    c.energy_expected = 2.0 * kap * (1.0 - kap) / lam;
  }
  mode(momentum_mode(op), c.momentum_expected, c.momentum_rayleigh, c.momentum_residual);
  mode(energy_mode(op), c.energy_expected, c.energy_rayleigh, c.energy_residual);
  c.min_sigma_ratio = 1e300;
  for (int i = 0; i < N; ++i) {
    const double r = op.sigma[i] / (1.0 + (op.grid.node(i) - op.params.u1).norm());
    c.min_sigma_ratio = std::min(c.min_sigma_ratio, r);
    c.max_sigma_ratio = std::max(c.max_sigma_ratio, r);
  }
  return c;
}

std::vector<Eigen::VectorXd> comparison_family(const Params& p, const VelocityGrid& g, int n_random, unsigned seed) {
  const int N = g.size();
  Eigen::VectorXd M = nodal_equilibrium(p, g);
  const double sm = std::sqrt(p.theta_sharp() / p.m);
  std::vector<Eigen::VectorXd> fam;
  Eigen::VectorXd f(N);
  for (int i = 0; i < N; ++i) f[i] = (g.node(i) - p.u1)[0] * M[i];
  fam.push_back(f);
  for (int i = 0; i < N; ++i) f[i] = ((g.node(i) - p.u1).squaredNorm() - 3.0 * sm * sm) * M[i];
  fam.push_back(f);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 2.0 * kPi);
  for (int r = 0; r < n_random; ++r) {
    if (r % 2 == 0) {
      // random cubic polynomial in the scaled velocity
      std::vector<std::array<int, 3>> pw;
      for (int a = 0; a <= 3; ++a)
        for (int b = 0; a + b <= 3; ++b)
          for (int c = 0; a + b + c <= 3; ++c) pw.push_back({a, b, c});
      std::vector<double> co(pw.size());
      for (double& x : co) x = nd(rng);
      for (int i = 0; i < N; ++i) {
        const Vec3 x = (g.node(i) - p.u1) / sm;
        double s = 0.0;
        for (size_t k = 0; k < pw.size(); ++k)
          s += co[k] * std::pow(x[0], pw[k][0]) * std::pow(x[1], pw[k][1]) * std::pow(x[2], pw[k][2]);
        f[i] = s * M[i];
      }
    } else {
      // sum of three low-frequency plane waves
      Vec3 kv[3];
      double amp[3], ph[3];
      for (int t = 0; t < 3; ++t) {
        kv[t] = 0.6 * Vec3(nd(rng), nd(rng), nd(rng));
        amp[t] = nd(rng);
        ph[t] = ud(rng);
      }
      for (int i = 0; i < N; ++i) {
        const Vec3 x = (g.node(i) - p.u1) / sm;
        double s = 0.0;
        for (int t = 0; t < 3; ++t) s += amp[t] * std::cos(kv[t].dot(x) + ph[t]);
        f[i] = s * M[i];
      }
    }
    fam.push_back(f);
  }
  return fam;
}

ComparisonReport verify_comparison(const OperatorMatrix& hs, const OperatorMatrix& mx,
                                   const std::vector<Eigen::VectorXd>& family, double threshold) {
  ComparisonReport r;
  r.threshold = threshold;
  r.min_ratio = 1e300;
  for (const auto& f : family) {
    const double dm = entropy_production(mx, f);
    if (dm < 1e-12) {
      r.ratios.push_back(std::nan(""));
      ++r.skipped;
      continue;
    }
    const double ratio = entropy_production(hs, f) / dm;
    r.ratios.push_back(ratio);
    r.min_ratio = std::min(r.min_ratio, ratio);
  }
  r.holds = r.min_ratio >= threshold;
  return r;
}

}  // namespace grankin
