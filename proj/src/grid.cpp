#include "grankin/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "grankin/errors.hpp"
#include "grankin/quadrature.hpp"

namespace grankin {

Vec3 VelocityGrid::node(int i) const {
  const int iz = i % res, iy = (i / res) % res, ix = i / (res * res);
  return center + Vec3(coord(ix), coord(iy), coord(iz));
}

double default_v_max(const Params& p) {
  return 6.0 * std::sqrt(std::max(p.theta1 / p.m1, p.theta_sharp() / p.m));
}

VelocityGrid make_grid(const Params& p, int res, double v_max) {
  if (res < 4) throw ConfigError("velocity resolution must be at least 4 points per axis");
  VelocityGrid g;
  g.res = res;
  g.v_max = v_max > 0.0 ? v_max : default_v_max(p);
  g.h = 2.0 * g.v_max / (res - 1);
  g.center = p.u1;
  std::vector<double> w1(res, g.h);
  w1.front() = w1.back() = 0.5 * g.h;
  g.weights.resize(g.size());
  for (int ix = 0; ix < res; ++ix)
    for (int iy = 0; iy < res; ++iy)
      for (int iz = 0; iz < res; ++iz) g.weights[g.index(ix, iy, iz)] = w1[ix] * w1[iy] * w1[iz];
  return g;
}

Eigen::VectorXd nodal_equilibrium(const Params& p, const VelocityGrid& g) {
  Eigen::VectorXd m(g.size());
  for (int i = 0; i < g.size(); ++i) m[i] = equilibrium(p, g.node(i));
  return m;
}

Eigen::MatrixXd equilibrium_mass_1d(const Params& p, const VelocityGrid& g, int order, int ng) {
  const double sd = std::sqrt(p.theta_sharp() / p.m);
  const int n = order + 1;
  const Rule gl = gauss_legendre(ng, 0.0, 1.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(g.res, g.res);
  double w[4];
  for (int c = 0; c + 1 < g.res; ++c) {
    const int off = stencil_offset(g, order, c);
    for (int q = 0; q < ng; ++q) {
      const double z = (g.coord(c) + gl.x[q] * g.h) / sd;
      const double wq = g.h * gl.w[q] * std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
      lagrange_weights(order, off, gl.x[q], w);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) m(c + off + a, c + off + b) += wq * w[a] * w[b];
    }
  }
  return m;
}

Eigen::VectorXd basis_integrals_1d(const VelocityGrid& g, int order, int ng, const std::function<double(double)>& fn) {
  const Rule gl = gauss_legendre(ng, 0.0, 1.0);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(g.res);
  double w[4];
  for (int c = 0; c + 1 < g.res; ++c) {
    const int off = stencil_offset(g, order, c);
    for (int q = 0; q < ng; ++q) {
      const double wq = g.h * gl.w[q] * fn(g.coord(c) + gl.x[q] * g.h);
      lagrange_weights(order, off, gl.x[q], w);
      for (int a = 0; a <= order; ++a) m[c + off + a] += wq * w[a];
    }
  }
  return m;
}

Eigen::MatrixXd equilibrium_moments_1d(const Params& p, const VelocityGrid& g, int order, int ng) {
  const double sd = std::sqrt(p.theta_sharp() / p.m);
  Eigen::MatrixXd m(g.res, 3);
  for (int k = 0; k < 3; ++k)
    m.col(k) = basis_integrals_1d(g, order, ng, [&](double x) {
      const double z = x / sd;
      return std::pow(x, k) * std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
    });
  return m;
}

void apply_axes(const Eigen::MatrixXd& A, int res, double* data, Eigen::Index ncols) {
  using Mat = Eigen::Map<Eigen::MatrixXd>;
  const Eigen::Index r = res, N = r * r * r;
  const Eigen::MatrixXd At = A.transpose();
  Eigen::MatrixXd tmp(r, r), t(r * r, r);
  // z: contiguous runs of length r
  {
    Mat x(data, r, r * r * ncols);
    const Eigen::Index chunk = r * r * 64;
    for (Eigen::Index c0 = 0; c0 < x.cols(); c0 += chunk) {
      const Eigen::Index nc = std::min(chunk, x.cols() - c0);
      x.middleCols(c0, nc) = (A * x.middleCols(c0, nc)).eval();
    }
  }
  for (Eigen::Index col = 0; col < ncols; ++col) {
    double* v = data + col * N;
    // y: r x r slabs (z rows, y columns) for each x
    for (Eigen::Index ix = 0; ix < r; ++ix) {
      Mat s(v + ix * r * r, r, r);
      tmp.noalias() = s * At;
      s = tmp;
    }
    // x: (r^2) x r with x as the column index
    Mat s(v, r * r, r);
    t.noalias() = s * At;
    s = t;
  }
}

void lagrange_weights(int order, int offset, double theta, double* w) {
  const int n = order + 1;
  for (int a = 0; a < n; ++a) {
    double num = 1.0, den = 1.0;
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      num *= theta - (offset + b);
      den *= double(a - b);
    }
    w[a] = num / den;
  }
}

bool axis_stencil(const VelocityGrid& g, int order, double x, AxisStencil& out) {
  const double t = (x + g.v_max) / g.h;
  if (!(t >= 0.0 && t <= g.res - 1)) return false;
  int cell = int(std::floor(t));
  if (cell > g.res - 2) cell = g.res - 2;
  out.cell = cell;
  out.theta = t - cell;
  const int off = stencil_offset(g, order, cell);
  out.start = cell + off;
  lagrange_weights(order, off, out.theta, out.w.data());
  return true;
}

bool interpolate(const VelocityGrid& g, int order, const Eigen::VectorXd& values, const Vec3& v, double& out) {
  AxisStencil s[3];
  const Vec3 x = v - g.center;
  for (int d = 0; d < 3; ++d)
    if (!axis_stencil(g, order, x[d], s[d])) return false;
  const int n = order + 1;
  double acc = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double wab = s[0].w[a] * s[1].w[b];
      for (int c = 0; c < n; ++c)
        acc += wab * s[2].w[c] * values[g.index(s[0].start + a, s[1].start + b, s[2].start + c)];
    }
  out = acc;
  return true;
}

}  // namespace grankin
