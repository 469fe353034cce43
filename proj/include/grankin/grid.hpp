#pragma once
#include <algorithm>
#include <array>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "grankin/model.hpp"

namespace grankin {

// vertex-centred uniform cube [-v_max, v_max]^3 shifted to `center`,
// trapezoid weights
struct VelocityGrid {
  int res = 0;
  double v_max = 0.0, h = 0.0;
  // cubic stencils of cells whose centre lies further than this from the
  // grid centre (per axis) lean towards the centre
  double bias_radius = 0.0;
  Vec3 center = Vec3::Zero();
  std::vector<double> weights;

  int size() const { return res * res * res; }
  int index(int ix, int iy, int iz) const { return (ix * res + iy) * res + iz; }
  double coord(int k) const { return -v_max + h * k; }
  Vec3 node(int i) const;
};

// v_max defaults to 6 sqrt(max(theta1/m1, theta#/m))
double default_v_max(const Params& p);
VelocityGrid make_grid(const Params& p, int res, double v_max = 0.0);

// equilibrium M at the nodes
Eigen::VectorXd nodal_equilibrium(const Params& p, const VelocityGrid& g);

// 1D equilibrium mass matrix: integral of M1d(x) phi_a(x) phi_b(x) with
// ng Gauss points per cell, M1d the normalized 1D equilibrium profile.
// The 3D matrix is its Kronecker cube.
Eigen::MatrixXd equilibrium_mass_1d(const Params& p, const VelocityGrid& g, int order, int ng);

// int fn(x) phi_i(x) dx over the axis, x relative to the grid centre, ng
// Gauss points per cell
Eigen::VectorXd basis_integrals_1d(const VelocityGrid& g, int order, int ng, const std::function<double(double)>& fn);
// the same with fn = M1d(x) x^k for k = 0, 1, 2 (columns)
Eigen::MatrixXd equilibrium_moments_1d(const Params& p, const VelocityGrid& g, int order, int ng);

// x <- (A x A x A) x for every column of a res^3 x ncols column-major array
void apply_axes(const Eigen::MatrixXd& A, int res, double* data, Eigen::Index ncols);
inline Eigen::VectorXd apply_axes(const Eigen::MatrixXd& A, int res, Eigen::VectorXd x) {
  apply_axes(A, res, x.data(), 1);
  return x;
}

// Lagrange interpolation stencil along one axis.
// order 1: two nodes (linear); order 3: four nodes (cubic), centred on the
// cell, or beyond bias_radius shifted so no stencil node sits further out
// in the tail than the cell itself
struct AxisStencil {
  int cell = 0;     // left node of the containing cell
  int start = 0;    // first stencil node
  double theta = 0; // position inside the cell, [0,1]
  std::array<double, 4> w{};
};

// false if x lies outside the cube along this axis
bool axis_stencil(const VelocityGrid& g, int order, double x, AxisStencil& out);
// Lagrange basis values at theta for stencil nodes placed at offset, offset+1, ...
void lagrange_weights(int order, int offset, double theta, double* w);
inline int stencil_offset(const VelocityGrid& g, int order, int cell) {
  if (order == 1) return 0;
  const double mid = g.coord(cell) + 0.5 * g.h;
  int s = cell - 1;
  const double tol = 1e-9 * g.h;
  if (mid > g.bias_radius + tol) s = cell - 2;
  else if (mid < -g.bias_radius - tol) s = cell;
  return std::clamp(s, 0, g.res - 4) - cell;
}

// interpolate nodal values at v; returns false outside the cube
bool interpolate(const VelocityGrid& g, int order, const Eigen::VectorXd& values, const Vec3& v, double& out);

}  // namespace grankin
