#pragma once
#include <string>
#include <vector>

#include <Eigen/Core>

#include "grankin/collision.hpp"
#include "grankin/model.hpp"

namespace grankin {

// theta#/(m lambda_{0,1}), lambda_{0,1} = kappa/mean_free_path
double diffusivity_maxwell(const Params& p);

struct CellSolution {
  Eigen::VectorXd chi1;  // nodal values
  double residual = 0.0;  // |L chi1 - v1 M| / |v1 M| in L^2(M^{-1})
  double mean = 0.0;      // int chi1 dv
  int iterations = 0;
  bool converged = false;
};

// L chi1 = v1 M on the mass-orthogonal complement (projected CG); needs u1 = 0.
// x0, if given, is a starting guess for chi1. Throws NumericError on stagnation.
CellSolution solve_cell_problem(const OperatorMatrix& op, double rtol = 1e-10, const Eigen::VectorXd* x0 = nullptr);

// max |chi(v1,v2,v3) + chi(-v1,v2,v3)| / max |chi|
double odd_symmetry_defect(const VelocityGrid& g, const Eigen::VectorXd& chi);

struct DiffusivityReport {
  Kernel kernel = Kernel::maxwell;
  double d_value = 0.0;  // -int v1 chi1 dv
  double d_lower = 0.0;  // theta#/(c_hs m)
  double d_upper = 0.0;  // theta#/(lambda_{0,1} C* m)
  double c_hs = 0.0;     // -<L(v1 M), v1 M>/|v1 M|^2
  double c_star = 0.0;
  double chi_norm2 = 0.0;  // |chi1|^2 in L^2(M^{-1})
  double cell_residual = 0.0, cell_mean = 0.0, odd_defect = 0.0;
  int cg_iterations = 0;
  bool bounds_hold = false;  // with 1% slack
};

DiffusivityReport diffusivity_report(const OperatorMatrix& op, const CellSolution& cell);
// solves the cell problem on op (hard-sphere or, as a self-test, maxwell matrix)
DiffusivityReport diffusivity_hs(const OperatorMatrix& op);
// d_upper with C* at its floor eta/sqrt 5, written with tau
double d_upper_closed_form(const Params& p);

// --- 1D torus [0,1) x 3D velocity ---

struct DensityField {
  double t = 0.0;
  double dx = 0.0;
  std::vector<double> rho, j;  // cell averages; j = (1/eps) int f v1 dv
};

// cell averages of 1 + a cos(2 pi x) on nx cells
std::vector<double> cosine_profile(int nx, double a = 0.5);
// exact Fourier evolution of cell averages under rho_t = d rho_xx
DensityField heat_reference(double d, const std::vector<double>& rho0, double t);
double l2_distance(const DensityField& a, const DensityField& b);

struct RescaledOptions {
  int samples = 11;
  bool second_order = true;  // MUSCL with minmod; false is first-order upwind
  double cfl = 0.4;          // dt = cfl eps dx / v_max
  int threads = 1;
};

struct RescaledRun {
  double eps = 0.0, dt = 0.0;
  long steps = 0;
  bool first_order = false;
  std::vector<DensityField> samples;
  double mass_drift = 0.0;            // max |mass(t) - mass(0)| / mass(0)
  double continuity_residual = 0.0;   // |drho/dt + dj/dx| / |dj/dx|, centred differences
  double fick_error = 0.0;            // |j + D rho_x| / |D rho_x| in L^2 over x and the samples t > 0
  double h_max = 0.0;                 // max over samples of |(f - rho M)/eps| in L^2(dx; L^2(M^{-1}))
};

// eps f_t + v1 f_x = (1/eps) L f, f0 = rho0(x) M(v); Strang splitting
// (half transport, implicit collision, half transport).
// d_fick is only used for the Fick diagnostic.
RescaledRun solve_rescaled(const OperatorMatrix& op, double eps, const std::vector<double>& rho0, double t_end,
                           double d_fick, const RescaledOptions& opt = {});

struct HydroRow {
  double eps = 0.0, error = 0.0, order = 0.0;  // order: log2(E(2 eps)/E(eps)), NaN when unavailable
  double mass_drift = 0.0, continuity_residual = 0.0, fick_error = 0.0, h_max = 0.0;
  long steps = 0;
  bool first_order = false;
};

struct HydroReport {
  Kernel kernel = Kernel::maxwell;
  double d = 0.0;  // diffusivity of the reference heat equation
  int nx = 0;
  double t_end = 0.0;
  std::vector<HydroRow> rows;
  bool decreasing = false;
};

// d: reference diffusivity (analytic for maxwell, cell-problem value for hard spheres)
HydroReport hydrolimit_report(const OperatorMatrix& op, const std::vector<double>& eps_list, double d, int nx,
                              double t_end, const RescaledOptions& opt = {});

}  // namespace grankin
