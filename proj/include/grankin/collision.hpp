#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "grankin/grid.hpp"
#include "grankin/model.hpp"

namespace grankin {

enum class Kernel { maxwell, hard_sphere };
Kernel parse_kernel(const std::string& s);
const char* kernel_name(Kernel k);

// (v*, w*) for relative velocity q = v - w and unit normal n
std::pair<Vec3, Vec3> post_collision(const Params& p, const Vec3& v, const Vec3& w, const Vec3& n);

// maxwell: 1/lambda; hard spheres: E|v-w|/lambda under M1, closed form
double collision_frequency(const Params& p, Kernel k, const Vec3& v);

// inf and sup of sigma_hs(v)/(1+|v-u1|) over |v-u1| in [0, r_max]
struct NuBounds {
  double nu0 = 0.0, nu1 = 0.0;
};
NuBounds nu_bounds(const Params& p, double r_max);

struct QuadratureSpec {
  int interp_order = 3;  // 1 trilinear, 3 tricubic
  int src_gauss = 2;     // Gauss points per axis and cell: source velocities and the metric
  // collision normal: hemisphere cos(theta) x phi product rule; s = (v-w).n:
  // Gauss nodes on each side of s = 0
  int dir_cos = 6, dir_phi = 16, line_s = 16;
  // each source velocity uses its own randomly rotated copy of the rules
  // above (decorrelates the jump lattice from the velocity grid)
  bool rotate = true;
  std::uint64_t rotation_seed = 20240611;
};

// maxwell rate factor: E 1/sqrt(t^2 + |z - a e|^2) over a standard normal
// z in the plane, e a unit vector (tabulated)
double maxwell_perp_factor(double t, double a);

// Every post-collisional jump v -> v + dv emanating from v with rate r
// (rates include the 1/mean_free_path factor; they sum to the discrete
// collision frequency at v).
// rot, if given, rotates the direction and partner-velocity rules.
void for_each_jump(const Params& p, Kernel k, const QuadratureSpec& q, const Vec3& v,
                   const std::function<void(const Vec3& dv, double rate)>& fn,
                   const Eigen::Matrix3d* rot = nullptr);

// Discretized linear operator. f at the nodes is represented by the
// piecewise-polynomial interpolant of g = f/M; the metric is the Gram
// matrix G = C C^T of <g, h> = int M g h dv (Kronecker cube of a 1D
// matrix, C = chol x chol x chol). The dense matrix K is symmetric positive
// semidefinite with D(f) = y^T K y, y = C^T g, and the collision operator
// acts by L f = -M C^{-T} K y.
struct OperatorMatrix {
  Kernel kernel = Kernel::maxwell;
  Params params;
  VelocityGrid grid;
  QuadratureSpec quad;
  Eigen::MatrixXd K;
  Eigen::MatrixXd chol, chol_inv;  // 1D Cholesky factor of the metric and its inverse
  Eigen::VectorXd M;               // equilibrium at nodes
  Eigen::VectorXd weights;         // integrals of f are weights.dot(f)
  Eigen::VectorXd kernel_dir;      // y of the equilibrium
  Eigen::VectorXd sigma;           // collision frequency at the nodes
  Eigen::VectorXd out_rate;        // rate of jumps leaving the cube, per node
  double kernel_residual = 0.0;

  int size() const { return grid.size(); }
  Eigen::VectorXd to_sym(const Eigen::VectorXd& f) const;
  Eigen::VectorXd from_sym(const Eigen::VectorXd& y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;  // L f
  // <f, g> in L^2(M^{-1})
  double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;
};

// tolerance: relative equilibrium-kernel residual that must be met
OperatorMatrix assemble_operator(const Params& p, const VelocityGrid& g, Kernel k,
                                 const QuadratureSpec& q = {}, double tolerance = 1e-6);

// -<L f, f> from the matrix
double entropy_production(const OperatorMatrix& op, const Eigen::VectorXd& f);
// the symmetric form summed jump by jump, without the matrix
double symmetric_entropy_production(const Params& p, const VelocityGrid& g, Kernel k, const Eigen::VectorXd& f,
                                    const QuadratureSpec& q = {});

struct OperatorCheck {
  double self_adjoint = 0, negativity = 0, mass = 0, equilibrium = 0;
  double momentum_rayleigh = 0, energy_rayleigh = 0;  // -<Lf,f>/<f,f>
  double momentum_residual = 0, energy_residual = 0;  // |Lf + lam f| / |lam f|
  double momentum_expected = 0, energy_expected = 0;  // maxwell only
  double min_sigma_ratio = 0, max_sigma_ratio = 0;    // sigma/(1+|v-u1|) on the grid
};
OperatorCheck check_operator(const OperatorMatrix& op, unsigned seed = 1);

// ||f sqrt(sigma)||^2 in L^2(M^{-1}), lumped at the nodes
double sigma_norm2(const OperatorMatrix& op, const Eigen::VectorXd& f);

// 2-norm of the gain part L + sigma in L^2(M^{-1}), Lanczos estimate with
// the loss term lumped at the nodes
double gain_norm_estimate(const OperatorMatrix& op, int steps = 60);

// grid functions
Eigen::VectorXd momentum_mode(const OperatorMatrix& op, int axis = 0);
Eigen::VectorXd energy_mode(const OperatorMatrix& op);

// momentum, energy and `n_random` smooth random perturbations M p(v)
std::vector<Eigen::VectorXd> comparison_family(const Params& p, const VelocityGrid& g, int n_random, unsigned seed);

struct ComparisonReport {
  std::vector<double> ratios;  // D_hs/D_max, NaN when skipped
  double min_ratio = 0.0;
  int skipped = 0;
  double threshold = 0.0;
  bool holds = false;
};
ComparisonReport verify_comparison(const OperatorMatrix& hs, const OperatorMatrix& mx,
                                   const std::vector<Eigen::VectorXd>& family, double threshold);

}  // namespace grankin
