#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "grankin/collision.hpp"
#include "grankin/model.hpp"

namespace grankin {

enum class Initial { equilibrium, shifted, heated };
Initial parse_initial(const std::string& s);

// unit-mass initial data: M shifted by `shift` sqrt(theta#/m) along v1, or a
// Maxwellian at temperature `heat` theta# (both centred as M otherwise)
struct InitialSpec {
  Initial kind = Initial::shifted;
  double shift = 0.5;
  double heat = 1.5;
};

struct RelaxationTrace {
  Kernel kernel = Kernel::maxwell;
  std::string method;
  std::vector<double> t;
  std::vector<Vec3> momentum;        // <v - u1>
  std::vector<double> energy;        // <|v - u1|^2>
  std::vector<double> l2dist;        // ||f - M|| in L^2(M^{-1}); NaN for particles
  std::vector<double> dissipation;   // D(f), Galerkin only
  std::vector<Vec3> momentum_se;     // Monte Carlo standard errors, particles only
  std::vector<double> energy_se;
  std::size_t size() const { return t.size(); }
};

// --- Galerkin ---

// largest admissible RK4 step: 0.1/max sigma (hard spheres), 0.1 (maxwell),
// both scaled by the mean free path
double galerkin_dt_max(const OperatorMatrix& op);
Eigen::VectorXd initial_grid(const OperatorMatrix& op, const InitialSpec& init);

// f' ~ exp(dt L) f by RK4 substeps no longer than galerkin_dt_max.
// Throws NumericError on mass drift (> 1e-12 per step) or norm growth.
Eigen::VectorXd step_galerkin(const OperatorMatrix& op, const Eigen::VectorXd& f, double dt);

// samples >= 64, uniform in t
RelaxationTrace relax_galerkin(const OperatorMatrix& op, const Eigen::VectorXd& f0, double t_end, int samples = 64);

// --- particles ---

struct ParticleEnsemble {
  std::vector<Vec3> v;
  std::uint64_t rng_seed = 0;
  double time = 0.0;
  std::uint64_t steps = 0;  // selects the per-step counter block of every particle stream
  std::size_t size() const { return v.size(); }
};

ParticleEnsemble make_ensemble(const Params& p, std::size_t n, std::uint64_t seed, const InitialSpec& init);

// Exact jump process over [time, time + dt]: exponential clocks with the
// majorant (|v - u1| + E|w - u1|)/lambda and thinning for hard spheres,
// rate 1/lambda for maxwell. Deterministic for a given seed and any thread count.
void step_particles(const Params& p, ParticleEnsemble& ens, Kernel k, double dt, int threads = 1);

struct EnsembleMoments {
  Vec3 momentum = Vec3::Zero(), momentum_se = Vec3::Zero();
  double energy = 0.0, energy_se = 0.0;
};
EnsembleMoments ensemble_moments(const Params& p, const ParticleEnsemble& ens);

RelaxationTrace relax_particles(const Params& p, Kernel k, ParticleEnsemble& ens, double t_end, int samples = 64,
                                int threads = 1);

// --- rates ---

// least-squares slope of log y against t over the samples with
// y in [lo, hi] y(0); positive rate, throws NumericError if not decaying
double fit_rate(const std::vector<double>& t, const std::vector<double>& y, double lo = 1e-6, double hi = 0.5);
// same over a time window, without the amplitude filter (y must stay positive)
double fit_rate_window(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1);
// field: l2dist, px, py, pz, momentum (|<v-u1>|), energy (|energy - 3 theta#/m|)
std::vector<double> trace_field(const RelaxationTrace& tr, const Params& p, const std::string& field);
double fit_rate(const RelaxationTrace& tr, const Params& p, const std::string& field);

// largest relative mismatch between d/dt ||f - M||^2 (fourth-order central
// differences of l2dist^2) and -2 D(f) over interior samples where D is above
// `floor` times its initial value
double dissipation_identity_error(const RelaxationTrace& tr, double floor = 1e-6);

}  // namespace grankin
