#pragma once
#include <map>
#include <optional>
#include <string>

#include "grankin/model.hpp"

namespace grankin {

// inverse of erf on (-1,1); Newton polish to 1e-12 round trip
double erfinv(double p);
// inverse of erfc on (0,2)
double erfcinv(double q);

// a = m1/(2 theta1)
inline double gauss_a(const Params& p) { return p.m1 / (2.0 * p.theta1); }
// eta = sqrt(2 theta1/m1) erfinv(1/2)
double eta(const Params& p);

// nonnegative solution of sqrt(a(z^2+xi^2)) = erfinv(1/2 + erf(sqrt(a) xi)/2)
double z_of_xi(const Params& p, double xi);
// z z' = sqrt(z^2+xi^2) exp(a z^2)/2 - xi
double z_times_dz(const Params& p, double xi);
// |sqrt(a(z^2+xi^2)) - erfinv(...)| at xi
double z_identity_residual(const Params& p, double xi);

struct Rho1Result {
  double rho1 = 0.0;
  double argmin = 0.0;  // xi where z attains its minimum on [0, rho0/2kappa]
};
Rho1Result rho1_search(const Params& p, double rho0);
double rho1(const Params& p, double rho0);
// sqrt(eta^2 - rho0^2/(4 kappa^2))
double rho1_floor(const Params& p, double rho0);

struct CStar {
  double value = 0.0;       // best min(rho0/2kappa, rho1/2) over the rho0 grid
  double rho0_best = 0.0;
  double reference_choice = 0.0;  // same quantity at rho0 = 2 kappa eta / sqrt 5
};
CStar c_star_search(const Params& p);
double c_star_lower(const Params& p);

// sqrt(5)/(erfinv(1/2) sqrt 2)
double tau_numeric();

struct ConstantsReport {
  double eta = 0, rho0_opt = 0, rho1_at_opt = 0, rho1_lower = 0;
  double c_star_reference = 0, c_star_lower = 0, rho0_best = 0, eta_over_sqrt5 = 0;
  double mu_max = 0, mu_hs_lower = 0;
  double erfinv_half = 0;
  std::optional<double> k_norm;  // bound when kappa < 1/2, else measured if supplied
  std::optional<double> c_sigma_lower;
  double tau_numeric = 0;
  std::map<std::string, std::string> provenance;
};

// measured_k_norm is used only when the analytic bound is unavailable (kappa >= 1/2)
ConstantsReport constants_report(const Params& p, std::optional<double> measured_k_norm = {});
std::string report_to_json(const ConstantsReport& r);

}  // namespace grankin
