#include "grankin/constants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <nlohmann/json.hpp>

#include "grankin/errors.hpp"
#include "grankin/spectral.hpp"

namespace grankin {

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

// Giles' single-precision approximation, used as the Newton start
double erfinv_guess(double x) {
  double w = -std::log((1.0 - x) * (1.0 + x)), p;
  if (w < 5.0) {
    w -= 2.5;
    p = 2.81022636e-08;
    p = 3.43273939e-07 + p * w;
    p = -3.5233877e-06 + p * w;
    p = -4.39150654e-06 + p * w;
    p = 0.00021858087 + p * w;
    p = -0.00125372503 + p * w;
    p = -0.00417768164 + p * w;
    p = 0.246640727 + p * w;
    p = 1.50140941 + p * w;
  } else {
    w = std::sqrt(w) - 3.0;
    p = -0.000200214257;
    p = 0.000100950558 + p * w;
    p = 0.00134934322 + p * w;
    p = -0.00367342844 + p * w;
    p = 0.00573950773 + p * w;
    p = -0.0076224613 + p * w;
    p = 0.00943887047 + p * w;
    p = 1.00167406 + p * w;
    p = 2.83297682 + p * w;
  }
  return p * x;
}

}  // namespace

double erfinv(double p) {
  if (!(p > -1.0 && p < 1.0)) throw std::domain_error("erfinv argument must lie in (-1,1)");
  if (p == 0.0) return 0.0;
  if (std::abs(p) > 0.5) return p > 0 ? erfcinv(1.0 - p) : -erfcinv(1.0 + p);
  double x = erfinv_guess(p);
  for (int it = 0; it < 50; ++it) {
    const double dx = (std::erf(x) - p) / (2.0 / kSqrtPi * std::exp(-x * x));
    x -= dx;
    if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

double erfcinv(double q) {
  if (!(q > 0.0 && q < 2.0)) throw std::domain_error("erfcinv argument must lie in (0,2)");
  if (q > 1.0) return -erfcinv(2.0 - q);
  double x = q > 1e-6 ? erfinv_guess(1.0 - q) : std::sqrt(-std::log(q));
  // Newton on log erfc keeps relative accuracy deep in the tail
  for (int it = 0; it < 100; ++it) {
    const double ec = std::erfc(x);
    const double dx = (std::log(ec) - std::log(q)) / (-2.0 / kSqrtPi * std::exp(-x * x) / ec);
    x -= dx;
    if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

double eta(const Params& p) { return std::sqrt(2.0 * p.theta1 / p.m1) * erfinv(0.5); }

namespace {
// erfinv(1/2 + erf(s)/2) for s >= 0, via erfc to keep the tail
double z_rhs(double s) {
  if (s <= 0.0) return erfinv(0.5);
  return erfcinv(0.5 * std::erfc(s));
}
}  // namespace

double z_of_xi(const Params& p, double xi) {
  if (xi < 0.0) throw std::domain_error("z(xi) needs xi >= 0");
  const double a = gauss_a(p);
  const double y = z_rhs(std::sqrt(a) * xi);
  const double r = y * y / a - xi * xi;
  if (r < -1e-12)
    throw NumericError("z_radicand", "negative radicand " + std::to_string(r) + " at xi=" + std::to_string(xi));
  return std::sqrt(std::max(r, 0.0));
}

double z_times_dz(const Params& p, double xi) {
  const double a = gauss_a(p), z = z_of_xi(p, xi);
  return 0.5 * std::sqrt(z * z + xi * xi) * std::exp(a * z * z) - xi;
}

double z_identity_residual(const Params& p, double xi) {
  const double a = gauss_a(p), z = z_of_xi(p, xi);
  return std::abs(std::sqrt(a * (z * z + xi * xi)) - z_rhs(std::sqrt(a) * xi));
}

Rho1Result rho1_search(const Params& p, double rho0) {
  const double k = p.kappa(), et = eta(p);
  if (!(rho0 > 0.0 && rho0 < 2.0 * k * et))
    throw std::domain_error("rho0 must lie in (0, 2 kappa eta)");
  const double hi = rho0 / (2.0 * k);
  const int n = 400;
  int best = 0;
  double zbest = z_of_xi(p, 0.0);
  for (int i = 1; i <= n; ++i) {
    const double z = z_of_xi(p, hi * i / n);
    if (z < zbest) zbest = z, best = i;
  }
  // golden section inside the bracketing cell pair
  double a = hi * std::max(best - 1, 0) / n, b = hi * std::min(best + 1, n) / n;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = z_of_xi(p, c), fd = z_of_xi(p, d);
  while (b - a > 1e-10) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a);
      fc = z_of_xi(p, c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a);
      fd = z_of_xi(p, d);
    }
  }
  Rho1Result r{zbest, hi * best / n};
  const double xm = 0.5 * (a + b), zm = z_of_xi(p, xm);
  if (zm < r.rho1) r = {zm, xm};
  return r;
}

double rho1(const Params& p, double rho0) { return rho1_search(p, rho0).rho1; }

double rho1_floor(const Params& p, double rho0) {
  const double et = eta(p), k = p.kappa();
  return std::sqrt(std::max(et * et - rho0 * rho0 / (4.0 * k * k), 0.0));
}

CStar c_star_search(const Params& p) {
  const double k = p.kappa(), et = eta(p);
  const double top = 2.0 * k * et;
  auto value = [&](double r0) { return std::min(r0 / (2.0 * k), 0.5 * rho1(p, r0)); };
  CStar c;
  const double reference = top / std::sqrt(5.0);
  c.reference_choice = value(reference);
  c.value = c.reference_choice;
  c.rho0_best = reference;
  // 33 log-spaced points in (0, top): top * 10^{-3 + 3 i/33}, i = 0..32
  for (int i = 0; i < 33; ++i) {
    const double r0 = top * std::pow(10.0, -3.0 + 3.0 * i / 33.0);
    const double v = value(r0);
    if (v > c.value) c.value = v, c.rho0_best = r0;
  }
  return c;
}

double c_star_lower(const Params& p) { return c_star_search(p).value; }

double tau_numeric() { return std::sqrt(5.0) / (erfinv(0.5) * std::sqrt(2.0)); }

ConstantsReport constants_report(const Params& p, std::optional<double> measured_k_norm) {
  validate(p);
  ConstantsReport r;
  const double k = p.kappa(), lam = p.mean_free_path;
  r.eta = eta(p);
  r.eta_over_sqrt5 = r.eta / std::sqrt(5.0);
  r.rho0_opt = 2.0 * k * r.eta / std::sqrt(5.0);
  r.rho1_at_opt = rho1(p, r.rho0_opt);
  r.rho1_lower = rho1_floor(p, r.rho0_opt);
  const CStar cs = c_star_search(p);
  r.c_star_reference = cs.reference_choice;
  r.c_star_lower = cs.value;
  r.rho0_best = cs.rho0_best;
  r.mu_max = spectral_gap_maxwell(k) / lam;
  r.mu_hs_lower = r.c_star_lower * r.mu_max;
  r.tau_numeric = tau_numeric();
  r.erfinv_half = erfinv(0.5);
  for (const char* f : {"eta", "eta_over_sqrt5", "rho0_opt", "rho1_at_opt", "rho1_lower", "c_star_reference",
                        "c_star_lower", "rho0_best", "mu_max", "mu_hs_lower", "tau_numeric", "erfinv_half"})
    r.provenance[f] = "analytic-bound";
  if (k < 0.5) {
    const double tau = (1.0 - 2.0 * k) / k;
    r.k_norm = 2.0 * std::numbers::pi / ((1.0 + tau) * (1.0 + tau)) *
               std::sqrt(std::numbers::pi * p.theta1 / p.m1) / lam;
    r.provenance["k_norm"] = "analytic-bound";
  } else if (measured_k_norm) {
    r.k_norm = *measured_k_norm;
    r.provenance["k_norm"] = "measured";
  }
  if (r.k_norm) {
    const double cm = r.c_star_lower * r.mu_max;
    r.c_sigma_lower = cm / (*r.k_norm + cm);
    r.provenance["c_sigma_lower"] = r.provenance["k_norm"];
  }
  return r;
}

std::string report_to_json(const ConstantsReport& r) {
  nlohmann::ordered_json j;
  auto put = [&](const std::string& name, std::optional<double> v) {
    if (v)
      j[name] = {{"value", *v}, {"provenance", r.provenance.at(name)}};
    else
      j[name] = {{"value", nullptr}, {"provenance", "absent"}};
  };
  put("erfinv_half", r.erfinv_half);
  put("eta", r.eta);
  put("eta_over_sqrt5", r.eta_over_sqrt5);
  put("rho0_opt", r.rho0_opt);
  put("rho1_at_opt", r.rho1_at_opt);
  put("rho1_lower", r.rho1_lower);
  put("c_star_reference", r.c_star_reference);
  put("c_star_lower", r.c_star_lower);
  put("rho0_best", r.rho0_best);
  put("mu_max", r.mu_max);
  put("mu_hs_lower", r.mu_hs_lower);
  put("k_norm", r.k_norm);
  put("c_sigma_lower", r.c_sigma_lower);
  put("tau_numeric", r.tau_numeric);
  return j.dump(2);
}

}  // namespace grankin
