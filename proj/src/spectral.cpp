#include "grankin/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "grankin/errors.hpp"
#include "grankin/quadrature.hpp"

namespace grankin {

namespace {

constexpr double kTol = 1e-12;
constexpr double kKappaMin = 1e-4;

double gl64(const std::function<double(double)>& f, double a, double b) {
  const Rule& r = gauss_legendre(64);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + h * r.x[i]);
  return h * s;
}

double adaptive(const std::function<double(double)>& f, double a, double b, double whole,
                double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = gl64(f, a, m), right = gl64(f, m, b);
  if (std::abs(left + right - whole) <= tol) return left + right;
  if (depth >= 30) throw NumericError("eigenvalue_quadrature", "adaptive Gauss-Legendre did not converge");
  return adaptive(f, a, m, left, 0.5 * tol, depth + 1) + adaptive(f, m, b, right, 0.5 * tol, depth + 1);
}

}  // namespace

double eigenvalue(double kappa, int n, int l) {
  if (n < 0 || l < 0) throw std::invalid_argument("eigenvalue indices must be nonnegative");
  if (!(kappa >= kKappaMin && kappa <= 1.0 - kKappaMin))
    throw NumericError("eigenvalue_quadrature",
                       "kappa=" + std::to_string(kappa) + " too close to 0 or 1 for a reliable integral");
  const double nu = 1.0 - 2.0 * kappa;
  const double lo = std::abs(nu);
  const int k = 2 * n + l;
  auto f = [&](double s) {
    double x = (nu + s * s) / ((2.0 - 2.0 * kappa) * s);
    if (x > 1.0 && x - 1.0 < 1e-14) x = 1.0;
    if (x < -1.0 && -1.0 - x < 1e-14) x = -1.0;
    return s * (1.0 - std::pow(s, k) * legendre(l, x));
  };
  const double whole = gl64(f, lo, 1.0);
  const double integral = adaptive(f, lo, 1.0, whole, kTol * 2.0 * kappa * (1.0 - kappa), 0);
  const double lam = integral / (2.0 * kappa * (1.0 - kappa));
  if (!(lam > -kTol && lam < 1.0))
    throw NumericError("eigenvalue_range", "lambda_{" + std::to_string(n) + "," + std::to_string(l) +
                                               "} = " + std::to_string(lam) + " outside [0,1)");
  return std::max(lam, 0.0);
}

double eigenvalue(const Params& p, int n, int l) { return eigenvalue(p.kappa(), n, l); }

double eigenvalue_n0_closed(double kappa, int n) {
  const double nu = 1.0 - 2.0 * kappa;
  return 1.0 - (1.0 - std::pow(nu, 2 * n + 2)) / ((n + 1.0) * (1.0 - nu * nu));
}

double SpectrumTable::at(int n, int l) const {
  if (!has(n, l)) throw std::out_of_range("spectrum entry outside the table window");
  return entries[size_t(n) * (l_max + 1) + l];
}

SpectrumTable spectrum_table(double kappa, int n_max, int l_max) {
  if (n_max < 0 || l_max < 0) throw std::invalid_argument("table window must be nonnegative");
  SpectrumTable t;
  t.kappa = kappa;
  t.n_max = n_max;
  t.l_max = l_max;
  t.entries.resize(size_t(n_max + 1) * (l_max + 1));
  for (int n = 0; n <= n_max; ++n)
    for (int l = 0; l <= l_max; ++l) t.entries[size_t(n) * (l_max + 1) + l] = eigenvalue(kappa, n, l);
  return t;
}

double recurrence_residual(const SpectrumTable& t, int n, int l) {
  if (!t.has(n, l + 1) || !t.has(n + 1, l))
    throw std::out_of_range("recurrence needs lambda_{n,l+1} and lambda_{n+1,l}");
  const double nu = 1.0 - 2.0 * t.kappa;
  double rhs = (2.0 * l + 1.0) / (l + 1.0) * nu / (1.0 + nu) * t.at(n, l) +
               (2.0 * l + 1.0) / ((l + 1.0) * (1.0 + nu)) * t.at(n + 1, l);
  if (l >= 1) rhs -= l / (l + 1.0) * t.at(n + 1, l - 1);
  return std::abs(t.at(n, l + 1) - rhs);
}

Monotonicity monotonicity_violation(const SpectrumTable& t) {
  Monotonicity m;
  for (int n = 0; n <= t.n_max; ++n)
    for (int l = 0; l <= t.l_max; ++l) {
      if (n < t.n_max) m.in_n = std::max(m.in_n, t.at(n, l) - t.at(n + 1, l));
      if (l < t.l_max) m.in_l = std::max(m.in_l, t.at(n, l) - t.at(n, l + 1));
    }
  return m;
}

double spectral_gap_maxwell(double kappa) { return std::min(kappa, 2.0 * kappa * (1.0 - kappa)); }
double spectral_gap_maxwell(const Params& p) { return spectral_gap_maxwell(p.kappa()); }

}  // namespace grankin
