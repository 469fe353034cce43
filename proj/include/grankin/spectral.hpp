#pragma once
#include <vector>

#include "grankin/model.hpp"

namespace grankin {

// lambda_{n,l}(kappa) for the Maxwell-molecule operator (mean free path 1)
double eigenvalue(double kappa, int n, int l);
double eigenvalue(const Params& p, int n, int l);
// lambda_{n,0} in closed form
double eigenvalue_n0_closed(double kappa, int n);

struct SpectrumTable {
  double kappa = 0.0;
  int n_max = 0, l_max = 0;
  std::vector<double> entries;  // (n_max+1) x (l_max+1), n-major

  double at(int n, int l) const;
  bool has(int n, int l) const { return n >= 0 && l >= 0 && n <= n_max && l <= l_max; }
};

SpectrumTable spectrum_table(double kappa, int n_max, int l_max);

// |lambda_{n,l+1} - rhs| for the three-term recurrence in l
double recurrence_residual(const SpectrumTable& t, int n, int l);

// largest violation of lambda_{n+1,l} >= lambda_{n,l} (in_n) and of
// lambda_{n,l+1} >= lambda_{n,l} (in_l); 0 when ordered
struct Monotonicity {
  double in_n = 0.0, in_l = 0.0;
};
Monotonicity monotonicity_violation(const SpectrumTable& t);

// min(kappa, 2 kappa (1-kappa))
double spectral_gap_maxwell(double kappa);
double spectral_gap_maxwell(const Params& p);

}  // namespace grankin
