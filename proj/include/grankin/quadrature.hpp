#pragma once
#include <vector>

namespace grankin {

struct Rule {
  std::vector<double> x, w;
};

// n-point Gauss-Legendre on [-1,1]
const Rule& gauss_legendre(int n);
// same rule mapped to [a,b]
Rule gauss_legendre(int n, double a, double b);
// n-point Gauss-Hermite for the standard normal weight; weights sum to 1
const Rule& gauss_hermite_normal(int n);

// P_l(x) by the three-term recurrence
double legendre(int l, double x);

}  // namespace grankin
