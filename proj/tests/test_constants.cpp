#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "grankin/constants.hpp"
#include "grankin/errors.hpp"

using namespace grankin;

TEST_CASE("erfinv round trips") {
  CHECK(erfinv(0.0) == 0.0);
  for (double p : {0.1, -0.1, 0.5, -0.5, 0.9, -0.9, 0.999999, -1e-9, 1.0 - 1e-15})
    CHECK(std::abs(std::erf(erfinv(p)) - p) <= 1e-12);
  for (double q : {1e-300, 1e-30, 1e-8, 0.3, 1.0, 1.7})
    CHECK(std::erfc(erfcinv(q)) == doctest::Approx(q).epsilon(1e-12));
  // mpmath erfinv(0.5)
  CHECK(erfinv(0.5) == doctest::Approx(0.47693627620446987).epsilon(1e-14));
  CHECK(std::abs(erfinv(0.5) - 0.4769) < 5e-5);
  CHECK_THROWS(erfinv(1.0));
  CHECK_THROWS(erfinv(-1.5));
}

TEST_CASE("tau evaluates the formula") {
  // sqrt(5)/(erfinv(1/2) sqrt 2) with the converged erfinv
  CHECK(tau_numeric() == doctest::Approx(3.3151993441705218).epsilon(1e-13));
}

TEST_CASE("z at the origin equals eta") {
  for (double th : {0.3, 1.0, 4.0}) {
    Params p;
    p.theta1 = th;
    p.m1 = 2.0;
    CHECK(z_of_xi(p, 0.0) == doctest::Approx(eta(p)).epsilon(1e-14));
    CHECK(eta(p) == doctest::Approx(erfinv(0.5) / std::sqrt(gauss_a(p))).epsilon(1e-14));
  }
  Params p;
  CHECK(eta(p) == doctest::Approx(0.67448975019608171).epsilon(1e-13));
}

TEST_CASE("z identity and floor on a dense grid") {
  Params p;
  p.e = 0.5;
  const double et = eta(p);
  for (int i = 0; i < 1000; ++i) {
    const double xi = 3.0 * et * i / 999.0;
    CHECK(z_identity_residual(p, xi) < 1e-10);
    const double z = z_of_xi(p, xi);
    CHECK(z * z + xi * xi >= et * et - 1e-12);
  }
}

TEST_CASE("derivative expression is z times z'") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (double m1 : {0.2, 1.0, 5.0}) {
    Params p;
    p.m1 = m1;
    for (int k = 0; k < 50; ++k) {
      const double xi = u(rng) * eta(p), h = 1e-5 * eta(p);
      const double dz = (z_of_xi(p, xi + h) - z_of_xi(p, xi - h)) / (2 * h);
      CHECK(z_times_dz(p, xi) == doctest::Approx(z_of_xi(p, xi) * dz).epsilon(1e-6));
      CHECK(z_times_dz(p, xi) > 0.0);
    }
  }
}

TEST_CASE("rho1 matches a brute-force scan") {
  Params p;
  p.e = 0.5;  // kappa 0.375
  const double rho0 = 0.3, hi = rho0 / (2 * p.kappa());
  double zmin = 1e300;
  for (int i = 0; i <= 100000; ++i) zmin = std::min(zmin, z_of_xi(p, hi * i / 100000.0));
  const Rho1Result r = rho1_search(p, rho0);
  CHECK(r.rho1 == doctest::Approx(zmin).epsilon(1e-10));
  CHECK(r.rho1 > 0.0);
  // z increases, so the minimum sits at the left endpoint with z z' > 0 there
  CHECK(r.argmin == doctest::Approx(0.0));
  CHECK(z_times_dz(p, r.argmin) > 0.0);
  CHECK(rho1(p, 1e-6) == doctest::Approx(eta(p)).epsilon(1e-12));
  CHECK_THROWS(rho1(p, 0.0));
  CHECK_THROWS(rho1(p, 2 * p.kappa() * eta(p)));
}

TEST_CASE("rho1 is nonincreasing and above its floor") {
  Params p;
  p.e = 0.8;
  p.m = 0.5;
  const double top = 2 * p.kappa() * eta(p);
  double prev = 1e300;
  for (int i = 1; i < 40; ++i) {
    const double r0 = top * i / 40.0;
    const double r = rho1(p, r0);
    CHECK(r <= prev + 1e-12);
    CHECK(r >= rho1_floor(p, r0) - 1e-10);
    prev = r;
  }
  const double r0 = top / std::sqrt(5.0);
  CHECK(rho1(p, r0) >= 2.0 * eta(p) / std::sqrt(5.0) - 1e-10);
}

TEST_CASE("c_star lower bound over random parameters") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lm(-1.5, 1.5), ue(0.05, 1.0);
  for (int k = 0; k < 200; ++k) {
    Params p;
    p.m = std::exp(lm(rng));
    p.m1 = std::exp(lm(rng));
    p.theta1 = std::exp(lm(rng));
    p.e = ue(rng);
    const CStar c = c_star_search(p);
    CHECK(c.value >= eta(p) / std::sqrt(5.0) - 1e-12);
    CHECK(c.value >= c.reference_choice);
    CHECK(c.reference_choice >= eta(p) / std::sqrt(5.0) - 1e-12);
  }
  Params p;
  CHECK(eta(p) / std::sqrt(5.0) == doctest::Approx(0.30164098631305813).epsilon(1e-12));
}

TEST_CASE("c_star floor does not depend on alpha, beta") {
  Params a, b;
  a.e = 0.3;
  b.m = 7.0;
  b.e = 0.95;
  CHECK(eta(a) == eta(b));
  CHECK(c_star_lower(a) >= eta(a) / std::sqrt(5.0));
  CHECK(c_star_lower(b) >= eta(b) / std::sqrt(5.0));
}

TEST_CASE("report fields") {
  Params p;
  p.e = 0.5;
  const ConstantsReport r = constants_report(p);
  CHECK(r.mu_hs_lower == doctest::Approx(r.c_star_lower * r.mu_max));
  CHECK(r.mu_max == doctest::Approx(0.375));
  REQUIRE(r.k_norm);
  REQUIRE(r.c_sigma_lower);
  CHECK(*r.c_sigma_lower > 0.0);
  CHECK(*r.c_sigma_lower < 1.0);
  CHECK(r.provenance.at("k_norm") == "analytic-bound");
  for (double v : {r.eta, r.rho0_opt, r.rho1_at_opt, r.rho1_lower, r.c_star_lower, r.mu_max, r.tau_numeric})
    CHECK(v > 0.0);
  // tau = (1-2k)/k = 2/3 -> 2 pi sqrt(pi)/(5/3)^2
  CHECK(*r.k_norm == doctest::Approx(2 * M_PI * std::sqrt(M_PI) * 9.0 / 25.0));

  Params el;  // kappa = 1/2: no analytic bound
  const ConstantsReport q = constants_report(el);
  CHECK(!q.k_norm);
  CHECK(!q.c_sigma_lower);
  const ConstantsReport q2 = constants_report(el, 3.0);
  REQUIRE(q2.k_norm);
  CHECK(q2.provenance.at("k_norm") == "measured");
  CHECK(q2.provenance.at("c_sigma_lower") == "measured");
  auto j = nlohmann::json::parse(report_to_json(q));
  CHECK(j["k_norm"]["provenance"] == "absent");
  CHECK(j["eta"]["provenance"] == "analytic-bound");
}
