#pragma once
#include <Eigen/Core>
#include <string>

namespace grankin {

using Vec3 = Eigen::Vector3d;

// Test particle of mass m colliding inelastically with a thermalized
// background of mass m1, temperature theta1 and drift u1.
struct Params {
  double m = 1.0;
  double m1 = 1.0;
  double theta1 = 1.0;
  Vec3 u1 = Vec3::Zero();
  double e = 1.0;               // normal restitution, (0,1]
  double mean_free_path = 1.0;  // collision rates scale with 1/mean_free_path

  double alpha() const { return m1 / (m + m1); }
  double beta() const { return 0.5 * (1.0 - e); }
  double kappa() const { return alpha() * (1.0 - beta()); }
  double nu() const { return 1.0 - 2.0 * kappa(); }
  double theta_sharp() const;
  // (1-alpha)(1-beta): post-collisional weight of the background particle
  double gamma() const { return (1.0 - alpha()) * (1.0 - beta()); }
};

// throws ConfigError
void validate(const Params& p);
Params params_from_json_text(const std::string& text);
Params load_params(const std::string& path);
std::string params_to_json_text(const Params& p);

double maxwellian(double mass, double theta, const Vec3& u, const Vec3& v);
// equilibrium of the linear operator: mass m, temperature theta_sharp, drift u1
double equilibrium(const Params& p, const Vec3& v);
// background density M1
double background(const Params& p, const Vec3& w);

}  // namespace grankin
