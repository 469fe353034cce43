#include "grankin/model.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "grankin/errors.hpp"

namespace grankin {

double Params::theta_sharp() const {
  const double a = alpha(), b = beta();
  return (1.0 - a) * (1.0 - b) / (1.0 - a * (1.0 - b)) * theta1;
}

void validate(const Params& p) {
  auto bad = [](const std::string& s) { throw ConfigError(s); };
  if (!(p.m > 0.0) || !std::isfinite(p.m)) bad("mass m must be positive");
  if (!(p.m1 > 0.0) || !std::isfinite(p.m1)) bad("mass m1 must be positive");
  if (!(p.theta1 > 0.0) || !std::isfinite(p.theta1)) bad("temperature theta1 must be positive");
  if (!(p.e > 0.0 && p.e <= 1.0)) bad("restitution e must lie in (0,1]");
  if (!(p.mean_free_path > 0.0) || !std::isfinite(p.mean_free_path))
    bad("mean_free_path must be positive");
  if (!p.u1.allFinite()) bad("u1 must be finite");
}

Params params_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw ConfigError(std::string("config is not valid JSON: ") + err.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  Params p;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      if (k == "m") p.m = it->get<double>();
      else if (k == "m1") p.m1 = it->get<double>();
      else if (k == "theta1") p.theta1 = it->get<double>();
      else if (k == "e") p.e = it->get<double>();
      else if (k == "mean_free_path") p.mean_free_path = it->get<double>();
      else if (k == "u1") {
        if (!it->is_array() || it->size() != 3) throw ConfigError("u1 must be an array of 3 numbers");
        for (int d = 0; d < 3; ++d) p.u1[d] = (*it)[d].get<double>();
      } else
        throw ConfigError("unknown config key '" + k + "'");
    }
  } catch (const nlohmann::json::type_error& err) {
    throw ConfigError(std::string("config value has wrong type: ") + err.what());
  }
  validate(p);
  return p;
}

Params load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return params_from_json_text(ss.str());
}

std::string params_to_json_text(const Params& p) {
  nlohmann::json j = {{"m", p.m},           {"m1", p.m1},
                      {"theta1", p.theta1}, {"u1", {p.u1[0], p.u1[1], p.u1[2]}},
                      {"e", p.e},           {"mean_free_path", p.mean_free_path}};
  return j.dump();
}

double maxwellian(double mass, double theta, const Vec3& u, const Vec3& v) {
  const double c = mass / (2.0 * std::numbers::pi * theta);
  return c * std::sqrt(c) * std::exp(-mass * (v - u).squaredNorm() / (2.0 * theta));
}

double equilibrium(const Params& p, const Vec3& v) {
  return maxwellian(p.m, p.theta_sharp(), p.u1, v);
}

double background(const Params& p, const Vec3& w) { return maxwellian(p.m1, p.theta1, p.u1, w); }

}  // namespace grankin
