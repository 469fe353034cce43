#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include <Eigen/Geometry>

#include "grankin/errors.hpp"
#include "grankin/homogeneous.hpp"
#include "grankin/rng.hpp"

namespace grankin {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr std::size_t kBlock = 4096;

Vec3 normal3(CounterRng& r) { return Vec3(r.normal(), r.normal(), r.normal()); }

Vec3 unit_vector(CounterRng& r) {
  const double c = 2.0 * r.uniform() - 1.0, phi = 2.0 * kPi * r.uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return Vec3(s * std::cos(phi), s * std::sin(phi), c);
}

// n with density |qhat.n|/(2 pi) on the sphere
Vec3 sample_normal(CounterRng& r, const Vec3& qhat) {
  double c = std::sqrt(r.uniform());
  if (r.uniform() < 0.5) c = -c;
  const double phi = 2.0 * kPi * r.uniform();
  const Vec3 a = std::abs(qhat.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = qhat.cross(a).normalized(), e2 = qhat.cross(e1);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return c * qhat + s * (std::cos(phi) * e1 + std::sin(phi) * e2);
}

// particle streams: counter block 0 for the initial state, block s+1 for step s
CounterRng stream(std::uint64_t seed, std::size_t i, std::uint64_t block) {
  CounterRng r(seed, i);
  r.ctr = block << 32;
  return r;
}

template <class Fn>
void parallel_blocks(std::size_t n, int threads, Fn&& fn) {
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  const int nt = std::max(1, std::min<int>(threads, int(nb)));
  if (nt == 1) {
    for (std::size_t b = 0; b < nb; ++b) fn(b * kBlock, std::min(n, (b + 1) * kBlock));
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t b = t; b < nb; b += nt) fn(b * kBlock, std::min(n, (b + 1) * kBlock));
    });
  for (auto& th : pool) th.join();
}

}  // namespace

ParticleEnsemble make_ensemble(const Params& p, std::size_t n, std::uint64_t seed, const InitialSpec& init) {
  ParticleEnsemble ens;
  ens.rng_seed = seed;
  ens.v.resize(n);
  const double th = p.theta_sharp();
  const double sd = std::sqrt((init.kind == Initial::heated ? init.heat * th : th) / p.m);
  const Vec3 u = init.kind == Initial::shifted ? Vec3(p.u1 + Vec3(init.shift * std::sqrt(th / p.m), 0, 0)) : p.u1;
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng r = stream(seed, i, 0);
    ens.v[i] = u + sd * normal3(r);
  }
  return ens;
}

void step_particles(const Params& p, ParticleEnsemble& ens, Kernel k, double dt, int threads) {
  if (dt < 0.0) throw ConfigError("time step must be non-negative");
  if (dt == 0.0) return;
  const double sd1 = std::sqrt(p.theta1 / p.m1);
  const double mean_speed = sd1 * std::sqrt(8.0 / kPi);
  const double kap = p.kappa(), lam = p.mean_free_path;
  const std::uint64_t block = ens.steps + 1;
  parallel_blocks(ens.size(), threads, [&](std::size_t i0, std::size_t i1) {
    for (std::size_t i = i0; i < i1; ++i) {
      CounterRng r = stream(ens.rng_seed, i, block);
      Vec3 x = ens.v[i] - p.u1;
      double t = 0.0;
      for (;;) {
        const double a = x.norm();
        const double rate = k == Kernel::maxwell ? 1.0 / lam : (a + mean_speed) / lam;
        t += -std::log(r.uniform()) / rate;
        if (t > dt) break;
        Vec3 y;
        if (k == Kernel::maxwell || r.uniform() * (a + mean_speed) < a) {
          y = sd1 * normal3(r);
        } else {
          // density proportional to |y| M1(y)
          y = sd1 * std::sqrt(-2.0 * std::log(r.uniform() * r.uniform())) * unit_vector(r);
        }
        const Vec3 q = x - y;
        const double qn = q.norm();
        if (k == Kernel::hard_sphere && r.uniform() * (a + y.norm()) >= qn) continue;
        if (qn == 0.0) continue;
        const Vec3 n = sample_normal(r, q / qn);
        x -= 2.0 * kap * q.dot(n) * n;
      }
      ens.v[i] = p.u1 + x;
    }
  });
  ens.time += dt;
  ++ens.steps;
}

EnsembleMoments ensemble_moments(const Params& p, const ParticleEnsemble& ens) {
  // fixed block order keeps the sums independent of any threading
  const std::size_t n = ens.size();
  if (n < 2) throw ConfigError("ensemble needs at least two particles");
  Vec3 s1 = Vec3::Zero(), s2 = Vec3::Zero();
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t b = 0; b < n; b += kBlock) {
    Vec3 bs1 = Vec3::Zero(), bs2 = Vec3::Zero();
    double be1 = 0.0, be2 = 0.0;
    for (std::size_t i = b; i < std::min(n, b + kBlock); ++i) {
      const Vec3 x = ens.v[i] - p.u1;
      const double e = x.squaredNorm();
      bs1 += x;
      bs2 += x.cwiseProduct(x);
      be1 += e;
      be2 += e * e;
    }
    s1 += bs1;
    s2 += bs2;
    e1 += be1;
    e2 += be2;
  }
  EnsembleMoments m;
  const double dn = double(n);
  m.momentum = s1 / dn;
  m.energy = e1 / dn;
  for (int d = 0; d < 3; ++d)
    m.momentum_se[d] = std::sqrt(std::max(0.0, s2[d] / dn - m.momentum[d] * m.momentum[d]) / (dn - 1.0));
  m.energy_se = std::sqrt(std::max(0.0, e2 / dn - m.energy * m.energy) / (dn - 1.0));
  return m;
}

RelaxationTrace relax_particles(const Params& p, Kernel k, ParticleEnsemble& ens, double t_end, int samples,
                                int threads) {
  if (samples < 64) throw ConfigError("a relaxation trace needs at least 64 samples");
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  RelaxationTrace tr;
  tr.kernel = k;
  tr.method = "particle";
  const double t0 = ens.time;
  auto record = [&] {
    const EnsembleMoments m = ensemble_moments(p, ens);
    tr.t.push_back(ens.time - t0);
    tr.momentum.push_back(m.momentum);
    tr.energy.push_back(m.energy);
    tr.momentum_se.push_back(m.momentum_se);
    tr.energy_se.push_back(m.energy_se);
    tr.l2dist.push_back(std::numeric_limits<double>::quiet_NaN());
  };
  const double dt = t_end / (samples - 1);
  record();
  for (int s = 1; s < samples; ++s) {
    step_particles(p, ens, k, dt, threads);
    record();
  }
  return tr;
}

}  // namespace grankin
