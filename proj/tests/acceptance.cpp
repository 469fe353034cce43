// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli_runner.hpp"
#include "grankin/collision.hpp"
#include "grankin/constants.hpp"
#include "grankin/homogeneous.hpp"
#include "grankin/hydro.hpp"
#include "grankin/spectral.hpp"

using namespace grankin;
namespace fs = std::filesystem;

namespace {

// one line of evidence per sub-check
struct Verdict {
  bool pass = true;
  std::vector<std::string> lines;
  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Params inelastic() {
  Params p;
  p.e = 0.9;
  return p;
}

Params lighter_background() {
  Params p;
  p.m1 = 0.5;
  p.e = 0.8;  // kappa = 0.3
  return p;
}

// 16^3 matrices shared by criteria 5 to 7
struct Matrices16 {
  std::unique_ptr<OperatorMatrix> mx, hs;
  void ensure() {
    if (mx) return;
    const Params p = inelastic();
    const VelocityGrid g = make_grid(p, 16);
    mx = std::make_unique<OperatorMatrix>(assemble_operator(p, g, Kernel::maxwell));
    hs = std::make_unique<OperatorMatrix>(assemble_operator(p, g, Kernel::hard_sphere));
  }
  void release() {
    mx.reset();
    hs.reset();
  }
} m16;

void c1(Verdict& v) {
  double w01 = 0, w10 = 0, wn0 = 0;
  for (int i = 1; i <= 19; ++i) {
    const double k = 0.05 * i;
    w01 = std::max(w01, std::abs(eigenvalue(k, 0, 1) - k));
    w10 = std::max(w10, std::abs(eigenvalue(k, 1, 0) - 2 * k * (1 - k)));
    for (int n = 0; n <= 10; ++n) wn0 = std::max(wn0, std::abs(eigenvalue(k, n, 0) - eigenvalue_n0_closed(k, n)));
  }
  v.require(w01 <= 1e-10, "max |lambda_01 - kappa| over 19 kappa = " + fmt(w01, 3));
  v.require(w10 <= 1e-10, "max |lambda_10 - 2 kappa (1-kappa)| = " + fmt(w10, 3));
  v.require(wn0 <= 1e-10, "max |lambda_n0 - closed form|, n <= 10 = " + fmt(wn0, 3));
}

void c2(Verdict& v) {
  for (double k : {0.1, 0.375, 0.5, 0.8}) {
    const SpectrumTable t = spectrum_table(k, 9, 9);
    double worst = 0;
    for (int n = 0; n <= 8; ++n)
      for (int l = 0; l <= 8; ++l) worst = std::max(worst, recurrence_residual(t, n, l));
    v.require(worst < 1e-8, "kappa " + fmt(k) + ": max recurrence residual " + fmt(worst, 3));
  }
}

void c3(Verdict& v) {
  const double e = erfinv(0.5), t = tau_numeric();
  v.require(std::abs(e - 0.4769) <= 5e-5, "erfinv(1/2) = " + fmt(e, 10) + " (target 0.4769 +- 5e-5)");
  v.require(std::abs(t - 3.3154) <= 5e-5,
            "tau = " + fmt(t, 10) + " (target 3.3154 +- 5e-5, off by " + fmt(std::abs(t - 3.3154), 3) + ")");
}

void c4(Verdict& v) {
  Params p;
  p.e = 0.5;
  const double et = eta(p);
  double zres = 0;
  for (int i = 0; i < 1000; ++i) zres = std::max(zres, z_identity_residual(p, 3.0 * et * i / 999.0));
  v.require(zres < 1e-10, "z identity: max residual on 1000 points " + fmt(zres, 3));

  double slack = 1e300;
  const double top = 2 * p.kappa() * et;
  for (int i = 1; i < 200; ++i) {
    const double r0 = top * i / 200.0;
    slack = std::min(slack, rho1(p, r0) - rho1_floor(p, r0));
  }
  v.require(slack >= -1e-10, "rho1 - floor over 199 rho0: min " + fmt(slack, 3));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lm(-1.5, 1.5), ue(0.05, 1.0);
  double margin = 1e300;
  for (int k = 0; k < 200; ++k) {
    Params q;
    q.m = std::exp(lm(rng));
    q.m1 = std::exp(lm(rng));
    q.theta1 = std::exp(lm(rng));
    q.e = ue(rng);
    margin = std::min(margin, c_star_lower(q) / (eta(q) / std::sqrt(5.0)) - 1.0);
  }
  v.require(margin >= 0.0, "c_star_lower / (eta/sqrt 5) - 1 over 200 sets: min " + fmt(margin, 3));
}

void c5(Verdict& v) {
  m16.ensure();
  for (const OperatorMatrix* op : {m16.mx.get(), m16.hs.get()}) {
    const OperatorCheck c = check_operator(*op);
    const std::string k = kernel_name(op->kernel);
    v.require(c.self_adjoint <= 1e-8, k + " self-adjointness " + fmt(c.self_adjoint, 3));
    v.require(c.negativity <= 1e-8, k + " negativity " + fmt(c.negativity, 3));
    v.require(c.mass <= 1e-8, k + " mass " + fmt(c.mass, 3));
    v.require(c.equilibrium <= 1e-6, k + " L(M) " + fmt(c.equilibrium, 3));
    if (op->kernel == Kernel::maxwell) {
      v.require(c.momentum_residual <= 0.01, "momentum |Lf + kappa f|/|kappa f| = " + fmt(c.momentum_residual, 3));
      v.require(c.energy_residual <= 0.01, "energy |Lf + lambda_10 f|/|lambda_10 f| = " + fmt(c.energy_residual, 3));
      v.require(std::abs(c.momentum_rayleigh / c.momentum_expected - 1) <= 0.01,
                "momentum Rayleigh " + fmt(c.momentum_rayleigh, 8) + " vs " + fmt(c.momentum_expected, 8));
      v.require(std::abs(c.energy_rayleigh / c.energy_expected - 1) <= 0.01,
                "energy Rayleigh " + fmt(c.energy_rayleigh, 8) + " vs " + fmt(c.energy_expected, 8));
    }
  }
}

void c6(Verdict& v) {
  m16.ensure();
  int set = 0;
  for (const Params& p : {inelastic(), Params{}, lighter_background()}) {
    std::unique_ptr<OperatorMatrix> hs, mx;
    const OperatorMatrix *h = m16.hs.get(), *m = m16.mx.get();
    if (set > 0) {
      const VelocityGrid g = make_grid(p, 16);
      hs = std::make_unique<OperatorMatrix>(assemble_operator(p, g, Kernel::hard_sphere));
      mx = std::make_unique<OperatorMatrix>(assemble_operator(p, g, Kernel::maxwell));
      h = hs.get();
      m = mx.get();
    }
    const auto fam = comparison_family(p, h->grid, 20, 5 + set);
    const double floor = c_star_lower(p);
    const ComparisonReport r = verify_comparison(*h, *m, fam, 0.98 * floor);
    v.require(r.holds && fam.size() == 22, "set " + std::to_string(set) + " (kappa " + fmt(p.kappa()) + "): min ratio " +
                                               fmt(r.min_ratio) + " >= 0.98 c_star_lower = " + fmt(r.threshold) +
                                               " over " + std::to_string(fam.size()) + " functions");
    ++set;
  }
}

void c7(Verdict& v) {
  {
    const Params q = lighter_background();
    const double kap = q.kappa(), er = 2 * kap * (1 - kap), e_inf = 3 * q.theta_sharp() / q.m;
    const int reps = 30;
    double rm = 0, re = 0, tail = 0;
    for (int r = 0; r < reps; ++r) {
      ParticleEnsemble a = make_ensemble(q, 100000, 1000 + r, {Initial::shifted});
      const RelaxationTrace ta = relax_particles(q, Kernel::maxwell, a, 3.0 / kap, 64);
      rm += fit_rate_window(ta.t, trace_field(ta, q, "px"), 0.0, 3.0 / kap) / reps;
      ParticleEnsemble b = make_ensemble(q, 100000, 2000 + r, {Initial::heated});
      const RelaxationTrace tb = relax_particles(q, Kernel::maxwell, b, 3.0 / er, 64);
      re += fit_rate_window(tb.t, trace_field(tb, q, "energy"), 0.0, 3.0 / er) / reps;
      const RelaxationTrace tc = relax_particles(q, Kernel::maxwell, b, 5.0 / er, 64);
      for (int i = 32; i < 64; ++i) tail += tc.energy[i] / (32 * reps);
    }
    v.require(std::abs(rm / kap - 1) <= 0.05,
              "particles, N=1e5, mean of 30 seeds: momentum rate " + fmt(rm) + " vs kappa " + fmt(kap));
    v.require(std::abs(re / er - 1) <= 0.05, "energy rate " + fmt(re) + " vs 2 kappa (1-kappa) " + fmt(er));
    v.require(std::abs(tail / e_inf - 1) <= 0.02, "equilibrium energy " + fmt(tail) + " vs 3 theta#/m " + fmt(e_inf));
  }
  m16.ensure();
  const Params p = inelastic();
  const double mu = spectral_gap_maxwell(p);
  for (const OperatorMatrix* op : {m16.mx.get(), m16.hs.get()}) {
    const bool mx = op->kernel == Kernel::maxwell;
    const double t_end = mx ? 1.2 * std::log(1e7) / mu : 20.0;
    const RelaxationTrace tr = relax_galerkin(*op, initial_grid(*op, {Initial::shifted}), t_end, 64);
    const double rate = fit_rate(tr, p, "l2dist");
    const double bound = mx ? 0.98 * mu : 0.98 * c_star_lower(p) * mu;
    v.require(rate >= bound, std::string("galerkin 16^3 ") + kernel_name(op->kernel) + ": L2 rate " + fmt(rate) +
                                 " >= " + fmt(bound) + (mx ? " (0.98 mu_max)" : " (0.98 c_star_lower mu_max)"));
    const RelaxationTrace fine = relax_galerkin(*op, initial_grid(*op, {Initial::heated}), 2.0, 161);
    const double err = dissipation_identity_error(fine);
    v.require(err < 0.01, std::string(kernel_name(op->kernel)) + " d/dt |f-M|^2 = -2D: max relative error " + fmt(err, 3));
  }
}

void c8(Verdict& v) {
  m16.release();
  const Params p = inelastic();
  {
    const OperatorMatrix op = assemble_operator(p, make_grid(p, 24), Kernel::maxwell);
    const CellSolution cell = solve_cell_problem(op);
    Eigen::VectorXd exact(op.size());
    for (int i = 0; i < op.size(); ++i) exact[i] = -op.grid.node(i).x() * op.M[i] / eigenvalue(p, 0, 1);
    const double err = op.to_sym(cell.chi1 - exact).norm() / op.to_sym(exact).norm();
    const DiffusivityReport r = diffusivity_report(op, cell);
    const double d = diffusivity_maxwell(p);
    v.require(err <= 0.01, "maxwell matrix 24^3: |chi1 + v1 M/lambda_01| relative " + fmt(err, 3));
    v.require(std::abs(r.d_value / d - 1) <= 0.01, "maxwell matrix: D " + fmt(r.d_value, 8) + " vs " + fmt(d, 8));
  }
  const OperatorMatrix op = assemble_operator(p, make_grid(p, 24), Kernel::hard_sphere);
  const DiffusivityReport r = diffusivity_hs(op);
  v.require(r.cell_residual <= 1e-8, "hard spheres 24^3: residual " + fmt(r.cell_residual, 3) + " (" +
                                         std::to_string(r.cg_iterations) + " CG iterations)");
  v.require(std::abs(r.cell_mean) <= 1e-10, "int chi1 dv = " + fmt(r.cell_mean, 3));
  v.require(r.odd_defect <= 0.01, "odd symmetry defect " + fmt(r.odd_defect, 3) + " of max |chi1|");
  v.require(r.bounds_hold, "d_lower " + fmt(r.d_lower) + " <= D_hs " + fmt(r.d_value) + " <= d_upper " + fmt(r.d_upper) +
                               " (1% slack)");
}

void c9(Verdict& v) {
  const Params p;
  const std::vector<double> eps{0.5, 0.25, 0.125};
  for (Kernel k : {Kernel::maxwell, Kernel::hard_sphere}) {
    const OperatorMatrix op = assemble_operator(p, make_grid(p, 12), k);
    const double d = k == Kernel::maxwell ? diffusivity_maxwell(p) : diffusivity_hs(op).d_value;
    const HydroReport rep = hydrolimit_report(op, eps, d, 128, 0.1);
    std::string es;
    double drift = 0;
    for (const HydroRow& r : rep.rows) {
      es += (es.empty() ? "" : ", ") + fmt(r.error, 4);
      drift = std::max(drift, r.mass_drift);
    }
    const std::string kn = kernel_name(k);
    v.require(rep.decreasing, kn + " (D = " + fmt(d) + "): E(eps) = " + es + " strictly decreasing");
    if (k == Kernel::maxwell)
      v.require(rep.rows[2].error <= 0.5 * rep.rows[0].error, "maxwell E(0.125) <= 0.5 E(0.5)");
    v.require(drift <= 1e-10, kn + " mass drift " + fmt(drift, 3));
    if (k == Kernel::maxwell) {
      const double r128 = rep.rows[0].continuity_residual;
      const double r64 = solve_rescaled(op, 0.5, cosine_profile(64), 0.1, d).continuity_residual;
      const double order = std::log2(r64 / r128);
      v.require(order >= 1.5, "continuity residual " + fmt(r64, 3) + " (Nx 64) -> " + fmt(r128, 3) +
                                  " (Nx 128), observed order " + fmt(order, 3) + " >= 1.5");
    }
  }
}

std::string shell_join(const std::vector<std::string>& args) {
  std::string s;
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string q = "'";
    for (char c : args[i]) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    s += (i > 1 ? " " : "") + q + "'";
  }
  return s;
}

void c10(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / "grankin_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  spit(dir / "c.json", R"({"e":0.9})");
  const std::string cfg = " --config " + (dir / "c.json").string();

  // run, keep the bytes, rerun the argv recorded in the manifest
  auto replay = [&](const std::string& name, const std::string& args, const std::string& env_b) {
    const std::string out = (dir / (name + ".csv")).string();
    if (run_cli(args + cfg + " --out " + out + " 2>/dev/null").code != 0) return false;
    const std::string first = slurp(out);
    const auto m = nlohmann::json::parse(slurp(out + ".manifest.json"));
    fs::remove(out);
    if (run_cli(shell_join(m["argv"].get<std::vector<std::string>>()) + " 2>/dev/null", env_b).code != 0) return false;
    return !first.empty() && first == slurp(out);
  };
  const std::vector<std::pair<std::string, std::string>> deterministic{
      {"spectrum", "spectrum --nmax 8 --lmax 8"},
      {"relax_galerkin", "relax --kernel hs --res 8 --tend 5"},
      {"cell", "cell --res 8"},
      {"compare", "compare --res 8"},
      {"hydrolimit", "hydrolimit --res 6 --nx 32 --eps 0.5,0.25 --tend 0.02"},
  };
  for (const auto& [name, args] : deterministic)
    v.require(replay(name, args, ""), name + ": rerun of the manifest argv gives identical bytes");
  v.require(replay("relax_particle", "relax --method particle --kernel hs --n 100000 --tend 2 --seed 31 --threads 1",
                   ""),
            "relax particle, seed 31: rerun gives identical bytes");
  v.require(replay("relax_particle4", "relax --method particle --kernel hs --n 100000 --tend 2 --seed 31", "GRANKIN_THREADS=4"),
            "relax particle, seed 31: 1 vs 4 threads identical");
  const bool differ = [&] {
    const std::string a = (dir / "s1.csv").string(), b = (dir / "s2.csv").string();
    run_cli("relax --method particle --n 10000 --tend 1 --seed 1 --out " + a + " 2>/dev/null");
    run_cli("relax --method particle --n 10000 --tend 1 --seed 2 --out " + b + " 2>/dev/null");
    return slurp(a) != slurp(b);
  }();
  v.require(differ, "different seeds give different particle traces");
  fs::remove_all(dir);
}

struct Criterion {
  int id;
  std::string title;
  double budget;  // seconds
  std::function<void(Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "spectral closed forms", 5, c1},
      {2, "recurrence identity", 10, c2},
      {3, "erfinv(1/2) and tau", 0, c3},
      {4, "z identity, rho1 floor, c_star floor", 10, c4},
      {5, "discretized operators at 16^3", 300, c5},
      {6, "comparison inequality", 300, c6},
      {7, "homogeneous relaxation", 600, c7},
      {8, "cell problem at 24^3", 600, c8},
      {9, "hydrodynamic limit", 1200, c9},
      {10, "determinism", 0, c10},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));

  int failed = 0;
  std::vector<std::string> summary;
  for (const Criterion& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    // c5 to c7 share the assembly of the 16^3 matrices; it is charged to the first
    const double dt = seconds_since(t0);
    if (c.budget > 0) v.require(dt < c.budget, "runtime " + fmt(dt, 4) + " s < " + fmt(c.budget) + " s");
    for (const std::string& l : v.lines) std::cout << "    " << l << '\n';
    const std::string line = std::string(v.pass ? "PASS" : "FAIL") + "  C" + std::to_string(c.id) + " " + c.title +
                             " (" + fmt(dt, 4) + " s)";
    std::cout << line << '\n' << std::flush;
    summary.push_back(line);
    failed += !v.pass;
  }
  std::cout << "\nsummary\n";
  for (const std::string& l : summary) std::cout << l << '\n';
  std::cout << failed << " of " << summary.size() << " criteria failed\n";
  return failed ? 1 : 0;
}
