#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "grankin/collision.hpp"
#include "grankin/constants.hpp"
#include "grankin/csv.hpp"
#include "grankin/errors.hpp"
#include "grankin/homogeneous.hpp"
#include "grankin/hydro.hpp"
#include "grankin/spectral.hpp"

namespace grankin::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Run {
  std::string command;
  std::vector<std::string> argv;
  std::string config_path;
  Params params;
  bool params_loaded = false;
  std::uint64_t seed = 1;
  int threads = 1;
  std::vector<std::string> outputs;
  std::string manifest_path;
  std::string main_out;  // first --out, names the default manifest
};

// shared by every command
struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string manifest;
};

int resolve_threads(const std::optional<int>& flag) {
  int n = 1;
  if (flag) {
    n = *flag;
  } else if (const char* env = std::getenv("GRANKIN_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0') throw ConfigError(std::string("GRANKIN_THREADS is not an integer: '") + env + "'");
    n = int(v);
  }
  if (n < 1) throw ConfigError("thread count must be at least 1");
  return n;
}

void emit(Run& run, const std::string& path, const CsvRow& header, const std::vector<CsvRow>& rows) {
  if (path.empty()) {
    std::cout << format_csv(header, rows);
    return;
  }
  emit_csv(path, header, rows);
  run.outputs.push_back(path);
}

void emit_json(Run& run, const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << '\n';
    return;
  }
  write_text(path, text + "\n");
  run.outputs.push_back(path);
}

std::string num(double v) { return csv_number(v); }
std::string num(long long v) { return csv_number(v); }

Json params_json(const Params& p) { return Json::parse(params_to_json_text(p)); }

void check(bool ok, const std::string& name, const std::string& what) {
  if (!ok) throw NumericError(name, what);
}

// --- commands ---

struct SpectrumOpts {
  int nmax = 3, lmax = 3;
  std::string out;
};

void cmd_spectrum(Run& run, const SpectrumOpts& o) {
  if (o.nmax < 0 || o.lmax < 0) throw ConfigError("--nmax and --lmax must be non-negative");
  const SpectrumTable t = spectrum_table(run.params.kappa(), o.nmax, o.lmax);
  std::vector<CsvRow> rows;
  for (int n = 0; n <= o.nmax; ++n)
    for (int l = 0; l <= o.lmax; ++l) rows.push_back({num((long long)n), num((long long)l), num(t.at(n, l))});
  emit(run, o.out, {"n", "l", "lambda"}, rows);
}

void cmd_gap(Run& run) { std::cout << num(spectral_gap_maxwell(run.params)) << '\n'; }

struct ConstantsOpts {
  int res = 12;
  std::string out;
};

void cmd_constants(Run& run, const ConstantsOpts& o) {
  const Params& p = run.params;
  std::optional<double> measured;
  if (p.kappa() >= 0.5 && o.res > 0) {
    const OperatorMatrix hs = assemble_operator(p, make_grid(p, o.res), Kernel::hard_sphere);
    measured = gain_norm_estimate(hs);
  }
  emit_json(run, o.out, report_to_json(constants_report(p, measured)));
}

struct OperatorOpts {
  std::string kernel = "maxwell";
  int res = 16;
  bool check = false;
  std::string out;
};

void cmd_operator(Run& run, const OperatorOpts& o) {
  const Kernel k = parse_kernel(o.kernel);
  const OperatorMatrix op = assemble_operator(run.params, make_grid(run.params, o.res), k);
  const OperatorCheck c = check_operator(op);
  Json j;
  j["kernel"] = kernel_name(k);
  j["res"] = o.res;
  j["self_adjoint"] = c.self_adjoint;
  j["negativity"] = c.negativity;
  j["mass"] = c.mass;
  j["equilibrium"] = c.equilibrium;
  j["momentum_rayleigh"] = c.momentum_rayleigh;
  j["energy_rayleigh"] = c.energy_rayleigh;
  j["momentum_residual"] = c.momentum_residual;
  j["energy_residual"] = c.energy_residual;
  if (k == Kernel::maxwell) {
    j["momentum_expected"] = c.momentum_expected;
    j["energy_expected"] = c.energy_expected;
  }
  j["min_sigma_ratio"] = c.min_sigma_ratio;
  j["max_sigma_ratio"] = c.max_sigma_ratio;
  for (const auto& [key, v] : j.items())
    if (v.is_number_float()) std::cout << key << ' ' << num(v.get<double>()) << '\n';
  if (!o.out.empty()) emit_json(run, o.out, j.dump(2));
  if (!o.check) return;
  check(c.self_adjoint <= 1e-8, "self_adjoint", "residual " + num(c.self_adjoint) + " > 1e-8");
  check(c.negativity <= 1e-8, "negativity", "residual " + num(c.negativity) + " > 1e-8");
  check(c.mass <= 1e-8, "mass", "residual " + num(c.mass) + " > 1e-8");
  check(c.equilibrium <= 1e-6, "equilibrium", "residual " + num(c.equilibrium) + " > 1e-6");
  if (k == Kernel::maxwell) {
    const double dm = std::abs(c.momentum_rayleigh / c.momentum_expected - 1.0);
    const double de = std::abs(c.energy_rayleigh / c.energy_expected - 1.0);
    check(dm <= 0.01, "momentum_eigenvalue", "relative error " + num(dm) + " > 0.01");
    check(de <= 0.01, "energy_eigenvalue", "relative error " + num(de) + " > 0.01");
  }
}

struct CompareOpts {
  int res = 12;
  int family = 20;
  std::string out;
};

void cmd_compare(Run& run, const CompareOpts& o) {
  const Params& p = run.params;
  const VelocityGrid g = make_grid(p, o.res);
  const OperatorMatrix hs = assemble_operator(p, g, Kernel::hard_sphere);
  const OperatorMatrix mx = assemble_operator(p, g, Kernel::maxwell);
  const double floor = c_star_lower(p);
  const ComparisonReport r =
      verify_comparison(hs, mx, comparison_family(p, g, o.family, unsigned(run.seed)), 0.98 * floor);
  std::cout << "min_ratio " << num(r.min_ratio) << '\n'
            << "c_star_lower " << num(floor) << '\n'
            << "threshold " << num(r.threshold) << '\n'
            << "skipped " << r.skipped << '\n';
  if (!o.out.empty()) {
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < r.ratios.size(); ++i) rows.push_back({num((long long)i), num(r.ratios[i])});
    emit(run, o.out, {"index", "ratio"}, rows);
  }
  check(r.holds, "comparison", "min D_hs/D_max " + num(r.min_ratio) + " below " + num(r.threshold));
}

struct RelaxOpts {
  std::string kernel = "maxwell", method = "galerkin", init = "shifted", out;
  double tend = 0.0, shift = 0.5, heat = 1.5;
  int res = 16, samples = 64;
  long long n = 100000;
};

void cmd_relax(Run& run, const RelaxOpts& o) {
  const Params& p = run.params;
  const Kernel k = parse_kernel(o.kernel);
  const InitialSpec init{parse_initial(o.init), o.shift, o.heat};
  RelaxationTrace tr;
  if (o.method == "galerkin") {
    const OperatorMatrix op = assemble_operator(p, make_grid(p, o.res), k);
    tr = relax_galerkin(op, initial_grid(op, init), o.tend, o.samples);
  } else if (o.method == "particle") {
    if (o.n < 1) throw ConfigError("--n must be positive");
    ParticleEnsemble ens = make_ensemble(p, std::size_t(o.n), run.seed, init);
    tr = relax_particles(p, k, ens, o.tend, o.samples, run.threads);
  } else {
    throw ConfigError("unknown method '" + o.method + "' (expected galerkin or particle)");
  }
  std::vector<CsvRow> rows;
  for (std::size_t i = 0; i < tr.size(); ++i)
    rows.push_back({num(tr.t[i]), num(tr.momentum[i].x()), num(tr.momentum[i].y()), num(tr.momentum[i].z()),
                    num(tr.energy[i]), num(tr.l2dist[i])});
  emit(run, o.out, {"t", "px", "py", "pz", "energy", "l2dist"}, rows);

  std::string field = "l2dist";
  if (o.method == "particle") field = init.kind == Initial::heated ? "energy" : "px";
  if (init.kind == Initial::equilibrium) return;
  try {
    // particle traces flatten into noise; fit the part above 5% of the start
    const double rate = o.method == "particle" ? fit_rate(tr.t, trace_field(tr, p, field), 0.05, 1.0)
                                               : fit_rate(tr, p, field);
    std::cerr << "rate " << field << ' ' << num(rate) << '\n';
  } catch (const NumericError& e) {
    std::cerr << "rate " << field << " unavailable: " << e.what() << '\n';
  }
}

struct CellOpts {
  std::string kernel = "hs", out;
  int res = 16;
};

void cmd_cell(Run& run, const CellOpts& o) {
  const Params& p = run.params;
  const OperatorMatrix op = assemble_operator(p, make_grid(p, o.res), parse_kernel(o.kernel));
  const CellSolution cell = solve_cell_problem(op);
  std::vector<CsvRow> rows;
  for (int i = 0; i < op.size(); ++i) {
    const Vec3 v = op.grid.node(i);
    rows.push_back({num(v.x()), num(v.y()), num(v.z()), num(cell.chi1[i])});
  }
  emit(run, o.out, {"v1", "v2", "v3", "chi1"}, rows);
  const DiffusivityReport r = diffusivity_report(op, cell);
  std::cerr << "d " << num(r.d_value) << "\nresidual " << num(cell.residual) << "\nmean " << num(cell.mean)
            << "\niterations " << cell.iterations << '\n';
}

struct DiffusivityOpts {
  std::string kernel = "maxwell", out;
  int res = 16;
};

void cmd_diffusivity(Run& run, const DiffusivityOpts& o) {
  const Params& p = run.params;
  const Kernel k = parse_kernel(o.kernel);
  Json j;
  j["kernel"] = kernel_name(k);
  if (k == Kernel::maxwell) {
    j["d_value"] = diffusivity_maxwell(p);
    j["provenance"] = "analytic-bound";
    emit_json(run, o.out, j.dump(2));
    std::cout << num(diffusivity_maxwell(p)) << '\n';
    return;
  }
  const OperatorMatrix op = assemble_operator(p, make_grid(p, o.res), k);
  const DiffusivityReport r = diffusivity_hs(op);
  j["res"] = o.res;
  j["d_value"] = r.d_value;
  j["d_lower"] = r.d_lower;
  j["d_upper"] = r.d_upper;
  j["c_hs"] = r.c_hs;
  j["c_star"] = r.c_star;
  j["chi_norm2"] = r.chi_norm2;
  j["cell_residual"] = r.cell_residual;
  j["cell_mean"] = r.cell_mean;
  j["odd_defect"] = r.odd_defect;
  j["cg_iterations"] = r.cg_iterations;
  j["bounds_hold"] = r.bounds_hold;
  j["provenance"] = "measured";
  emit_json(run, o.out, j.dump(2));
  if (!o.out.empty()) std::cout << num(r.d_value) << '\n';
  check(r.bounds_hold, "diffusivity_bounds",
        "D " + num(r.d_value) + " outside [" + num(r.d_lower) + ", " + num(r.d_upper) + "]");
}

struct HydroOpts {
  std::string kernel = "maxwell", out;
  std::vector<double> eps{0.5, 0.25, 0.125};
  int nx = 128, res = 12;
  double tend = 0.1;
};

void cmd_hydrolimit(Run& run, const HydroOpts& o) {
  const Params& p = run.params;
  const Kernel k = parse_kernel(o.kernel);
  const OperatorMatrix op = assemble_operator(p, make_grid(p, o.res), k);
  const double d = k == Kernel::maxwell ? diffusivity_maxwell(p) : diffusivity_hs(op).d_value;
  RescaledOptions opt;
  opt.threads = run.threads;
  const HydroReport rep = hydrolimit_report(op, o.eps, d, o.nx, o.tend, opt);
  std::vector<CsvRow> rows;
  double drift = 0.0;
  for (const HydroRow& r : rep.rows) {
    rows.push_back({num(r.eps), num(r.error), num(r.order), num(r.mass_drift), num(r.continuity_residual),
                    num(r.fick_error), num(r.h_max), num((long long)r.steps), r.first_order ? "1" : "0", num(d)});
    drift = std::max(drift, r.mass_drift);
  }
  emit(run, o.out,
       {"eps", "error", "order", "mass_drift", "continuity_residual", "fick_error", "h_max", "steps", "first_order",
        "d"},
       rows);
  check(drift <= 1e-10, "mass_conservation", "relative mass drift " + num(drift) + " > 1e-10");
  check(rep.decreasing, "hydrolimit_monotone", "E(eps) is not strictly decreasing");
}

// --- plumbing ---

void write_manifest(const Run& run, int code, const std::string& failed, double wall) {
  Json m;
  m["command"] = run.command;
  m["argv"] = run.argv;
  m["config_path"] = run.config_path;
  m["config"] = run.params_loaded ? params_json(run.params) : Json(nullptr);
  m["seed"] = run.seed;
  m["threads"] = run.threads;
  m["versions"] = version;
  m["outputs"] = run.outputs;
  m["exit_code"] = code;
  if (!failed.empty()) m["failed_check"] = failed;
  m["wall_time"] = wall;
  try {
    write_text(run.manifest_path, m.dump(2) + "\n");
  } catch (const IoError& e) {
    std::cerr << "warning: " << e.what() << '\n';
  }
}

}  // namespace

int dispatch(int argc, char** argv) {
  CLI::App app{"Linear granular Boltzmann toolkit"};
  app.set_version_flag("--version", version);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "JSON model parameters (defaults if omitted)");
  app.add_option("--seed", g.seed, "seed for stochastic commands");
  app.add_option("--threads", g.threads, "worker threads (overrides GRANKIN_THREADS)");
  app.add_option("--manifest", g.manifest, "manifest path (default <out>.manifest.json)");

  std::function<void(Run&)> body;
  std::vector<std::string*> outs;
  auto sub = [&](const char* name, const char* help) { return app.add_subcommand(name, help); };

  SpectrumOpts so;
  auto* s = sub("spectrum", "Maxwell-molecule eigenvalue table");
  s->add_option("--nmax", so.nmax);
  s->add_option("--lmax", so.lmax);
  s->add_option("--out", so.out, "CSV (stdout if omitted)");
  s->callback([&] { body = [&](Run& r) { cmd_spectrum(r, so); }; outs = {&so.out}; });

  sub("gap", "spectral gap of the Maxwell operator")->callback([&] { body = cmd_gap; });

  ConstantsOpts co;
  s = sub("constants", "explicit constants with provenance");
  s->add_option("--res", co.res, "grid for the measured gain norm when kappa >= 1/2 (0 skips it)");
  s->add_option("--out", co.out);
  s->callback([&] { body = [&](Run& r) { cmd_constants(r, co); }; outs = {&co.out}; });

  OperatorOpts oo;
  s = sub("operator", "assemble a discretized operator and report its invariants");
  s->add_option("--kernel", oo.kernel)->check(CLI::IsMember({"maxwell", "hs", "hard_sphere"}));
  s->add_option("--res", oo.res);
  s->add_flag("--check", oo.check, "exit 4 on a violated invariant");
  s->add_option("--out", oo.out, "JSON");
  s->callback([&] { body = [&](Run& r) { cmd_operator(r, oo); }; outs = {&oo.out}; });

  CompareOpts cmp;
  s = sub("compare", "hard-sphere vs maxwell entropy production");
  s->add_option("--res", cmp.res);
  s->add_option("--family", cmp.family, "random members of the test family");
  s->add_option("--out", cmp.out, "CSV of ratios");
  s->callback([&] { body = [&](Run& r) { cmd_compare(r, cmp); }; outs = {&cmp.out}; });

  RelaxOpts ro;
  s = sub("relax", "space-homogeneous relaxation trace");
  s->add_option("--kernel", ro.kernel)->check(CLI::IsMember({"maxwell", "hs", "hard_sphere"}));
  s->add_option("--method", ro.method)->check(CLI::IsMember({"galerkin", "particle"}));
  s->add_option("--tend", ro.tend)->required();
  s->add_option("--out", ro.out);
  s->add_option("--res", ro.res);
  s->add_option("--n", ro.n, "particles");
  s->add_option("--samples", ro.samples);
  s->add_option("--init", ro.init)->check(CLI::IsMember({"shifted", "heated", "equilibrium"}));
  s->add_option("--shift", ro.shift);
  s->add_option("--heat", ro.heat);
  s->callback([&] { body = [&](Run& r) { cmd_relax(r, ro); }; outs = {&ro.out}; });

  CellOpts ce;
  s = sub("cell", "solve the cell problem");
  s->add_option("--kernel", ce.kernel)->check(CLI::IsMember({"maxwell", "hs", "hard_sphere"}));
  s->add_option("--res", ce.res);
  s->add_option("--out", ce.out);
  s->callback([&] { body = [&](Run& r) { cmd_cell(r, ce); }; outs = {&ce.out}; });

  DiffusivityOpts dio;
  s = sub("diffusivity", "diffusion coefficient and its bounds");
  s->add_option("--kernel", dio.kernel)->check(CLI::IsMember({"maxwell", "hs", "hard_sphere"}));
  s->add_option("--res", dio.res);
  s->add_option("--out", dio.out, "JSON");
  s->callback([&] { body = [&](Run& r) { cmd_diffusivity(r, dio); }; outs = {&dio.out}; });

  HydroOpts ho;
  s = sub("hydrolimit", "rescaled kinetic equation against the heat equation");
  s->add_option("--kernel", ho.kernel)->check(CLI::IsMember({"maxwell", "hs", "hard_sphere"}));
  s->add_option("--eps", ho.eps)->delimiter(',');
  s->add_option("--nx", ho.nx);
  s->add_option("--tend", ho.tend);
  s->add_option("--res", ho.res);
  s->add_option("--out", ho.out);
  s->callback([&] { body = [&](Run& r) { cmd_hydrolimit(r, ho); }; outs = {&ho.out}; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Run run;
  run.command = app.get_subcommands().front()->get_name();
  for (int i = 0; i < argc; ++i) run.argv.emplace_back(argv[i]);
  run.config_path = g.config;
  for (const std::string* o : outs)
    if (!o->empty() && run.main_out.empty()) run.main_out = *o;
  run.manifest_path = !g.manifest.empty()      ? g.manifest
                      : !run.main_out.empty() ? run.main_out + ".manifest.json"
                                              : run.command + ".manifest.json";
  if (g.seed) run.seed = *g.seed;

  int code = 0;
  std::string failed;
  try {
    run.threads = resolve_threads(g.threads);
    if (!g.config.empty()) run.params = load_params(g.config);
    validate(run.params);
    run.params_loaded = true;
    std::cerr << "seed " << run.seed << '\n';
    body(run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    code = 3;
  } catch (const NumericError& e) {
    std::cerr << "check failed: " << e.what() << '\n';
    failed = e.check;
    code = 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = 1;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(run, code, failed, wall);
  return code;
}

}  // namespace grankin::cli
