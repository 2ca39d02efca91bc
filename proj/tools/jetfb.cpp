// jetfb: command line front end for the axisymmetric jet solver.
//
// Exit status: 0 when the run finished and every mandatory invariant passed,
// 2 for configuration errors, 3 for solver failures or failed invariants.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "jetfb/asymptotics.hpp"
#include "jetfb/config.hpp"
#include "jetfb/energy.hpp"
#include "jetfb/errors.hpp"
#include "jetfb/freeboundary.hpp"
#include "jetfb/report.hpp"
#include "jetfb/solver.hpp"

namespace {

using namespace jetfb;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

run_config read_config(const std::string& path) {
  try {
    run_config c = path.empty() ? run_config{} : load_config(path);
    c.solver.workers = workers_from_env(c.solver.workers);
    c.validate();
    return c;
  } catch (const jetfb_error& e) {
    throw config_error(e.what());
  }
}

// Problem assembly failures are input errors: they reject the configured data.
std::unique_ptr<jet_problem> assemble(const run_config& c) {
  try {
    return std::make_unique<jet_problem>(c.make_flow(), c.epsilon, c.make_nozzle(), c.domain);
  } catch (const jetfb_error& e) {
    throw config_error(e.what());
  }
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

class artifacts {
 public:
  explicit artifacts(const run_config& c) : c_(c), dir_(c.output_dir) { std::filesystem::create_directories(dir_); }

  void fields(const jet_solution& sol) const {
    if (!c_.write_fields) return;
    std::ofstream out(dir_ / "fields.txt");
    write_field_table(out, sol);
  }
  void boundary(const free_boundary& fb) const {
    if (!c_.write_boundary) return;
    std::ofstream out(dir_ / "boundary.txt");
    write_boundary_polyline(out, fb);
  }
  void report(report_inputs in, double elapsed) const {
    if (!c_.write_report) return;
    in.config = &c_;
    if (!c_.reproducible_sum) in.elapsed = elapsed;
    write_text(dir_ / "report.json", render_report(in));
  }

 private:
  const run_config& c_;
  std::filesystem::path dir_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_invariants(const jet_solution& sol, const subsonic_report& sub) {
  for (const auto& c : sol.invariants)
    std::printf("%-26s %s worst %.6e at (%.6g, %.6g)\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.worst, c.x, c.y);
  std::printf("%-26s %s max ratio %.6e bound %.6g\n", "subsonic_ratio", sub.pass ? "PASS" : "FAIL", sub.max_ratio,
              sub.bound);
}

// ---------------------------------------------------------------- subcommands

int run_probe(const run_config& c, double t, double z) {
  const upstream_flow flow = c.make_flow();
  const truncated_law law(flow, c.epsilon);
  const auto s = law.state(z);
  std::printf("B %.12g tc %.12g\n", s.b, s.tc);
  if (t < s.tc) {
    const auto ex = law.exact(t, z);
    std::printf("g %.12g g_t %.12g g_z %.12g\n", ex.g, ex.g_t, ex.g_z);
  } else {
    std::printf("g undefined: t >= tc\n");
  }
  const auto tr = law.eval(t, z);
  std::printf("g_eps %.12g g_eps_t %.12g g_eps_z %.12g\n", tr.g, tr.g_t, tr.g_z);
  return 0;
}

int run_solve(const run_config& c, const std::string& command) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto problem = assemble(c);
  const artifacts out(c);
  report_inputs rep;
  rep.command = command;
  try {
    solver_config cfg = c.solver;
    // invariants are checked here so that the artifacts are written either way
    cfg.enforce_invariants = false;
    const jet_solution sol = solve_fixed_lambda(*problem, c.solve_lambda(), cfg);
    const subsonic_report sub = verify_subsonic(sol);
    const bernoulli_report ber = bernoulli_check(sol);
    const farfield_report far = farfield_compare(sol, nullptr);
    std::optional<free_boundary> fb;
    std::optional<fb_residual_report> fbr;
    if (!problem->grid().is_rectangle()) {
      fb = extract_boundary(sol);
      if (fb->found) fbr = fb_condition_residual(sol, *fb);
    }
    rep.solution = &sol;
    rep.subsonic = &sub;
    rep.bernoulli = &ber;
    rep.farfield = &far;
    if (fb) rep.boundary = &*fb;
    if (fbr) rep.fb_residual = &*fbr;
    const bool ok = mandatory_invariants_pass(sol);
    rep.status = ok ? "ok" : "invariant_failure";
    out.fields(sol);
    if (fb) out.boundary(*fb);
    out.report(rep, seconds_since(t0));

    std::printf("lambda %.12g energy %.12g residual %.3e iterations %d\n", sol.big_lambda, sol.energy, sol.residual,
                sol.iterations);
    if (fb) std::printf("upsilon_1 %.12g found %d\n", fb->upsilon_1, fb->found ? 1 : 0);
    if (command == "verify") print_invariants(sol, sub);
    return ok ? 0 : kExitSolver;
  } catch (const jetfb_error& e) {
    rep.status = "failed";
    rep.error = e.what();
    out.report(rep, seconds_since(t0));
    std::fprintf(stderr, "jetfb: %s\n", e.what());
    return kExitSolver;
  }
}

int run_fit(const run_config& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto problem = assemble(c);
  const artifacts out(c);
  report_inputs rep;
  rep.command = "fit";
  try {
    solver_config cfg = c.solver;
    cfg.enforce_invariants = false;
    const fit_result fit = fit_lambda(*problem, cfg, c.fit);
    const jet_solution& sol = fit.solution;
    const subsonic_report sub = verify_subsonic(sol);
    const bernoulli_report ber = bernoulli_check(sol);
    const fb_residual_report fbr = fb_condition_residual(sol, fit.boundary);
    std::unique_ptr<downstream_state> ds;
    std::string ds_note;
    try {
      ds = std::make_unique<downstream_state>(problem->flow(), fit.big_lambda);
    } catch (const jetfb_error& e) {
      ds_note = e.what();
    }
    const farfield_report far = farfield_compare(sol, ds.get());
    rep.solution = &sol;
    rep.boundary = &fit.boundary;
    rep.fb_residual = &fbr;
    rep.fit = &fit;
    rep.subsonic = &sub;
    rep.bernoulli = &ber;
    rep.farfield = &far;
    rep.downstream = ds.get();
    const bool ok = mandatory_invariants_pass(sol);
    rep.status = ok ? "ok" : "invariant_failure";
    if (!ds_note.empty()) rep.error = "downstream state unavailable: " + ds_note;
    out.fields(sol);
    out.boundary(fit.boundary);
    out.report(rep, seconds_since(t0));

    std::printf("lambda_star %.12g upsilon_1 %.6e slope_residual %.6e bisections %d\n", fit.big_lambda,
                fit.boundary.upsilon_1, fit.boundary.slope_residual, fit.bisections);
    std::printf("fb_condition mean %.6e max %.6e\n", fbr.mean_rel, fbr.max_rel);
    if (ds) std::printf("h_num %.12g h_d %.12g\n", fit.boundary.h_low, ds->h_d());
    for (const auto& w : fit.warnings) std::fprintf(stderr, "jetfb: warning: %s\n", w.c_str());
    if (!ds_note.empty()) std::fprintf(stderr, "jetfb: %s\n", rep.error.c_str());
    return ok ? 0 : kExitSolver;
  } catch (const jetfb_error& e) {
    rep.status = "failed";
    rep.error = e.what();
    out.report(rep, seconds_since(t0));
    std::fprintf(stderr, "jetfb: %s\n", e.what());
    return kExitSolver;
  }
}

int run_asymptotics(const run_config& c, std::vector<double> lambdas) {
  if (lambdas.empty()) lambdas = c.sweep;
  if (lambdas.empty()) throw config_error("asymptotics needs a Lambda list ([asymptotics] lambdas or --lambda)");
  upstream_flow flow = [&] {
    try {
      return c.make_flow();
    } catch (const jetfb_error& e) {
      throw config_error(e.what());
    }
  }();
  try {
    const auto rows = lambda_monotonicity_probe(flow, lambdas);
    std::printf("# lambda rho_d H_d p_d\n");
    for (const auto& r : rows)
      std::printf("%s %s %s %s\n", format_sig(r.big_lambda).c_str(), format_sig(r.rho_d).c_str(),
                  format_sig(r.h_d).c_str(), format_sig(r.p_d).c_str());
    return 0;
  } catch (const jetfb_error& e) {
    std::fprintf(stderr, "jetfb: %s\n", e.what());
    return kExitSolver;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Axisymmetric subsonic jet free-boundary solver"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "INI configuration file");

  auto* probe = app.add_subcommand("probe", "evaluate g and its derivatives at (t, z)");
  double t = 0.0, z = 0.0;
  probe->add_option("--t", t, "squared momentum")->required();
  probe->add_option("--z", z, "stream function value")->required();

  auto* solve = app.add_subcommand("solve", "solve at a fixed Lambda");
  double lambda = 0.0;
  solve->add_option("--lambda", lambda, "free-boundary momentum");

  auto* fit = app.add_subcommand("fit", "fit Lambda for a continuous free boundary");
  auto* asym = app.add_subcommand("asymptotics", "downstream states over a Lambda sweep");
  std::vector<double> lambdas;
  asym->add_option("--lambda", lambdas, "Lambda values");
  auto* verify = app.add_subcommand("verify", "solve and print every invariant verdict");
  verify->add_option("--lambda", lambda, "free-boundary momentum");

  for (auto* sub : {probe, solve, fit, asym, verify}) sub->add_option("-c,--config", config_path, "INI configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    run_config c = read_config(config_path);
    if (lambda > 0.0) c.big_lambda = lambda;
    if (*probe) return run_probe(c, t, z);
    if (*solve) return run_solve(c, "solve");
    if (*verify) return run_solve(c, "verify");
    if (*fit) return run_fit(c);
    if (*asym) return run_asymptotics(c, lambdas);
  } catch (const config_error& e) {
    std::fprintf(stderr, "jetfb: %s\n", e.what());
    return kExitConfig;
  } catch (const jetfb_error& e) {
    std::fprintf(stderr, "jetfb: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "jetfb: %s\n", e.what());
    return kExitSolver;
  }
  return 0;
}
