#include "jetfb/report.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <ostream>

namespace jetfb {

namespace {

using json = nlohmann::ordered_json;

// JSON has no infinities; they are written as strings
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json pairs(const std::vector<std::array<double, 2>>& v) {
  json a = json::array();
  for (const auto& p : v) a.push_back({number(p[0]), number(p[1])});
  return a;
}

const char* mode_name(solver_mode m) { return m == solver_mode::pde ? "pde" : "minimize"; }

json config_json(const run_config& c) {
  json j;
  j["problem"] = {{"gamma", c.gamma},
                  {"Q", c.q},
                  {"epsilon", c.epsilon},
                  {"hbar", c.hbar},
                  {"nozzle", c.nozzle_kind},
                  {"nozzle_a", c.nozzle_a},
                  {"nozzle_table", c.nozzle_table},
                  {"profile", c.profile_kind},
                  {"u0", c.u0},
                  {"profile_a", c.profile_a},
                  {"profile_b", c.profile_b},
                  {"profile_n", c.profile_n},
                  {"profile_table", c.profile_table}};
  const auto& s = c.solver;
  j["numerics"] = {{"mu", c.domain.mu},
                   {"R", c.domain.r},
                   {"h", c.domain.h},
                   {"s_exp", c.domain.s_exp},
                   {"k_mu", c.domain.k_mu},
                   {"lambda", c.solve_lambda()},
                   {"mode", mode_name(s.mode)},
                   {"max_iterations", s.max_iterations},
                   {"armijo", s.armijo},
                   {"backtrack", s.backtrack},
                   {"max_backtracks", s.max_backtracks},
                   {"energy_rtol", s.energy_rtol},
                   {"residual_tol", s.residual_tol},
                   {"delta_schedule", s.delta_schedule},
                   {"delta_scale", s.delta_scale},
                   {"delta_stages", s.delta_stages},
                   {"sor", s.sor},
                   {"monotone_projection", s.monotone_projection},
                   {"enforce_invariants", s.enforce_invariants},
                   {"workers", s.workers},
                   {"seed", s.seed},
                   {"init_noise", s.init_noise}};
  j["fit"] = {{"lo", c.fit.lo},
              {"hi", c.fit.hi},
              {"tol", c.fit.tol},
              {"lambda_tol", c.fit.lambda_tol},
              {"max_expansions", c.fit.max_expansions},
              {"warm_start", c.fit.warm_start}};
  j["asymptotics"] = {{"lambdas", c.sweep}};
  j["output"] = {{"directory", c.output_dir},
                 {"fields", c.write_fields},
                 {"boundary", c.write_boundary},
                 {"report", c.write_report},
                 {"reproducible_sum", c.reproducible_sum}};
  return j;
}

json verdict(const std::string& name, bool pass, double worst, double tolerance) {
  return {{"name", name}, {"pass", pass}, {"worst", number(worst)}, {"tolerance", number(tolerance)}};
}

}  // namespace

std::string format_sig(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

bool mandatory_invariants_pass(const jet_solution& sol) {
  for (const char* name : {"max_principle", "x_monotone", "subsonic_mach"}) {
    const invariant_check* c = sol.find(name);
    if (c && !c->pass) return false;
  }
  return true;
}

std::string render_report(const report_inputs& in) {
  json r;
  r["command"] = in.command;
  r["status"] = in.status;
  if (!in.error.empty()) r["error"] = in.error;
  if (in.config) r["config"] = config_json(*in.config);
  json inv = json::array();

  if (in.solution) {
    const jet_solution& s = *in.solution;
    json sol;
    sol["lambda"] = s.big_lambda;
    sol["lambda_eps"] = s.lambda_eps;
    sol["delta"] = s.delta;
    sol["energy"] = s.energy;
    sol["residual"] = s.residual;
    sol["iterations"] = s.iterations;
    sol["stalled_stages"] = s.stalled_stages;
    sol["nodes"] = s.psi.size();
    sol["inlet_layer_k_mu"] = s.grid().k_mu();
    sol["deepest_wall_x"] = s.grid().deepest_wall_x();
    json trace = json::array();
    for (const auto& t : s.trace)
      trace.push_back({{"stage", t.stage},
                       {"iteration", t.iteration},
                       {"delta", t.delta},
                       {"energy", t.energy},
                       {"residual", t.residual},
                       {"step", t.step},
                       {"active", t.active}});
    sol["trace"] = trace;
    sol["mandatory_invariants_pass"] = mandatory_invariants_pass(s);
    r["solution"] = sol;
    for (const auto& c : s.invariants) {
      json v = verdict(c.name, c.pass, c.worst, c.tolerance);
      v["x"] = c.x;
      v["y"] = c.y;
      inv.push_back(v);
    }
  }
  if (in.subsonic) {
    const auto& s = *in.subsonic;
    r["subsonic"] = {{"max_ratio", s.max_ratio},
                     {"max_mach", s.max_mach},
                     {"bound", s.bound},
                     {"margin", s.bound - s.max_ratio},
                     {"worst", {s.worst_x, s.worst_y}},
                     {"violations", pairs(s.violations)}};
    inv.push_back(verdict("subsonic_ratio", s.pass, s.max_ratio, s.bound));
  }
  if (in.bernoulli) {
    r["bernoulli"] = {{"max_deviation", in.bernoulli->max_deviation},
                      {"max_mass_deviation", in.bernoulli->max_mass_deviation},
                      {"samples", in.bernoulli->samples}};
  }
  if (in.boundary) {
    const auto& b = *in.boundary;
    r["free_boundary"] = {{"found", b.found},
                          {"level", b.level},
                          {"upsilon_1", number(b.upsilon_1)},
                          {"slope_residual", number(b.slope_residual)},
                          {"h_low", number(b.h_low)},
                          {"graph_samples", b.graph.size()},
                          {"tail_samples", b.tail.size()}};
    inv.push_back(verdict("graph_property", b.graph_ok, 0.0, 0.0));
  }
  if (in.fb_residual) {
    const auto& f = *in.fb_residual;
    r["free_boundary_condition"] = {{"samples", f.samples},
                                    {"max_rel", f.max_rel},
                                    {"mean_rel", f.mean_rel},
                                    {"max_phi", f.max_phi},
                                    {"mean_phi", f.mean_phi},
                                    {"forms_agree", f.agree}};
    inv.push_back(verdict("fb_condition_forms_agree", f.agree, 0.0, 0.0));
  }
  if (in.fit) {
    const auto& f = *in.fit;
    json hist = json::array();
    for (const auto& h : f.history)
      hist.push_back({{"lambda", h.big_lambda},
                      {"upsilon_1", number(h.upsilon_1)},
                      {"found", h.found},
                      {"iterations", h.iterations}});
    r["fit"] = {{"lambda_star", f.big_lambda},
                {"bracket", {f.lo, f.hi}},
                {"final_bracket", {f.final_lo, f.final_hi}},
                {"bisections", f.bisections},
                {"ambiguous", f.ambiguous},
                {"history", hist},
                {"warnings", f.warnings}};
    bool continuous = true;
    for (const auto& w : f.warnings)
      if (w.rfind("Upsilon(1) jumps", 0) == 0) continuous = false;
    inv.push_back(verdict("fit_continuity", continuous, 0.0, 0.0));
  }
  if (in.downstream) {
    const auto& d = *in.downstream;
    r["downstream"] = {{"lambda", d.big_lambda()},
                       {"rho_d", d.rho_d()},
                       {"h_d", d.h_d()},
                       {"p_d", d.pressure()},
                       {"u_axis", d.u(0.0)},
                       {"bernoulli_defect", d.bernoulli_defect()},
                       {"mass_defect", d.mass_defect()}};
    inv.push_back(verdict("downstream_bernoulli", d.bernoulli_defect() <= 1e-8, d.bernoulli_defect(), 1e-8));
    inv.push_back(verdict("downstream_mass_balance", d.mass_defect() <= 1e-8, d.mass_defect(), 1e-8));
    inv.push_back(verdict("downstream_axis_speed", d.u(0.0) > 0.0, d.u(0.0), 0.0));
  }
  if (in.farfield) {
    const auto& f = *in.farfield;
    r["farfield"] = {{"x_upstream", f.x_upstream},
                     {"x_downstream", f.x_downstream},
                     {"upstream_dev", f.upstream_dev},
                     {"downstream_dev", f.downstream_dev},
                     {"h_d", f.h_d}};
  }
  if (in.sweep) {
    json rows = json::array();
    for (const auto& s : *in.sweep)
      rows.push_back({{"lambda", s.big_lambda}, {"rho_d", s.rho_d}, {"h_d", s.h_d}, {"p_d", s.p_d}});
    r["sweep"] = rows;
    inv.push_back(verdict("h_d_decreasing", true, 0.0, 0.0));
  }
  r["invariants"] = inv;
  if (in.elapsed >= 0.0) r["timing"] = {{"elapsed_seconds", in.elapsed}};
  return r.dump(2) + "\n";
}

void write_field_table(std::ostream& out, const jet_solution& sol) {
  const domain_grid& g = sol.grid();
  out << "# x y psi rho u v mach\n";
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i) {
      if (!g.fluid(i, j)) continue;
      const std::size_t n = g.index(i, j);
      out << format_sig(g.x(i)) << ' ' << format_sig(g.y(j)) << ' ' << format_sig(sol.psi[n]) << ' '
          << format_sig(sol.rho[n]) << ' ' << format_sig(sol.u[n]) << ' ' << format_sig(sol.v[n]) << ' '
          << format_sig(sol.mach[n]) << '\n';
    }
}

void write_boundary_polyline(std::ostream& out, const free_boundary& fb) {
  out << "# y x\n";
  for (const auto& p : fb.polyline()) out << format_sig(p[1]) << ' ' << format_sig(p[0]) << '\n';
}

}  // namespace jetfb
