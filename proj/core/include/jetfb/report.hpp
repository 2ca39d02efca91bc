#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "jetfb/asymptotics.hpp"
#include "jetfb/config.hpp"
#include "jetfb/freeboundary.hpp"
#include "jetfb/solver.hpp"

namespace jetfb {

// Everything a subcommand produced; null members are left out of the report.
struct report_inputs {
  std::string command;
  const run_config* config = nullptr;
  const jet_solution* solution = nullptr;
  const free_boundary* boundary = nullptr;
  const fb_residual_report* fb_residual = nullptr;
  const fit_result* fit = nullptr;
  const downstream_state* downstream = nullptr;
  const farfield_report* farfield = nullptr;
  const subsonic_report* subsonic = nullptr;
  const bernoulli_report* bernoulli = nullptr;
  const std::vector<monotonicity_row>* sweep = nullptr;
  std::string status = "ok";
  std::string error;
  double elapsed = -1.0;  // seconds; negative leaves timing out
};

// Structured diagnostics as an indented JSON document.
std::string render_report(const report_inputs& in);

// Whether every mandatory invariant of the solution passed.
bool mandatory_invariants_pass(const jet_solution& sol);

// Columns x y psi rho u v mach, one row per fluid node, 12 significant digits.
void write_field_table(std::ostream& out, const jet_solution& sol);
// Columns y x along the free boundary from the orifice downstream.
void write_boundary_polyline(std::ostream& out, const free_boundary& fb);

// Value with 12 significant digits in scientific notation.
std::string format_sig(double v);

}  // namespace jetfb
