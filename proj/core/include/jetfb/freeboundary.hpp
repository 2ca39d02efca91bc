#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "jetfb/solver.hpp"

namespace jetfb {

struct free_boundary {
  bool found = false;
  double level = 0;                             // contour level Q - delta/2
  std::vector<std::array<double, 2>> graph;     // (y, Upsilon(y)), y increasing
  std::vector<std::array<double, 2>> tail;      // (x, f(x)), x increasing
  double upsilon_1 = 0;                         // Upsilon(1); +infinity without a free boundary
  double slope_residual = 0;                    // Upsilon'(1) - N'(1)
  double h_low = 0;                             // asymptotic height estimate
  bool graph_ok = true;                         // single crossing in every sampled row
  // polyline of Gamma from the orifice downstream, as (x, y)
  std::vector<std::array<double, 2>> polyline() const;
};

// Contours psi = Q - delta/2 of a solution. Raises property_violation when
// a row crosses the level more than once by more than a grid cell.
free_boundary extract_boundary(const jet_solution& sol);
// Same on a bare field; rows at or above y_top are not sampled for the graph.
free_boundary extract_boundary(const domain_grid& grid, const std::vector<double>& psi, double level,
                               double y_top = 1.0);

struct fb_residual_report {
  int samples = 0;
  double max_rel = 0;   // max |(|grad psi / y| - Lambda) / Lambda|
  double mean_rel = 0;
  double max_phi = 0;   // same in the form |Phi(t, Q) - lambda^2| / lambda^2
  double mean_phi = 0;
  bool agree = true;    // both forms give the same sign at every sample
};
fb_residual_report fb_condition_residual(const jet_solution& sol, const free_boundary& fb);

struct fit_step {
  double big_lambda = 0;
  double upsilon_1 = 0;
  bool found = false;
  int iterations = 0;
};

struct fit_options {
  double lo = 0, hi = 0;       // 0 selects (Q / 8, 8 Q)
  double tol = 0;              // |Upsilon(1)| target; 0 selects 2 h
  double lambda_tol = 0;       // bracket width floor; 0 selects 1e-6 Q
  int max_expansions = 3;
  bool warm_start = true;
};

struct fit_result {
  double big_lambda = 0;
  jet_solution solution;
  free_boundary boundary;
  std::vector<fit_step> history;
  double lo = 0, hi = 0;       // effective bracket
  // sign-change bracket holding the returned probe; the root lies within it
  double final_lo = 0, final_hi = 0;
  int bisections = 0;
  bool ambiguous = false;      // stopped on the bracket floor with |Upsilon(1)| > tol
  std::vector<std::string> warnings;
};

// Bracketed bisection for Upsilon(1) = 0 over an arbitrary evaluator. The
// bracket is widened (lo halved, hi doubled) up to max_expansions times; jump is
// the largest change of Upsilon(1) tolerated between probes 1% apart. chosen
// receives the history index of the returned probe. No solution is filled in.
fit_result search_lambda(const std::function<fit_step(double)>& evaluate, double lo, double hi, double tol,
                         double lambda_tol, int max_expansions, double jump, std::size_t* chosen = nullptr);

// Bisection on Lambda for Upsilon(1) = 0.
fit_result fit_lambda(const jet_problem& problem, const solver_config& cfg, const fit_options& opt = {});

}  // namespace jetfb
