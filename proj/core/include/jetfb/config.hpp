#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "jetfb/flow_state.hpp"
#include "jetfb/freeboundary.hpp"
#include "jetfb/geometry.hpp"
#include "jetfb/solver.hpp"

namespace jetfb {

// One run of the command line tool. Read from an INI file with sections
// [problem], [numerics], [fit], [asymptotics] and [output]; unknown sections
// or keys are rejected.
struct run_config {
  // problem
  double gamma = 2.0;
  double q = 4.0;
  double epsilon = 0.1;
  double hbar = 2.0;
  std::string nozzle_kind = "log";  // log | table | rectangle
  double nozzle_a = 1.0;
  std::string nozzle_table;         // two-column file (y, N)
  std::string profile_kind = "constant";  // constant | power | table
  double u0 = 1.0;
  double profile_a = 1.0, profile_b = 0.0, profile_n = 2.0;
  std::string profile_table;        // two-column file (y, u)

  // numerics
  domain_options domain;
  solver_config solver;
  double big_lambda = 0.0;  // fixed Lambda of the solve subcommand; 0 selects 2 Q

  // fit
  fit_options fit;

  // asymptotics sweep
  std::vector<double> sweep;

  // output
  std::string output_dir = "jetfb_out";
  bool write_fields = true;
  bool write_boundary = true;
  bool write_report = true;
  bool reproducible_sum = true;  // omit timing so repeated runs are byte-identical

  // raises configuration errors for values outside their admissible ranges
  void validate() const;
  gas_law make_gas() const;
  upstream_profile make_profile() const;
  upstream_flow make_flow() const;
  nozzle make_nozzle() const;
  double solve_lambda() const { return big_lambda > 0.0 ? big_lambda : 2.0 * q; }
};

run_config parse_config(std::istream& in, const std::string& base_dir = ".");
run_config load_config(const std::string& path);

// Two whitespace-separated columns; '#' starts a comment.
void read_columns(const std::string& path, std::vector<double>& a, std::vector<double>& b);

}  // namespace jetfb
