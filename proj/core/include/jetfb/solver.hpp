#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "jetfb/energy.hpp"
#include "jetfb/flow_state.hpp"
#include "jetfb/geometry.hpp"

namespace jetfb {

// Owns the flow data, the truncated law and the grid of one problem instance.
class jet_problem {
 public:
  jet_problem(const upstream_flow& flow, double eps, const nozzle& nz, const domain_options& opt);
  jet_problem(const jet_problem&) = delete;
  jet_problem& operator=(const jet_problem&) = delete;

  const upstream_flow& flow() const { return *flow_; }
  const truncated_law& law() const { return *law_; }
  const domain_grid& grid() const { return *grid_; }
  double q() const { return flow_->q(); }

 private:
  std::unique_ptr<upstream_flow> flow_;
  std::unique_ptr<truncated_law> law_;
  std::unique_ptr<domain_grid> grid_;
};

enum class solver_mode { minimize, pde };

struct solver_config {
  solver_mode mode = solver_mode::minimize;
  int max_iterations = 400;      // per delta stage (sweeps in pde mode: times 50)
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  double energy_rtol = 1e-10;
  double residual_tol = 1e-8;    // in units of Q / h^2
  // indicator widths; empty selects delta_scale * h * Lambda halved delta_stages - 1 times
  std::vector<double> delta_schedule;
  double delta_scale = 8.0;
  int delta_stages = 3;
  double sor = 1.0;              // relaxation of the pde-mode sweeps
  bool monotone_projection = false;
  bool enforce_invariants = true;
  int workers = 1;
  bool verbose = false;
  // relative amplitude of a seeded perturbation of the initial guess; 0 keeps the blend
  double init_noise = 0.0;
  unsigned long long seed = 1;

  void validate() const;
};

struct trace_entry {
  int stage = 0;
  int iteration = 0;
  double delta = 0;
  double energy = 0;
  double residual = 0;
  double step = 0;
  int active = 0;
};

struct invariant_check {
  std::string name;
  bool pass = true;
  double worst = 0;
  double x = 0, y = 0;  // location of the worst node
  double tolerance = 0;
};

struct jet_solution {
  const jet_problem* problem = nullptr;
  double big_lambda = 0;
  double lambda_eps = 0;
  double delta = 0;
  std::vector<double> psi;  // per grid node; Q on solid nodes
  std::vector<double> psi_x, psi_y, rho, u, v, mach;
  std::vector<std::array<double, 2>> free_boundary;  // (y, x) samples, filled by the fit
  std::vector<trace_entry> trace;
  std::vector<invariant_check> invariants;
  double energy = 0;
  double residual = 0;  // sup of the projected gradient over dual area, in units of Q/h^2
  int iterations = 0;
  int stalled_stages = 0;  // stages ended by a flat energy short of the residual target

  const domain_grid& grid() const { return problem->grid(); }
  // whether node n is in the flow region {psi < Q}
  bool in_flow(std::size_t n) const;
  const invariant_check* find(const std::string& name) const;
};

// Minimizes the smoothed functional, or drives its Euler-Lagrange residual to
// zero in pde mode, for a fixed free-boundary momentum Lambda.
jet_solution solve_fixed_lambda(const jet_problem& problem, double big_lambda, const solver_config& cfg,
                                const std::vector<double>* initial_field = nullptr);

// Linear blend in x of the inlet and outlet data clipped to [0, Q].
std::vector<double> initial_blend(const jet_problem& problem, const boundary_values& bv);

// Fills psi_x, psi_y, rho, u, v, mach from psi.
void compute_derived_fields(jet_solution& sol);
// Maximum principle, monotonicity in x and the sign of v.
std::vector<invariant_check> check_invariants(const jet_solution& sol);

struct subsonic_report {
  double max_ratio = 0;  // max |grad psi / y|^2 / tc(B(psi)) over the flow region
  double max_mach = 0;
  double bound = 0;      // 1 - eps
  bool pass = true;
  std::vector<std::array<double, 2>> violations;  // (x, y) of the first offending nodes
  double worst_x = 0, worst_y = 0;
};
subsonic_report verify_subsonic(const jet_solution& sol);

struct bernoulli_report {
  double max_deviation = 0;       // relative, over 20 sampled streamlines
  double max_mass_deviation = 0;  // relative, over vertical slices
  int samples = 0;
};
bernoulli_report bernoulli_check(const jet_solution& sol);

}  // namespace jetfb
