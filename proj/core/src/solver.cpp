#include "jetfb/solver.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "jetfb/errors.hpp"

namespace jetfb {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// nodes within this relative distance of Q count as coincidence nodes
constexpr double kTie = 1e-14;
// energy stagnation within this factor of the residual target ends a stage
constexpr double kStallFactor = 100.0;

struct stage_result {
  double energy = 0;
  double residual = 0;
  int iterations = 0;
  bool stalled = false;
};

// Projected preconditioned nonlinear conjugate gradients on the box [0, Q].
// The preconditioner is a sparse Cholesky factor of the Hessian restricted to
// the free variables, so steps are close to projected Newton steps.
class projected_cg {
 public:
  projected_cg(const discrete_energy& e, const solver_config& cfg, double q, double res_scale)
      : e_(e), cfg_(cfg), q_(q), res_scale_(res_scale), n_(e.size()) {
    const auto& cp = e.hessian_col_ptr();
    const auto& ri = e.hessian_row_index();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(ri.size());
    for (std::size_t c = 0; c < n_; ++c)
      for (int p = cp[c]; p < cp[c + 1]; ++p) trip.emplace_back(ri[p], static_cast<int>(c), 1.0);
    h_.resize(static_cast<int>(n_), static_cast<int>(n_));
    h_.setFromTriplets(trip.begin(), trip.end());
    h_.makeCompressed();
    llt_.cholmod().print = 0;
    llt_.analyzePattern(h_);
  }

  stage_result run(std::vector<double>& x, int stage, std::vector<trace_entry>& trace) {
    stage_result out;
    std::vector<double> g, s(n_), s_prev, d(n_), d_prev, g_prev, trial(n_);
    std::vector<char> active(n_, 0), active_prev;
    double energy = e_.gradient(x, g);
    int flat = 0;
    for (int it = 0;; ++it) {
      const double res = residual(x, g);
      out = {energy, res, it};
      if (res <= cfg_.residual_tol) break;
      if (it >= cfg_.max_iterations)
        raise(error_kind::non_convergence, "iteration limit reached in stage " + std::to_string(stage) +
                                               " with residual " + fmt(res) + " Q/h^2");
      const std::vector<double> diag = factorize(x, g, active);
      // preconditioned gradient; active variables use their diagonal scaling
      Eigen::VectorXd rhs(n_);
      for (std::size_t k = 0; k < n_; ++k) rhs[k] = g[k];
      Eigen::VectorXd sol = llt_.solve(rhs);
      for (std::size_t k = 0; k < n_; ++k) s[k] = active[k] ? g[k] / diag[k] : sol[k];
      double beta = 0.0;
      if (!s_prev.empty() && active == active_prev) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < n_; ++k) {
          if (active[k]) continue;
          num += g[k] * (s[k] - s_prev[k]);
          den += g_prev[k] * s_prev[k];
        }
        if (den > 0.0) beta = std::max(0.0, num / den);
      }
      double slope = 0.0;
      for (std::size_t k = 0; k < n_; ++k) {
        d[k] = active[k] || beta == 0.0 ? -s[k] : -s[k] + beta * d_prev[k];
        if (!active[k]) slope += g[k] * d[k];
      }
      if (!(slope < 0.0)) {
        // not a descent direction on the free set: restart from the preconditioned gradient
        slope = 0.0;
        for (std::size_t k = 0; k < n_; ++k) {
          d[k] = -s[k];
          if (!active[k]) slope += g[k] * d[k];
        }
        if (!(slope < 0.0)) {
          for (std::size_t k = 0; k < n_; ++k) {
            d[k] = -g[k] / diag[k];
            if (!active[k]) slope += g[k] * d[k];
          }
        }
      }
      // projected Armijo search along the arc P[x + alpha d]
      double alpha = 1.0, e_trial = 0.0;
      bool accepted = false;
      for (int b = 0; b <= cfg_.max_backtracks; ++b) {
        double predicted = alpha * slope;
        for (std::size_t k = 0; k < n_; ++k) {
          trial[k] = std::clamp(x[k] + alpha * d[k], 0.0, q_);
          if (active[k]) predicted += g[k] * (trial[k] - x[k]);
        }
        if (cfg_.monotone_projection) monotone_fix(trial);
        e_trial = e_.value(trial);
        const double roundoff = 1e-13 * std::max(1.0, std::abs(energy));
        if (e_trial <= energy + cfg_.armijo * predicted ||
            (-predicted < roundoff && e_trial <= energy + roundoff)) {
          accepted = true;
          break;
        }
        alpha *= cfg_.backtrack;
      }
      if (!accepted) {
        raise(error_kind::non_convergence, "line search failed in stage " + std::to_string(stage) + " with residual " +
                                               fmt(res) + " Q/h^2");
      }
      int n_active = 0;
      for (char a : active) n_active += a;
      const double decrease = energy - e_trial;
      std::swap(x, trial);
      g_prev = g;
      s_prev = s;
      d_prev = d;
      active_prev = active;
      energy = e_.gradient(x, g);
      trace.push_back({stage, it + 1, e_.delta(), energy, residual(x, g), alpha, n_active});
      if (cfg_.verbose)
        std::fprintf(stderr, "stage %d it %d energy %.15g residual %.3e step %.3g active %d\n", stage, it + 1, energy,
                     trace.back().residual, alpha, n_active);
      flat = decrease <= cfg_.energy_rtol * std::max(1.0, std::abs(energy)) ? flat + 1 : 0;
      if (flat >= 20 && trace.back().residual > cfg_.residual_tol) {
        // a flat energy close to the residual target is accepted as converged
        if (trace.back().residual <= kStallFactor * cfg_.residual_tol) {
          out = {energy, trace.back().residual, it + 1, true};
          break;
        }
        raise(error_kind::non_convergence, "energy stagnated in stage " + std::to_string(stage) + " with residual " +
                                               fmt(trace.back().residual) + " Q/h^2");
      }
    }
    return out;
  }

  // sup of the projected gradient over dual area, in units of Q / h^2
  double residual(const std::vector<double>& x, const std::vector<double>& g) const {
    const auto& dual = e_.dual_area();
    double m = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      double pg = g[k];
      if (x[k] <= 0.0 && pg > 0.0) pg = 0.0;
      if (x[k] >= q_ && pg < 0.0) pg = 0.0;
      m = std::max(m, std::abs(pg) / dual[k]);
    }
    return m / res_scale_;
  }

 private:
  // Factorizes the reduced Hessian at x and marks the epsilon-active set.
  // Returns the Hessian diagonal used for the active variables.
  std::vector<double> factorize(const std::vector<double>& x, const std::vector<double>& g, std::vector<char>& active) {
    const auto& cp = e_.hessian_col_ptr();
    const auto& ri = e_.hessian_row_index();
    std::vector<double> vals = e_.hessian_values(x, hessian_kind::exact);
    std::vector<double> diag(n_);
    auto diagonal_of = [&](const std::vector<double>& v) {
      bool positive = true;
      for (std::size_t k = 0; k < n_; ++k) {
        positive = positive && v[cp[k]] > 0.0;
        diag[k] = std::max(v[cp[k]], 1e-300);
      }
      return positive;
    };
    bool exact_ok = diagonal_of(vals);
    double width = 0.0;
    for (std::size_t k = 0; k < n_; ++k) width = std::max(width, std::abs(x[k] - std::clamp(x[k] - g[k] / diag[k], 0.0, q_)));
    const double eps = std::min(1e-3 * q_, width);
    for (std::size_t k = 0; k < n_; ++k)
      active[k] = (x[k] <= eps && g[k] > 0.0) || (x[k] >= q_ - eps && g[k] < 0.0);
    // keep as much of the indefinite part as still factorizes
    const std::vector<double> exact = vals;
    const std::vector<double> convex = e_.hessian_values(x, hessian_kind::convexified);
    static constexpr double kTheta[] = {1.0, 0.9, 0.5, 0.0};
    // start one level above the last blend that factorized
    for (int level = std::max(0, level_ - 1); level < 4; ++level) {
      const double theta = kTheta[level];
      if (theta == 1.0 && !exact_ok) continue;
      for (std::size_t p = 0; p < vals.size(); ++p) vals[p] = convex[p] + theta * (exact[p] - convex[p]);
      diagonal_of(vals);
      for (std::size_t c = 0; c < n_; ++c)
        for (int p = cp[c]; p < cp[c + 1]; ++p) {
          const std::size_t r = ri[p];
          if (r == c) vals[p] = diag[c];
          else if (active[r] || active[c]) vals[p] = 0.0;
        }
      std::copy(vals.begin(), vals.end(), h_.valuePtr());
      llt_.factorize(h_);
      if (llt_.info() == Eigen::Success) {
        level_ = level;
        return diag;
      }
    }
    raise(error_kind::non_convergence, "preconditioner is not positive definite");
  }

  void monotone_fix(std::vector<double>& x) const {
    for (std::size_t k = 0; k < n_; ++k) {
      const int i = e_.unknown_i(k), j = e_.unknown_j(k);
      if (i == 0) continue;
      const long w = e_.unknown_at(i - 1, j);
      if (w >= 0) x[k] = std::max(x[k], x[w]);
    }
  }

  const discrete_energy& e_;
  const solver_config& cfg_;
  double q_, res_scale_;
  std::size_t n_;
  int level_ = 0;
  Eigen::SparseMatrix<double> h_;
  Eigen::CholmodSimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower> llt_;
};

// Red-black nonlinear Gauss-Seidel on the Euler-Lagrange equations with the
// coincidence set frozen for each pass, followed by one sweep over it.
stage_result run_pde(const discrete_energy& e, std::vector<double>& x, const solver_config& cfg, double q,
                     double res_scale, int stage, std::vector<trace_entry>& trace) {
  const std::size_t n = e.size();
  std::vector<double> ext = e.extended(x);
  std::vector<char> coincide(n);
  const int max_sweeps = 50 * cfg.max_iterations;
  auto measure = [&]() {
    std::copy(ext.begin(), ext.begin() + n, x.begin());
    const auto r = e.el_residual(x);
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    return m / res_scale;
  };
  auto relax = [&](std::size_t k, bool with_indicator, double omega) {
    double g = 0.0, c = 0.0;
    e.local_derivatives(ext, k, with_indicator, g, c);
    if (c > 0.0) ext[k] = std::clamp(ext[k] - omega * g / c, 0.0, q);
  };
  stage_result out;
  for (int sweep = 1;; ++sweep) {
    for (std::size_t k = 0; k < n; ++k) coincide[k] = ext[k] >= q - e.delta();
    for (int colour = 0; colour < 2; ++colour)
      for (std::size_t k = 0; k < n; ++k)
        if (!coincide[k] && (e.unknown_i(k) + e.unknown_j(k)) % 2 == colour) relax(k, false, cfg.sor);
    for (std::size_t k = 0; k < n; ++k)
      if (coincide[k]) relax(k, true, 1.0);
    if (sweep % 10 == 0 || sweep == max_sweeps) {
      const double res = measure();
      out = {e.value(x), res, sweep};
      trace.push_back({stage, sweep, e.delta(), out.energy, res, cfg.sor, 0});
      if (cfg.verbose)
        std::fprintf(stderr, "stage %d sweep %d energy %.15g residual %.3e\n", stage, sweep, out.energy, res);
      if (res <= cfg.residual_tol) break;
      if (sweep >= max_sweeps)
        raise(error_kind::non_convergence, "sweep limit reached in stage " + std::to_string(stage) + " with residual " +
                                               fmt(res) + " Q/h^2");
    }
  }
  return out;
}

// Derivative from values at signed offsets; second order when both sides exist.
double difference(bool has_w, double fw, double hw, double f0, bool has_e, double fe, double he) {
  if (has_w && has_e) return (hw * hw * (fe - f0) + he * he * (f0 - fw)) / (he * hw * (he + hw));
  if (has_e) return (fe - f0) / he;
  if (has_w) return (f0 - fw) / hw;
  return 0.0;
}

}  // namespace

// ---------------------------------------------------------------- problem

jet_problem::jet_problem(const upstream_flow& flow, double eps, const nozzle& nz, const domain_options& opt)
    : flow_(std::make_unique<upstream_flow>(flow)) {
  if (!(flow_->q() > flow_->q_tilde()))
    raise(error_kind::supersonic_input, "Q = " + fmt(flow_->q()) + " must exceed the subsonic threshold " +
                                            fmt(flow_->q_tilde()));
  law_ = std::make_unique<truncated_law>(*flow_, eps);
  if (std::abs(nz.hbar() - flow_->hbar()) > 1e-12 * flow_->hbar())
    raise(error_kind::parameter, "nozzle height differs from the upstream profile height");
  grid_ = std::make_unique<domain_grid>(nz, opt);
  grid_->select_inlet_layer(*law_);
}

void solver_config::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) raise(error_kind::configuration, what);
  };
  need(max_iterations > 0, "max_iterations must be positive");
  need(armijo > 0.0 && armijo < 1.0, "armijo must lie in (0, 1)");
  need(backtrack > 0.0 && backtrack < 1.0, "backtrack must lie in (0, 1)");
  need(max_backtracks > 0, "max_backtracks must be positive");
  need(energy_rtol > 0.0, "energy_rtol must be positive");
  need(residual_tol > 0.0, "residual_tol must be positive");
  need(delta_scale > 0.0, "delta_scale must be positive");
  need(delta_stages > 0, "delta_stages must be positive");
  for (double d : delta_schedule) need(d > 0.0, "delta schedule entries must be positive");
  for (std::size_t k = 1; k < delta_schedule.size(); ++k)
    need(delta_schedule[k] <= delta_schedule[k - 1], "delta schedule must be nonincreasing");
  need(sor > 0.0 && sor < 2.0, "sor must lie in (0, 2)");
  need(workers > 0, "workers must be positive");
  need(init_noise >= 0.0 && init_noise <= 1.0, "init_noise must lie in [0, 1]");
}

bool jet_solution::in_flow(std::size_t n) const {
  const double q = problem->q();
  const auto& g = grid();
  const int i = static_cast<int>(n % (g.nx() + 1)), j = static_cast<int>(n / (g.nx() + 1));
  return g.kind(i, j) != node_kind::solid && psi[n] < q * (1.0 - kTie);
}

const invariant_check* jet_solution::find(const std::string& name) const {
  for (const auto& c : invariants)
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<double> initial_blend(const jet_problem& problem, const boundary_values& bv) {
  const domain_grid& g = problem.grid();
  const double q = problem.q();
  const double length = g.options().mu + g.options().r;
  std::vector<double> field(g.node_count(), q);
  for (int j = 0; j < g.ny(); ++j) {
    const double y = g.y(j);
    const double in = g.is_rectangle() ? problem.flow().psi_bar(y) : inlet_profile(g, q, y);
    const double out = g.is_rectangle() ? problem.flow().psi_bar(y) : outlet_profile(y, bv.lambda, q);
    for (int i = 0; i <= g.nx(); ++i) {
      if (!g.fluid(i, j)) continue;
      const double s = (g.x(i) + g.options().mu) / length;
      field[g.index(i, j)] = std::clamp((1.0 - s) * in + s * out, 0.0, q);
    }
  }
  return field;
}

// ---------------------------------------------------------------- solve

jet_solution solve_fixed_lambda(const jet_problem& problem, double big_lambda, const solver_config& cfg,
                                const std::vector<double>* initial_field) {
  cfg.validate();
  if (!(big_lambda > 0.0) || !std::isfinite(big_lambda)) raise(error_kind::invalid_lambda, "Lambda must be positive");
  const domain_grid& g = problem.grid();
  const double q = problem.q();
  const boundary_values bv = boundary_data(g, problem.flow(), big_lambda);

  discrete_energy e(g, problem.law());
  e.set_boundary(bv);
  e.set_workers(cfg.workers);

  jet_solution sol;
  sol.problem = &problem;
  sol.big_lambda = big_lambda;
  // the strip has no free boundary, so the indicator term is dropped there
  sol.lambda_eps = g.is_rectangle() ? 0.0 : problem.law().lambda(big_lambda, true);

  std::vector<double> deltas = cfg.delta_schedule;
  if (deltas.empty()) {
    const double h = std::max(g.hx(), g.hy());
    double d = cfg.delta_scale * h * big_lambda;
    for (int s = 0; s < cfg.delta_stages; ++s, d *= 0.5) deltas.push_back(std::min(d, 0.5 * q));
  }
  if (g.is_rectangle()) deltas = {deltas.back()};

  std::vector<double> field = initial_field ? *initial_field : initial_blend(problem, bv);
  if (field.size() != g.node_count()) raise(error_kind::domain, "initial field does not match the grid");
  std::vector<double> x = e.gather(field);
  if (cfg.init_noise > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (double& v : x) v = std::clamp(v + cfg.init_noise * q * unit(rng), 0.0, q);
  }
  for (double& v : x) v = std::clamp(v, 0.0, q);

  const double res_scale = q / (g.hx() * g.hy());
  std::unique_ptr<projected_cg> cg;
  if (cfg.mode == solver_mode::minimize) cg = std::make_unique<projected_cg>(e, cfg, q, res_scale);
  stage_result last;
  for (std::size_t s = 0; s < deltas.size(); ++s) {
    e.set_indicator(sol.lambda_eps, deltas[s]);
    const int stage = static_cast<int>(s);
    last = cfg.mode == solver_mode::minimize ? cg->run(x, stage, sol.trace)
                                             : run_pde(e, x, cfg, q, res_scale, stage, sol.trace);
    sol.iterations += last.iterations;
    if (last.stalled) ++sol.stalled_stages;
  }
  sol.delta = deltas.back();
  sol.energy = last.energy;
  sol.residual = last.residual;
  sol.psi = e.scatter(x);
  compute_derived_fields(sol);
  sol.invariants = check_invariants(sol);
  if (cfg.enforce_invariants) {
    for (const char* name : {"max_principle", "x_monotone", "subsonic_mach"}) {
      const invariant_check* c = sol.find(name);
      if (c && !c->pass)
        raise(error_kind::qualitative_failure, std::string(name) + " violated: worst " + fmt(c->worst) + " at (" +
                                                   fmt(c->x) + ", " + fmt(c->y) + ")");
    }
  }
  return sol;
}

// ---------------------------------------------------------------- derived fields

void compute_derived_fields(jet_solution& sol) {
  const domain_grid& g = sol.grid();
  const truncated_law& law = sol.problem->law();
  const gas_law& gas = sol.problem->flow().gas();
  const double q = sol.problem->q();
  const std::size_t nn = g.node_count();
  for (auto* f : {&sol.psi_x, &sol.psi_y, &sol.rho, &sol.u, &sol.v, &sol.mach}) f->assign(nn, 0.0);
  auto neighbour = [&](int i, int j, direction d, double& val, double& dist) {
    dist = g.link(i, j, d);
    if (g.link_to_wall(i, j, d)) {
      val = q;
      return true;
    }
    int ii = i, jj = j;
    switch (d) {
      case direction::east: ++ii; break;
      case direction::west: --ii; break;
      case direction::north: ++jj; break;
      case direction::south: --jj; break;
    }
    if (jj < 0) {
      val = 0.0;
      return true;
    }
    if (ii < 0 || ii > g.nx() || jj >= g.ny() || !g.fluid(ii, jj)) return false;
    val = sol.psi[g.index(ii, jj)];
    return true;
  };
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i) {
      if (!g.fluid(i, j)) continue;
      const std::size_t n = g.index(i, j);
      const double f0 = sol.psi[n];
      double fe = 0, he = 0, fw = 0, hw = 0, fn = 0, hn = 0, fs = 0, hs = 0;
      const bool e_ok = neighbour(i, j, direction::east, fe, he);
      const bool w_ok = neighbour(i, j, direction::west, fw, hw);
      const bool n_ok = neighbour(i, j, direction::north, fn, hn);
      const bool s_ok = neighbour(i, j, direction::south, fs, hs);
      const double px = difference(w_ok, fw, hw, f0, e_ok, fe, he);
      const double py = difference(s_ok, fs, hs, f0, n_ok, fn, hn);
      sol.psi_x[n] = px;
      sol.psi_y[n] = py;
      if (!sol.in_flow(n)) continue;
      const double y = g.y(j);
      const double t = (px * px + py * py) / (y * y);
      const double gi = law.eval(t, f0).g;
      sol.rho[n] = 1.0 / gi;
      sol.u[n] = gi * py / y;
      sol.v[n] = -gi * px / y;
      sol.mach[n] = std::hypot(sol.u[n], sol.v[n]) / gas.sound_speed(sol.rho[n]);
    }
}

std::vector<invariant_check> check_invariants(const jet_solution& sol) {
  const domain_grid& g = sol.grid();
  const double q = sol.problem->q();
  const double h = std::max(g.hx(), g.hy());
  const double tol_mono = 1e-10 * q / g.hx();
  invariant_check bounds{"max_principle", true, 0, 0, 0, 0};
  invariant_check mono{"x_monotone", true, 0, 0, 0, tol_mono};
  invariant_check strict{"strict_interior_monotone", true, 0, 0, 0, tol_mono};
  invariant_check vneg{"v_negative", true, 0, 0, 0, tol_mono * sol.problem->law().g_star()};
  invariant_check mach{"subsonic_mach", true, 0, 0, 0, 1.0};
  invariant_check bracket{"comparison_bracket", true, 0, 0, 0, 1e-12 * q};
  double min_px = 1e300, min_px_strict = 1e300, max_v = -1e300;

  auto far_from_boundary = [&](int i, int j) {
    const double x = g.x(i), y = g.y(j);
    if (x - g.x(0) <= 5 * h || g.x(g.nx()) - x <= 5 * h || y <= 5 * h) return false;
    // distance to the solid region along the four axes
    for (int k = 1; k <= 5; ++k)
      for (auto [di, dj] : {std::pair{k, 0}, std::pair{-k, 0}, std::pair{0, k}, std::pair{0, -k}}) {
        const int ii = i + di, jj = j + dj;
        if (ii < 0 || ii > g.nx() || jj >= g.ny() || (jj >= 0 && !g.fluid(ii, jj))) return false;
      }
    return true;
  };

  for (int j = 0; j < g.ny(); ++j) {
    const double y = g.y(j);
    const double lower = g.is_rectangle() ? sol.problem->flow().psi_bar(y) : inlet_profile(g, q, y);
    const double upper = g.is_rectangle() ? sol.problem->flow().psi_bar(y) : outlet_profile(y, sol.big_lambda, q);
    for (int i = 0; i <= g.nx(); ++i) {
      if (!g.fluid(i, j)) continue;
      const std::size_t n = g.index(i, j);
      const double p = sol.psi[n];
      const double out_of_box = std::max(-p, p - q);
      if (out_of_box > bounds.worst) {
        bounds.worst = out_of_box;
        bounds.x = g.x(i);
        bounds.y = y;
      }
      const double off = std::max(lower - p, p - upper);
      if (off > bracket.worst) {
        bracket.worst = off;
        bracket.x = g.x(i);
        bracket.y = y;
      }
      if (g.kind(i, j) != node_kind::interior) continue;
      if (sol.psi_x[n] < min_px) {
        min_px = sol.psi_x[n];
        mono.x = g.x(i);
        mono.y = y;
      }
      if (sol.in_flow(n) && sol.mach[n] > mach.worst) {
        mach.worst = sol.mach[n];
        mach.x = g.x(i);
        mach.y = y;
      }
      if (p > 0.0 && sol.in_flow(n) && far_from_boundary(i, j)) {
        if (sol.psi_x[n] < min_px_strict) {
          min_px_strict = sol.psi_x[n];
          strict.x = g.x(i);
          strict.y = y;
        }
        if (sol.v[n] > max_v) {
          max_v = sol.v[n];
          vneg.x = g.x(i);
          vneg.y = y;
        }
      }
    }
  }
  bounds.pass = bounds.worst <= 0.0;
  mono.worst = min_px == 1e300 ? 0.0 : min_px;
  mono.pass = mono.worst >= -tol_mono;
  strict.worst = min_px_strict == 1e300 ? 0.0 : min_px_strict;
  strict.pass = strict.worst >= -tol_mono;
  vneg.worst = max_v == -1e300 ? 0.0 : max_v;
  vneg.pass = vneg.worst <= vneg.tolerance;
  mach.pass = mach.worst < 1.0;
  bracket.pass = bracket.worst <= bracket.tolerance;
  return {bounds, mono, strict, vneg, mach, bracket};
}

// ---------------------------------------------------------------- reports

subsonic_report verify_subsonic(const jet_solution& sol) {
  const domain_grid& g = sol.grid();
  const truncated_law& law = sol.problem->law();
  subsonic_report rep;
  rep.bound = 1.0 - law.eps();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i) {
      const std::size_t n = g.index(i, j);
      if (!g.fluid(i, j) || !sol.in_flow(n)) continue;
      const double y = g.y(j);
      const double t = (sol.psi_x[n] * sol.psi_x[n] + sol.psi_y[n] * sol.psi_y[n]) / (y * y);
      const double ratio = t / law.state(sol.psi[n]).tc;
      if (ratio > rep.max_ratio) {
        rep.max_ratio = ratio;
        rep.worst_x = g.x(i);
        rep.worst_y = y;
      }
      rep.max_mach = std::max(rep.max_mach, sol.mach[n]);
      if (ratio > rep.bound && rep.violations.size() < 20) rep.violations.push_back({g.x(i), y});
    }
  rep.pass = rep.max_ratio <= rep.bound;
  return rep;
}

bernoulli_report bernoulli_check(const jet_solution& sol) {
  const domain_grid& g = sol.grid();
  const upstream_flow& flow = sol.problem->flow();
  const gas_law& gas = flow.gas();
  const double q = sol.problem->q();
  bernoulli_report rep;
  auto head = [&](std::size_t n) {
    return 0.5 * (sol.u[n] * sol.u[n] + sol.v[n] * sol.v[n]) + gas.enthalpy(sol.rho[n]);
  };
  constexpr int kLines = 20;
  for (int i = 0; i <= g.nx(); ++i) {
    for (int l = 0; l < kLines; ++l) {
      const double level = q * (l + 0.5) / kLines;
      for (int j = 0; j + 1 < g.ny(); ++j) {
        const std::size_t a = g.index(i, j), b = g.index(i, j + 1);
        if (!g.fluid(i, j + 1) || !sol.in_flow(a) || !sol.in_flow(b)) break;
        if (sol.psi[a] <= level && level < sol.psi[b]) {
          const double f = (level - sol.psi[a]) / (sol.psi[b] - sol.psi[a]);
          const double value = (1.0 - f) * head(a) + f * head(b);
          const double ref = flow.bernoulli(level);
          rep.max_deviation = std::max(rep.max_deviation, std::abs(value - ref) / std::abs(ref));
          ++rep.samples;
          break;
        }
      }
    }
    // mass flux through the slice below the first coincidence node
    double flux = 0.0, y_prev = 0.0, f_prev = 0.0, top = 0.0;
    bool any = false;
    for (int j = 0; j < g.ny() && g.fluid(i, j); ++j) {
      const std::size_t n = g.index(i, j);
      if (!sol.in_flow(n)) break;
      const double y = g.y(j), f = y * sol.rho[n] * sol.u[n];
      flux += 0.5 * (f + f_prev) * (y - y_prev);
      y_prev = y;
      f_prev = f;
      top = sol.psi[n];
      any = true;
    }
    if (any) {
      // the first cell from the axis carries psi ~ y^2 so the trapezoid starts at 0
      rep.max_mass_deviation = std::max(rep.max_mass_deviation, std::abs(flux - top) / q);
    }
  }
  return rep;
}

}  // namespace jetfb
