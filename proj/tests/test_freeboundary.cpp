#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "jetfb/errors.hpp"
#include "jetfb/freeboundary.hpp"
#include "jetfb/solver.hpp"

using namespace jetfb;

namespace {

upstream_flow canonical_flow() { return upstream_flow(gas_law(2.0), upstream_profile::constant(2.0, 1.0), 4.0); }

domain_options small_domain(double h) {
  domain_options o;
  o.mu = 1.0;
  o.r = 2.0;
  o.h = h;
  o.k_mu = 0.15;
  return o;
}

template <class F>
std::vector<double> sample(const domain_grid& g, double q, F f) {
  std::vector<double> psi(g.node_count(), q);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i)
      if (g.fluid(i, j)) psi[g.index(i, j)] = f(g.x(i), g.y(j));
  return psi;
}

// a solution shell around a synthetic field, with derived fields filled in
jet_solution synthetic(const jet_problem& p, double big_lambda, std::vector<double> psi) {
  jet_solution sol;
  sol.problem = &p;
  sol.big_lambda = big_lambda;
  sol.lambda_eps = p.law().lambda(big_lambda, true);
  sol.delta = 1e-9 * p.q();
  sol.psi = std::move(psi);
  compute_derived_fields(sol);
  return sol;
}

}  // namespace

TEST(extract_boundary, flat_level_set_recovered_within_h) {
  const double h = 1.0 / 64.0, q = 4.0;
  const domain_grid g(nozzle::logarithmic(2.0), small_domain(h));
  const auto psi = sample(g, q, [&](double, double y) { return q * std::min(1.0, y * y / 0.25); });
  const free_boundary fb = extract_boundary(g, psi, q * (1.0 - 1e-9));
  ASSERT_FALSE(fb.tail.empty());
  for (const auto& p : fb.tail) EXPECT_NEAR(p[1], 0.5, h);
  EXPECT_NEAR(fb.h_low, 0.5, h);
}

TEST(extract_boundary, tilted_level_set_recovered_within_h) {
  const double h = 1.0 / 64.0, q = 4.0;
  const domain_grid g(nozzle::logarithmic(2.0), small_domain(h));
  // contour x = 1 - y for y in (0.2, 1); the field stays below the level beneath y = 0.2
  const auto psi = sample(g, q, [&](double x, double y) {
    if (y < 0.2) return 0.25 * q * y / 0.2;
    return q * std::clamp(0.5 + (x + y - 1.0), 0.0, 1.0);
  });
  const free_boundary fb = extract_boundary(g, psi, 0.5 * q);
  ASSERT_TRUE(fb.found);
  ASSERT_GT(fb.graph.size(), 40u);
  for (const auto& s : fb.graph) {
    if (s[0] < 0.2) continue;
    EXPECT_NEAR(s[1], 1.0 - s[0], h);
  }
  EXPECT_NEAR(fb.upsilon_1, 0.0, h);
  // Upsilon' = -1 = N'(1) for the logarithmic nozzle
  EXPECT_NEAR(fb.slope_residual, 0.0, 1e-9);
  EXPECT_TRUE(fb.graph_ok);
}

TEST(extract_boundary, quadratic_extrapolation_to_orifice) {
  const double h = 1.0 / 64.0, q = 4.0;
  const domain_grid g(nozzle::logarithmic(2.0), small_domain(h));
  // contour x = 0.3 + (1 - y)^2 near the top
  const auto psi = sample(g, q, [&](double x, double y) {
    const double c = 0.3 + (1.0 - y) * (1.0 - y);
    return q * std::clamp(0.5 + 0.1 * (x - c), 0.0, 1.0);
  });
  const free_boundary fb = extract_boundary(g, psi, 0.5 * q);
  ASSERT_TRUE(fb.found);
  // linear interpolation along rows is exact for a field linear in x
  EXPECT_NEAR(fb.upsilon_1, 0.3, 1e-9);
  EXPECT_NEAR(fb.slope_residual, 0.0 - (-1.0), 1e-9);
}

TEST(extract_boundary, empty_contour_flags_no_boundary) {
  const double q = 4.0;
  const domain_grid g(nozzle::logarithmic(2.0), small_domain(1.0 / 32.0));
  const auto psi = sample(g, q, [&](double, double y) { return 0.2 * q * y; });
  const free_boundary fb = extract_boundary(g, psi, q * 0.999);
  EXPECT_FALSE(fb.found);
  EXPECT_TRUE(std::isinf(fb.upsilon_1) && fb.upsilon_1 > 0.0);
}

TEST(extract_boundary, rejects_fields_that_are_not_graphs) {
  const double q = 4.0;
  const domain_grid g(nozzle::logarithmic(2.0), small_domain(1.0 / 32.0));
  // the level is crossed upwards at x = -0.5 and again at x = 0.5 on every row
  const auto psi = sample(g, q, [&](double x, double) {
    if (x < -0.5) return 0.2 * q;
    if (x < 0.0) return 0.8 * q;
    if (x < 0.5) return 0.2 * q;
    return q;
  });
  try {
    extract_boundary(g, psi, 0.5 * q);
    FAIL() << "expected a graph violation";
  } catch (const jetfb_error& e) {
    EXPECT_EQ(e.kind(), error_kind::property_violation);
  }
}

TEST(extract_boundary, polyline_runs_from_orifice_downstream) {
  const double h = 1.0 / 64.0, q = 4.0;
  const domain_grid g(nozzle::logarithmic(2.0), small_domain(h));
  const auto psi = sample(g, q, [&](double x, double y) {
    if (y < 0.2) return 0.25 * q * y / 0.2;
    return q * std::clamp(0.5 + (x + y - 1.0), 0.0, 1.0);
  });
  const auto line = extract_boundary(g, psi, 0.5 * q).polyline();
  ASSERT_GT(line.size(), 2u);
  for (std::size_t k = 1; k < line.size(); ++k) EXPECT_GT(line[k][0], line[k - 1][0]);
}

TEST(fb_condition, residual_is_first_order) {
  // psi = Q (r + a (1 - r)^2), r = (y / H)^2, below the flat boundary y = H:
  // |grad psi| / y = (2 Q / H^2) (1 - 2 a (1 - r)) equals Lambda on the boundary only
  const double q = 4.0, hh = 0.5, a = 0.25, big_lambda = 2.0 * q / (hh * hh);
  const upstream_flow flow = canonical_flow();
  double prev = 0.0;
  for (double inv_h : {32.0, 64.0, 128.0}) {
    const jet_problem p(flow, 0.1, nozzle::logarithmic(2.0), small_domain(1.0 / inv_h));
    jet_solution sol = synthetic(p, big_lambda, sample(p.grid(), q, [&](double, double y) {
                                   const double r = std::min(1.0, y * y / (hh * hh));
                                   return q * (r + a * (1.0 - r) * (1.0 - r));
                                 }));
    const free_boundary fb = extract_boundary(sol);
    const fb_residual_report r = fb_condition_residual(sol, fb);
    ASSERT_GT(r.samples, 40);
    EXPECT_TRUE(r.agree);
    if (prev > 0.0) EXPECT_LT(r.mean_rel, 0.6 * prev) << "h = 1/" << inv_h;
    prev = r.mean_rel;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(search_lambda, bisection_converges_within_count_bound) {
  // Upsilon(1) = 2 - Lambda with no boundary below Lambda = 0.5
  auto eval = [](double l) { return fit_step{l, 2.0 - l, l > 0.5, 1}; };
  const double lo = 0.5, hi = 32.0, tol = 1e-3, lambda_tol = 1e-6;
  std::size_t chosen = 99;
  const fit_result r = search_lambda(eval, lo, hi, tol, lambda_tol, 3, 1.0, &chosen);
  EXPECT_NEAR(r.big_lambda, 2.0, tol);
  EXPECT_FALSE(r.ambiguous);
  EXPECT_LE(r.bisections, static_cast<int>(std::ceil(std::log2((hi - lo) / lambda_tol))));
  EXPECT_EQ(r.history[chosen].big_lambda, r.big_lambda);
  EXPECT_LE(r.final_lo, 2.0);
  EXPECT_GE(r.final_hi, 2.0);
  EXPECT_LE(r.final_lo, r.big_lambda);
  EXPECT_GE(r.final_hi, r.big_lambda);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(search_lambda, expands_the_bracket) {
  auto eval = [](double l) { return fit_step{l, 100.0 - l, true, 1}; };
  const fit_result r = search_lambda(eval, 1.0, 40.0, 1e-3, 1e-9, 3, 1e9);
  EXPECT_DOUBLE_EQ(r.hi, 160.0);
  EXPECT_NEAR(r.big_lambda, 100.0, 1e-3);
}

TEST(search_lambda, reports_bracket_failure) {
  auto eval = [](double l) { return fit_step{l, 1.0 + l, true, 1}; };
  try {
    search_lambda(eval, 1.0, 2.0, 1e-3, 1e-9, 3, 1.0);
    FAIL() << "expected a bracket failure";
  } catch (const jetfb_error& e) {
    EXPECT_EQ(e.kind(), error_kind::fit_bracket);
  }
}

TEST(search_lambda, sign_jump_ends_ambiguous_at_the_floor) {
  // Upsilon(1) jumps from +1 to -1 at Lambda = 3, never within tolerance
  auto eval = [](double l) { return fit_step{l, l < 3.0 ? 1.0 : -1.0, true, 1}; };
  const double lo = 1.0, hi = 9.0, lambda_tol = 1e-3;
  const fit_result r = search_lambda(eval, lo, hi, 1e-6, lambda_tol, 0, 0.5);
  EXPECT_TRUE(r.ambiguous);
  EXPECT_NEAR(r.big_lambda, 3.0, lambda_tol);
  EXPECT_EQ(r.bisections, static_cast<int>(std::ceil(std::log2((hi - lo) / lambda_tol))));
  bool jump = false;
  for (const auto& w : r.warnings) jump = jump || w.find("jumps") != std::string::npos;
  EXPECT_TRUE(jump);
}

TEST(fit_lambda, rejects_the_rectangle) {
  domain_options o;
  o.mu = 0.5;
  o.r = 0.5;
  o.h = 1.0 / 16.0;
  const jet_problem p(canonical_flow(), 0.1, nozzle::rectangle(2.0), o);
  EXPECT_THROW(fit_lambda(p, solver_config{}), jetfb_error);
}
