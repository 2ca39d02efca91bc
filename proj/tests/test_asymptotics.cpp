#include <gtest/gtest.h>

#include <cmath>

#include "jetfb/asymptotics.hpp"
#include "jetfb/errors.hpp"
#include "oracles.hpp"

using namespace jetfb;

namespace {

upstream_flow canonical_flow() { return upstream_flow(gas_law(2.0), upstream_profile::constant(2.0, 1.0), 4.0); }

upstream_flow quartic_flow() {
  return upstream_flow(gas_law(2.0), upstream_profile::power(2.0, 1.0, 1.0, 4.0), 38.0 / 3.0);
}

// u = 1 + y^2 / 4 with rho_bar = 16: B(Q) = 18, subsonic throughout
upstream_flow low_mach_flow() {
  return upstream_flow(gas_law(2.0), upstream_profile::power(2.0, 1.0, 0.25, 2.0), 48.0);
}

// Lambda with downstream density rho on the canonical data: Lambda = rho sqrt(2 (2.5 - rho))
double lambda_for_density(double rho) { return rho * std::sqrt(2.0 * (2.5 - rho)); }

}  // namespace

TEST(upstream_field, closed_forms) {
  const upstream_flow flow = canonical_flow();
  const auto v = upstream_field(flow, {0.0, 0.5, 1.0, 2.0});
  EXPECT_NEAR(v[0], 0.0, 1e-15);
  EXPECT_NEAR(v[1], 0.25, 1e-13);
  EXPECT_NEAR(v[2], 1.0, 1e-13);
  EXPECT_NEAR(v[3], flow.q(), 1e-12);
}

TEST(upstream_field, quartic_profile_total_flux) {
  const upstream_flow flow = quartic_flow();
  // integral_0^2 s (1 + s^4) ds = 2 + 64/6 = 38/3
  EXPECT_NEAR(upstream_field(flow, {2.0})[0], 38.0 / 3.0, 1e-11);
  const double ref = oracle::integrate([](double s) { return s * (1.0 + std::pow(s, 4)); }, 0.0, 1.3);
  EXPECT_NEAR(upstream_field(flow, {1.3})[0], ref, 1e-12);
}

TEST(downstream_state, identity_at_upstream_momentum) {
  const downstream_state d(canonical_flow(), 2.0);
  EXPECT_NEAR(d.rho_d(), 2.0, 1e-12);
  EXPECT_NEAR(d.h_d(), 2.0, 1e-10);
  EXPECT_NEAR(d.u(0.0), 1.0, 1e-12);
  EXPECT_NEAR(d.u(1.7), 1.0, 1e-12);
  for (double y : {0.3, 1.0, 1.9}) EXPECT_NEAR(d.theta(y), y, 1e-10);
}

TEST(downstream_state, constant_profile_closed_form) {
  const double rho = 1.8, big_lambda = lambda_for_density(rho);
  EXPECT_NEAR(big_lambda, 2.1298, 1e-4);
  const downstream_state d(canonical_flow(), big_lambda);
  const double u = std::sqrt(1.4);
  EXPECT_NEAR(d.rho_d(), rho, 1e-12);
  EXPECT_NEAR(d.u(0.5), u, 1e-12);
  EXPECT_NEAR(u, 1.1832, 1e-4);
  // theta(y) = y sqrt(rho_bar / (rho_d u_d))
  const double h_d = 2.0 * std::sqrt(2.0 / (rho * u));
  EXPECT_NEAR(d.h_d(), h_d, 1e-10);
  EXPECT_NEAR(d.h_d(), 1.9381, 1e-4);
  EXPECT_NEAR(d.rho_d() * u * d.h_d() * d.h_d() / 2.0, 4.0, 1e-9);
  EXPECT_NEAR(d.psi(1.0), 4.0 * 1.0 / (h_d * h_d), 1e-9);
}

TEST(downstream_state, density_matches_bisection_oracle) {
  const upstream_flow flow = low_mach_flow();
  const double bq = flow.bernoulli(flow.q());
  const double tc = flow.gas().critical_momentum_sq(bq);
  for (double frac : {0.5, 0.8, 0.95}) {
    const double big_lambda = std::sqrt(frac * tc);
    try {
      const downstream_state d(flow, big_lambda);
      EXPECT_NEAR(d.rho_d(), oracle::density(big_lambda * big_lambda, bq, 2.0), 1e-10);
    } catch (const jetfb_error& e) {
      // the jet only contracts when rho_d stays below rho_bar = 16
      EXPECT_EQ(e.kind(), error_kind::property_violation);
      EXPECT_GT(oracle::density(big_lambda * big_lambda, bq, 2.0), flow.rho_bar());
    }
  }
}

TEST(downstream_state, rotational_invariants) {
  const upstream_flow flow = low_mach_flow();
  const double bq = flow.bernoulli(flow.q());
  // rho_d = 15 on the subsonic branch (rho_c = 12, rho_bar = 16)
  const double rho = 15.0;
  const double big_lambda = std::sqrt(oracle::momentum_sq(rho, bq, 2.0));
  const downstream_state d(flow, big_lambda);
  EXPECT_NEAR(d.rho_d(), rho, 1e-10);
  EXPECT_LE(d.bernoulli_defect(), 1e-8);
  EXPECT_LE(d.mass_defect(), 1e-8);
  EXPECT_GT(d.u(0.0), 0.0);
  // theta strictly increasing with theta(y) < y away from the axis
  const auto& ys = d.ys();
  const auto& th = d.thetas();
  EXPECT_EQ(th.front(), 0.0);
  for (std::size_t k = 1; k < ys.size(); ++k) {
    EXPECT_GT(th[k], th[k - 1]);
    EXPECT_LT(th[k], ys[k]);
  }
  // u_d is nondecreasing in height for a nondecreasing upstream profile
  for (double y = 0.0; y + 0.01 <= d.h_d(); y += 0.01) EXPECT_GE(d.u(y + 0.01), d.u(y) - 1e-12);
  // streamline map against an independent quadrature of (theta^2)'
  auto speed = [&](double s) { return std::sqrt(2.0 * (flow.bernoulli(flow.psi_bar(s)) - rho)); };
  const double y = 1.2;
  const double th2 = 2.0 * flow.rho_bar() / rho *
                     oracle::integrate([&](double s) { return s * (1.0 + 0.25 * s * s) / speed(s); }, 0.0, y);
  EXPECT_NEAR(d.theta(y), std::sqrt(th2), 1e-7);
}

TEST(downstream_state, errors) {
  const upstream_flow flow = canonical_flow();
  // Lambda^2 = 5 exceeds tc = 4.63
  EXPECT_THROW(downstream_state(flow, std::sqrt(5.0)), jetfb_error);
  try {
    downstream_state(flow, 1.5);
    FAIL();
  } catch (const jetfb_error& e) {
    EXPECT_EQ(e.kind(), error_kind::property_violation);
  }
}

TEST(lambda_monotonicity_probe, strictly_decreasing_table) {
  const upstream_flow flow = canonical_flow();
  std::vector<double> lambdas;
  for (int k = 0; k < 10; ++k) lambdas.push_back(2.0 + 0.015 * k);
  const auto rows = lambda_monotonicity_probe(flow, lambdas);
  ASSERT_EQ(rows.size(), 10u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_LT(rows[k].h_d, rows[k - 1].h_d);
    EXPECT_LT(rows[k].rho_d, rows[k - 1].rho_d);
    EXPECT_LT(rows[k].p_d, rows[k - 1].p_d);
    EXPECT_NEAR(rows[k].p_d, rows[k].rho_d * rows[k].rho_d / 2.0, 1e-12);
  }
  EXPECT_NEAR(rows[0].h_d, 2.0, 1e-10);
}
