#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "jetfb/errors.hpp"
#include "jetfb/flow_state.hpp"
#include "oracles.hpp"

using namespace jetfb;

namespace {

upstream_flow canonical_flow() {
  return upstream_flow(gas_law(2.0), upstream_profile::constant(2.0, 1.0), 4.0);
}

upstream_flow quartic_flow() {
  return upstream_flow(gas_law(2.0), upstream_profile::power(2.0, 1.0, 1.0, 4.0), 38.0 / 3.0);
}

// Reference truncated inverse density written directly from its definition.
struct reference_law {
  const upstream_flow& flow;
  double eps;
  double gamma() const { return flow.gas().gamma(); }
  double b(double z) const { return flow.bernoulli(z); }
  double tc(double s) const { return std::pow(2.0 * (gamma() - 1.0) * s / (gamma() + 1.0), (gamma() + 1.0) / (gamma() - 1.0)); }
  double g_star() const {
    return 1.0 / std::pow(2.0 * (gamma() - 1.0) * flow.b_lower() / (gamma() + 1.0), 1.0 / (gamma() - 1.0));
  }
  static double blend(double s) {
    if (s <= -1.0) return 1.0;
    if (s >= -0.5) return 0.0;
    const double u = 2.0 * (s + 1.0);
    return 1.0 - (10 * u * u * u - 15 * u * u * u * u + 6 * u * u * u * u * u);
  }
  double g_eps(double t, double z) const {
    const double s = b(z);
    const double w = blend((t / tc(s) - 1.0) / eps);
    if (w == 0.0) return g_star();
    return w / oracle::density(t, s, gamma()) + (1.0 - w) * g_star();
  }
  double potential(double t, double z) const {
    // split at the band edges so every piece is smooth
    const double c = tc(b(z));
    double integral = 0.0, lo = 0.0;
    for (double edge : {(1.0 - eps) * c, (1.0 - 0.5 * eps) * c, t}) {
      const double hi = std::min(edge, t);
      if (hi > lo) integral += oracle::integrate([&](double s) { return g_eps(s, z); }, lo, hi, 1e-13);
      lo = std::max(lo, hi);
    }
    const double g0z = g_eps(0.0, z), g0q = g_eps(0.0, flow.q());
    return 0.5 * integral + (std::pow(g0z, -gamma()) - std::pow(g0q, -gamma())) / gamma();
  }
};

}  // namespace

TEST(truncated_g, exact_below_band_and_flat_above) {
  // acceptance item 2 on both profiles
  for (const upstream_flow& flow : {canonical_flow(), quartic_flow()}) {
    const truncated_law law(flow, 0.1);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
      const double z = flow.q() * (-0.2 + 1.4 * unit(rng));
      const auto s = law.state(z);
      const double below = (1.0 - law.eps()) * s.tc * unit(rng);
      const auto a = law.eval(below, s);
      const auto e = law.exact(below, s);
      ASSERT_EQ(a.g, e.g);
      ASSERT_EQ(a.g_t, e.g_t);
      ASSERT_EQ(a.g_z, e.g_z);
      const double above = (1.0 - 0.5 * law.eps()) * s.tc * (1.0 + 3.0 * unit(rng));
      const auto c = law.eval(above, s);
      ASSERT_EQ(c.g, law.g_star());
      ASSERT_EQ(c.g_t, 0.0);
      ASSERT_EQ(c.g_z, 0.0);
    }
  }
}

TEST(truncated_g, ellipticity_on_dense_sample) {
  const upstream_flow flow = quartic_flow();
  const truncated_law law(flow, 0.1);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double min_ratio = 1e300;
  for (int k = 0; k < 10000; ++k) {
    const double z = flow.q() * unit(rng);
    const auto s = law.state(z);
    const double t = 1.5 * s.tc * unit(rng);
    const auto d = law.eval(t, s);
    ASSERT_GT(d.g + 2.0 * t * d.g_t, 0.0);
    ASSERT_GE(d.g, law.g_low() * (1.0 - 1e-12));
    ASSERT_LE(d.g, law.g_star() * (1.0 + 1e-12));
    min_ratio = std::min(min_ratio, (d.g + 2.0 * t * d.g_t) / law.g_low());
  }
  RecordProperty("min_ellipticity_over_g_low", std::to_string(min_ratio));
}

TEST(truncated_g, matches_reference_and_differences) {
  const upstream_flow flow = quartic_flow();
  const truncated_law law(flow, 0.1);
  const reference_law ref{flow, 0.1};
  for (double zf : {0.1, 0.45, 0.8}) {
    const double z = zf * flow.q();
    const double tc = law.state(z).tc;
    for (double frac : {0.3, 0.905, 0.93, 0.947}) {
      const double t = frac * tc;
      const auto d = law.eval(t, z);
      EXPECT_NEAR(d.g, ref.g_eps(t, z), 1e-12 * d.g);
      const double gt = oracle::derivative([&](double x) { return law.eval(x, z).g; }, t, 1e-5 * tc);
      EXPECT_NEAR(d.g_t, gt, 1e-6 * std::abs(gt) + 1e-12);
      const double gz = oracle::derivative([&](double x) { return law.eval(t, x).g; }, z, 1e-5 * flow.q());
      EXPECT_NEAR(d.g_z, gz, 1e-6 * std::abs(gz) + 1e-12);
    }
  }
}

TEST(truncated_g, finite_difference_at_seventy_percent_band) {
  const upstream_flow flow = canonical_flow();
  const truncated_law law(flow, 0.1);
  const double tc = law.state(0.0).tc;
  const double t = (1.0 - 0.7 * 0.1) * tc;
  const double fd = oracle::derivative([&](double x) { return law.eval(x, 1.0).g; }, t, 1e-6 * tc);
  EXPECT_NEAR(law.eval(t, 1.0).g_t, fd, 1e-6 * std::abs(fd));
}

TEST(energy_density, anchors) {
  const upstream_flow flow = quartic_flow();
  const truncated_law law(flow, 0.1);
  EXPECT_NEAR(law.eval_potential(0.0, flow.q()).g, 0.0, 1e-13);
  EXPECT_NEAR(law.phi(0.0, flow.q()), 0.0, 1e-13);
  const upstream_flow c = canonical_flow();
  const truncated_law cl(c, 0.1);
  for (double t : {0.5, 3.0, 4.3, 10.0})
    for (double z : {-1.0, 0.5, 2.0, 5.0}) EXPECT_EQ(cl.eval_potential(t, z).g_z, 0.0);
}

TEST(energy_density, matches_quadrature_oracle) {
  for (const upstream_flow& flow : {canonical_flow(), quartic_flow()}) {
    const truncated_law law(flow, 0.1);
    const reference_law ref{flow, 0.1};
    for (double zf : {0.0, 0.3, 0.7, 1.0}) {
      const double z = zf * flow.q();
      const double tc = law.state(z).tc;
      for (double frac : {0.1, 0.6, 0.92, 0.94, 1.3}) {
        const double t = frac * tc;
        const double expected = ref.potential(t, z);
        EXPECT_NEAR(law.eval_potential(t, z).g, expected, 1e-10 * std::max(1.0, std::abs(expected)))
            << "t/tc=" << frac << " z=" << z;
      }
    }
  }
}

TEST(energy_density, partials_match_differences) {
  const upstream_flow flow = quartic_flow();
  const truncated_law law(flow, 0.1);
  for (double zf : {0.15, 0.5, 0.85}) {
    const double z = zf * flow.q();
    const double tc = law.state(z).tc;
    for (double frac : {0.2, 0.7, 0.91, 0.935, 1.4}) {
      const double t = frac * tc;
      const auto p = law.eval_potential(t, z);
      const double gt = oracle::derivative([&](double x) { return law.eval_potential(x, z).g; }, t, 1e-5 * tc);
      EXPECT_NEAR(p.g_t, gt, 1e-6 * std::abs(gt));
      const double gz = oracle::derivative([&](double x) { return law.eval_potential(t, x).g; }, z, 1e-5 * flow.q());
      EXPECT_NEAR(p.g_z, gz, 1e-6 * std::abs(gz) + 1e-10) << "t/tc=" << frac << " z=" << z;
      if (frac < 0.9) {
        // closed form below the band
        EXPECT_NEAR(p.g_z, flow.bernoulli_d1(z) / law.exact(t, z).g, 1e-12 * std::abs(p.g_z));
        const double gzz = oracle::derivative([&](double x) { return law.eval_potential(t, x).g_z; }, z, 1e-4 * flow.q());
        EXPECT_NEAR(p.g_zz, gzz, 1e-5 * std::abs(gzz) + 1e-9);
      }
    }
  }
}

TEST(energy_density, phi_increasing_on_lattice) {
  const upstream_flow flow = quartic_flow();
  const truncated_law law(flow, 0.1);
  for (int i = 0; i < 50; ++i) {
    const double z = flow.q() * (-0.1 + 1.2 * i / 49.0);
    const double tc = law.state(z).tc;
    for (int j = 0; j < 50; ++j) {
      const double t = 1.5 * tc * j / 49.0;
      ASSERT_GT(law.phi_t(t, z), 0.0);
    }
  }
}

TEST(lambda_eps, canonical_example_against_oracle) {
  const upstream_flow flow = canonical_flow();
  const truncated_law law(flow, 0.1);
  const reference_law ref{flow, 0.1};
  const double lam2 = law.lambda(2.0) * law.lambda(2.0);
  // Phi = -G + t g at t = Lambda^2 = 4, z = Q
  const double expected = -ref.potential(4.0, 4.0) + 4.0 * ref.g_eps(4.0, 4.0);
  EXPECT_NEAR(lam2, expected, 1e-8 * expected);
}

TEST(lambda_eps, monotone_and_vanishing) {
  const upstream_flow flow = canonical_flow();
  const truncated_law law(flow, 0.1);
  double prev = 0.0;
  for (int k = 1; k <= 40; ++k) {
    const double lam = 2.1 * k / 40.0;
    const double v = law.lambda(lam);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_LT(law.lambda(1e-6), 1e-5);
}

TEST(lambda_eps, errors) {
  const upstream_flow flow = canonical_flow();
  const truncated_law law(flow, 0.1);
  try {
    law.lambda(2.2);
    FAIL();
  } catch (const jetfb_error& e) {
    EXPECT_EQ(e.kind(), error_kind::sonic_free_boundary);
  }
  EXPECT_NO_THROW(law.lambda(10.0, true));
  EXPECT_THROW(law.lambda(0.0), jetfb_error);
  EXPECT_THROW(law.lambda(-1.0), jetfb_error);
  for (double eps : {0.0, 0.5, -0.1, 0.7}) {
    try {
      truncated_law bad(flow, eps);
      FAIL();
    } catch (const jetfb_error& e) {
      EXPECT_EQ(e.kind(), error_kind::parameter);
    }
  }
}

TEST(lambda_eps, bounds_in_terms_of_lambda) {
  // (1/2) c_* Lambda^2 <= B_*^{1/(gamma-1)} lambda^2 <= (1/2) c^* Lambda^2 / eps with measured constants
  const upstream_flow flow = quartic_flow();
  const truncated_law law(flow, 0.1);
  const double scale = std::pow(flow.b_lower(), 1.0 / (flow.gas().gamma() - 1.0));
  const double c_low = law.g_low() * scale, c_high = law.g_star() * scale;
  const double tc = law.state(flow.q()).tc;
  for (int k = 1; k < 30; ++k) {
    const double lam = std::sqrt(tc) * k / 30.0;
    const double v = scale * std::pow(law.lambda(lam), 2);
    EXPECT_GE(v, 0.5 * c_low * lam * lam * (1 - 1e-12));
    EXPECT_LE(v, 0.5 * c_high * lam * lam / 0.1);
  }
}
