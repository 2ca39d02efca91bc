#include "jetfb/asymptotics.hpp"

#include <math.h>  // pchip uses unqualified isnan
#include <algorithm>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "jetfb/errors.hpp"

namespace jetfb {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;
using spline = boost::math::interpolators::pchip<std::vector<double>>;

constexpr unsigned kDepth = 8;

template <class F>
double integrate(F f, double a, double b, double abs_tol, int splits = 8) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  const double v = gauss_kronrod<double, 15>::integrate(f, a, b, kDepth, 1e-12, &err);
  if (err > abs_tol && splits > 0) {
    const double m = 0.5 * (a + b);
    return integrate(f, a, m, 0.5 * abs_tol, splits - 1) + integrate(f, m, b, 0.5 * abs_tol, splits - 1);
  }
  return v;
}

}  // namespace

std::vector<double> upstream_field(const upstream_flow& flow, const std::vector<double>& ys) {
  const upstream_profile& prof = flow.profile();
  const double tol = 1e-12 * flow.q() / flow.rho_bar();
  std::vector<double> out;
  out.reserve(ys.size());
  for (double y : ys) {
    const double yy = std::clamp(y, 0.0, flow.hbar());
    out.push_back(flow.rho_bar() * integrate([&](double s) { return s * prof.value(s); }, 0.0, yy, tol));
  }
  return out;
}

struct downstream_state::splines {
  spline theta_of_y;
  spline y_of_theta;
  spline u_of_theta;
};

downstream_state::downstream_state(const upstream_flow& flow, double big_lambda, int samples)
    : flow_(&flow), big_lambda_(big_lambda) {
  if (!(big_lambda > 0.0) || !std::isfinite(big_lambda)) raise(error_kind::invalid_lambda, "Lambda must be positive");
  if (samples < 4) raise(error_kind::parameter, "downstream state needs at least 4 samples");
  const gas_law& gas = flow.gas();
  const double q = flow.q();
  const double bq = flow.bernoulli(q);
  const double t = big_lambda * big_lambda;
  const double tc = gas.critical_momentum_sq(bq);
  if (!(t < tc))
    raise(error_kind::sonic_free_boundary, "Lambda^2 = " + fmt(t) + " is not below the critical momentum " + fmt(tc));
  rho_d_ = gas.density_from_momentum(t, bq);
  p_d_ = gas.pressure(rho_d_);
  const double rho_bar = flow.rho_bar();
  if (rho_d_ > rho_bar * (1.0 + 1e-12))
    raise(error_kind::property_violation, "downstream density " + fmt(rho_d_) + " exceeds the upstream density " +
                                              fmt(rho_bar) + "; the jet would expand");
  const double h_d_enthalpy = gas.enthalpy(rho_d_);
  const upstream_profile& prof = flow.profile();

  auto speed_sq = [&](double y) { return 2.0 * (flow.bernoulli(flow.psi_bar(y)) - h_d_enthalpy); };
  auto speed = [&](double y) {
    const double s2 = speed_sq(y);
    if (!(s2 > 0.0))
      raise(error_kind::cavitation, "downstream speed undefined at upstream height " + fmt(y) + " for Lambda = " +
                                        fmt(big_lambda));
    return std::sqrt(s2);
  };

  const double hbar = flow.hbar();
  ys_.resize(samples);
  thetas_.resize(samples);
  speeds_.resize(samples);
  const double factor = 2.0 * rho_bar / rho_d_;
  const double tol = 1e-12 * q / rho_bar;
  double acc = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double y = hbar * k / (samples - 1);
    if (k > 0) acc += integrate([&](double s) { return s * prof.value(s) / speed(s); }, ys_[k - 1], y, tol);
    ys_[k] = y;
    thetas_[k] = std::sqrt(factor * acc);
    speeds_[k] = speed(y);
  }
  h_d_ = thetas_.back();
  for (int k = 1; k < samples; ++k)
    if (!(thetas_[k] > thetas_[k - 1]))
      raise(error_kind::property_violation, "theta is not strictly increasing near y = " + fmt(ys_[k]));

  const double b_scale = std::abs(bq);
  for (int k = 0; k < samples; ++k) {
    const double b = flow.bernoulli(flow.psi_bar(ys_[k]));
    bernoulli_defect_ = std::max(bernoulli_defect_,
                                 std::abs(0.5 * speeds_[k] * speeds_[k] + h_d_enthalpy - b) / b_scale);
  }

  auto ys = ys_, th = thetas_, th2 = thetas_, ys2 = ys_, us = speeds_;
  splines_ = std::make_shared<const splines>(splines{spline(std::move(ys), std::move(th)),
                                                     spline(std::move(th2), std::move(ys2)),
                                                     spline(std::vector<double>(thetas_), std::move(us))});
  // the integrand is a quartic on each spline segment
  double mass = 0.0;
  for (int k = 1; k < samples; ++k)
    mass += gauss<double, 3>::integrate([&](double s) { return s * splines_->u_of_theta(s); }, thetas_[k - 1],
                                        thetas_[k]);
  mass *= rho_d_;
  mass_defect_ = std::abs(mass - q) / q;
}

double downstream_state::theta(double y) const { return splines_->theta_of_y(std::clamp(y, 0.0, ys_.back())); }

double downstream_state::source_height(double y) const {
  return splines_->y_of_theta(std::clamp(y, 0.0, h_d_));
}

double downstream_state::u(double y) const { return splines_->u_of_theta(std::clamp(y, 0.0, h_d_)); }

double downstream_state::psi(double y) const {
  if (y >= h_d_) return flow_->q();
  if (y <= 0.0) return 0.0;
  // streamlines carry their upstream flux downstream
  return flow_->psi_bar(source_height(y));
}

std::vector<monotonicity_row> lambda_monotonicity_probe(const upstream_flow& flow, std::vector<double> lambdas) {
  std::sort(lambdas.begin(), lambdas.end());
  std::vector<monotonicity_row> rows;
  for (double l : lambdas) {
    const downstream_state ds(flow, l);
    rows.push_back({l, ds.rho_d(), ds.h_d(), ds.pressure()});
  }
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& a = rows[k - 1];
    const auto& b = rows[k];
    if (!(b.h_d < a.h_d) || !(b.rho_d < a.rho_d) || !(b.p_d < a.p_d))
      raise(error_kind::property_violation, "downstream state is not strictly decreasing between Lambda = " +
                                                fmt(a.big_lambda) + " and " + fmt(b.big_lambda));
  }
  return rows;
}

farfield_report farfield_compare(const jet_solution& sol, const downstream_state* ds) {
  const domain_grid& g = sol.grid();
  const upstream_flow& flow = sol.problem->flow();
  const double q = flow.q();
  farfield_report rep;
  const int iu = std::min(5, g.nx()), id = std::max(0, g.nx() - 5);
  rep.x_upstream = g.x(iu);
  rep.x_downstream = g.x(id);
  for (int j = 0; j < g.ny() && g.fluid(iu, j); ++j)
    rep.upstream_dev = std::max(rep.upstream_dev, std::abs(sol.psi[g.index(iu, j)] - flow.psi_bar(g.y(j))) / q);
  if (ds) {
    rep.h_d = ds->h_d();
    for (int j = 0; j < g.ny() && g.fluid(id, j); ++j)
      rep.downstream_dev = std::max(rep.downstream_dev, std::abs(sol.psi[g.index(id, j)] - ds->psi(g.y(j))) / q);
  }
  return rep;
}

}  // namespace jetfb
