#include <cmath>
#include <utility>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "jetfb/errors.hpp"
#include "jetfb/flow_state.hpp"

namespace jetfb {

namespace {

using gauss20 = boost::math::quadrature::gauss<double, 20>;

// rho^gamma - rho_m^gamma without cancellation when rho is close to rho_m
double pow_difference(double rho, double rho_m, double gamma) {
  return std::pow(rho_m, gamma) * std::expm1(gamma * std::log1p((rho - rho_m) / rho_m));
}

}  // namespace

truncated_law::truncated_law(const upstream_flow& flow, double eps) : flow_(&flow), eps_(eps) {
  if (!(eps > 0.0 && eps < 0.5)) {
    std::ostringstream os;
    os << "truncation parameter eps = " << eps << " outside (0, 1/2)";
    raise(error_kind::parameter, os.str());
  }
  g_star_ = flow.g_upper();
  g_low_ = flow.g_lower();
  rho_m_q_pow_ = std::pow(flow.state(flow.q()).rho_m, flow.gas().gamma());
  if (flow.profile().irrotational()) {
    const bernoulli_state s = flow.state(0.0);
    cached_band_ = band_values(s, (1.0 - 0.5 * eps_) * s.tc);
    have_cached_band_ = true;
  }
}

bernoulli_state truncated_law::state(double z) const { return flow_->state(z); }

truncated_law::density truncated_law::exact(double t, double z) const { return exact(t, state(z)); }

truncated_law::density truncated_law::exact(double t, const bernoulli_state& s) const {
  return exact_at_density(flow_->gas().density_from_momentum(t, s.b), s);
}

truncated_law::density truncated_law::eval(double t, double z) const { return eval(t, state(z)); }

truncated_law::density truncated_law::eval(double t, const bernoulli_state& s) const {
  if (!(t >= 0.0)) raise(error_kind::domain, "squared momentum must be non-negative");
  const double arg = (t / s.tc - 1.0) / eps_;
  if (arg <= -1.0) return exact(t, s);
  if (arg >= -0.5) return density{g_star_, 0.0, 0.0};
  return blend(t, exact(t, s), s);
}

truncated_law::density truncated_law::exact_at_density(double rho, const bernoulli_state& s) const {
  density d;
  d.g = 1.0 / rho;
  d.g_t = -d.g * d.g / flow_->gas().momentum_sq_drho(rho, s.b);
  d.g_z = s.db == 0.0 ? 0.0 : -2.0 * s.db * d.g_t / (d.g * d.g);
  return d;
}

truncated_law::density truncated_law::blend(double t, const density& ex, const bernoulli_state& s) const {
  const double arg = (t / s.tc - 1.0) / eps_;
  const double w = cutoff(arg);
  const double wr = cutoff_d1(arg) / eps_;  // derivative with respect to t / tc
  density d;
  d.g = ex.g * w + (1.0 - w) * g_star_;
  d.g_t = ex.g_t * w + (ex.g - g_star_) * wr / s.tc;
  d.g_z = ex.g_z * w + (g_star_ - ex.g) * wr * t * s.dtc_db * s.db / (s.tc * s.tc);
  return d;
}

double truncated_law::closed_half_integral(double rho, const bernoulli_state& s) const {
  const double gamma = flow_->gas().gamma();
  const double c = (gamma + 1.0) / (gamma * (gamma - 1.0));
  return 2.0 * s.b * (rho - s.rho_m) - c * pow_difference(rho, s.rho_m, gamma);
}

truncated_law::band truncated_law::band_values(const bernoulli_state& s, double upper) const {
  const double t1 = (1.0 - eps_) * s.tc;
  band out;
  if (have_cached_band_) {
    out.rho1 = cached_band_.rho1;
    out.base = cached_band_.base;
  } else {
    out.rho1 = flow_->gas().density_from_momentum(t1, s.b);
    out.base = closed_half_integral(out.rho1, s);
  }
  out.rho_up = out.rho1;
  if (upper > t1) {
    // integrate in rho, where tau = m(rho) is explicit and no density solve is needed
    const gas_law& gas = flow_->gas();
    const double rho_up = gas.density_from_momentum(upper, s.b);
    out.rho_up = rho_up;
    auto at = [&](double rho) {
      const double tau = gas.momentum_sq(rho, s.b);
      return std::pair{blend(tau, exact_at_density(rho, s), s), -gas.momentum_sq_drho(rho, s.b)};
    };
    out.g_int = 0.5 * gauss20::integrate([&](double rho) {
      const auto [d, jac] = at(rho);
      return d.g * jac;
    }, rho_up, out.rho1);
    if (s.db != 0.0)
      out.gz_int = 0.5 * gauss20::integrate([&](double rho) {
        const auto [d, jac] = at(rho);
        return d.g_z * jac;
      }, rho_up, out.rho1);
  }
  return out;
}

truncated_law::potential truncated_law::eval_potential(double t, double z) const {
  return eval_potential(t, state(z));
}

truncated_law::potential truncated_law::eval_potential(double t, const bernoulli_state& s) const {
  if (!(t >= 0.0)) raise(error_kind::domain, "squared momentum must be non-negative");
  const gas_law& gas = flow_->gas();
  const double gamma = gas.gamma();
  const double t1 = (1.0 - eps_) * s.tc;
  const double t2 = (1.0 - 0.5 * eps_) * s.tc;
  potential p;
  const double rho_m_pow = std::pow(s.rho_m, gamma);
  const double shift = rho_m_pow != rho_m_q_pow_ ? (rho_m_pow - rho_m_q_pow_) / gamma : 0.0;
  if (t <= t1) {
    const double rho = gas.density_from_momentum(t, s.b);
    const double g = 1.0 / rho;
    const double g_t = -g * g / gas.momentum_sq_drho(rho, s.b);
    const double g_z = s.db == 0.0 ? 0.0 : -2.0 * s.db * g_t / (g * g);
    p.g = closed_half_integral(rho, s) + shift;
    p.g_t = 0.5 * g;
    p.g_tt = 0.5 * g_t;
    p.g_tz = 0.5 * g_z;
    p.g_z = s.db * rho;
    p.g_zz = s.d2b * rho - s.db * g_z * rho * rho;
    return p;
  }
  band b;
  if (t >= t2 && have_cached_band_) {
    b = cached_band_;
  } else {
    b = band_values(s, std::min(t, t2));
  }
  p.g = b.base + b.g_int + shift;
  if (t > t2) p.g += 0.5 * g_star_ * (t - t2);
  const density d = t >= t2 ? density{g_star_, 0.0, 0.0} : blend(t, exact_at_density(b.rho_up, s), s);
  p.g_t = 0.5 * d.g;
  p.g_tt = 0.5 * d.g_t;
  p.g_tz = 0.5 * d.g_z;
  p.g_z = s.db * b.rho1 + b.gz_int;
  // the second z-derivative inside and above the band is frozen at its value at t1
  if (s.db != 0.0 || s.d2b != 0.0) {
    const density below = exact_at_density(b.rho1, s);
    p.g_zz = s.d2b * b.rho1 - s.db * below.g_z * b.rho1 * b.rho1;
  }
  return p;
}

double truncated_law::phi(double t, double z) const {
  const bernoulli_state s = state(z);
  return -eval_potential(t, s).g + t * eval(t, s).g;
}

double truncated_law::phi_t(double t, double z) const {
  const density d = eval(t, z);
  return 0.5 * d.g + t * d.g_t;
}

double truncated_law::lambda(double big_lambda, bool allow_truncated) const {
  if (!(big_lambda > 0.0) || !std::isfinite(big_lambda)) raise(error_kind::invalid_lambda, "Lambda must be positive");
  const double t = big_lambda * big_lambda;
  const bernoulli_state s = state(flow_->q());
  if (!allow_truncated && t >= s.tc) {
    std::ostringstream os;
    os << "Lambda^2 = " << t << " reaches the sonic value " << s.tc << " on the free streamline";
    raise(error_kind::sonic_free_boundary, os.str());
  }
  return std::sqrt(phi(t, flow_->q()));
}

}  // namespace jetfb
