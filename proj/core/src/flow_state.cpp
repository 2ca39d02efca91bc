#include "jetfb/flow_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <math.h>  // pchip uses unqualified isnan
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "jetfb/errors.hpp"

namespace jetfb {

namespace {

constexpr int kFluxPanels = 512;
constexpr int kScanPoints = 4001;

using gauss10 = boost::math::quadrature::gauss<double, 10>;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- gas_law

gas_law::gas_law(double gamma) : gamma_(gamma) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) raise(error_kind::configuration, "gamma must exceed 1");
}

double gas_law::enthalpy(double rho) const { return std::pow(rho, gamma_ - 1.0) / (gamma_ - 1.0); }

double gas_law::pressure(double rho) const { return std::pow(rho, gamma_) / gamma_; }

double gas_law::sound_speed(double rho) const { return std::pow(rho, 0.5 * (gamma_ - 1.0)); }

double gas_law::momentum_sq(double rho, double s) const { return 2.0 * rho * rho * (s - enthalpy(rho)); }

double gas_law::momentum_sq_drho(double rho, double s) const {
  return 4.0 * rho * (s - 0.5 * (gamma_ + 1.0) * enthalpy(rho));
}

double gas_law::critical_density(double s) const {
  return std::pow(2.0 * (gamma_ - 1.0) * s / (gamma_ + 1.0), 1.0 / (gamma_ - 1.0));
}

double gas_law::max_density(double s) const { return std::pow((gamma_ - 1.0) * s, 1.0 / (gamma_ - 1.0)); }

double gas_law::critical_momentum_sq(double s) const {
  return std::pow(2.0 * (gamma_ - 1.0) * s / (gamma_ + 1.0), (gamma_ + 1.0) / (gamma_ - 1.0));
}

double gas_law::critical_momentum_sq_ds(double s) const {
  return (gamma_ + 1.0) / (gamma_ - 1.0) * critical_momentum_sq(s) / s;
}

double gas_law::density_from_momentum(double t, double s) const {
  if (!(s > 0.0)) raise(error_kind::domain, "Bernoulli constant must be positive, got " + fmt(s));
  if (!(t >= 0.0)) raise(error_kind::domain, "squared momentum must be non-negative, got " + fmt(t));
  const double tc = critical_momentum_sq(s);
  if (t >= tc) raise(error_kind::supersonic_input, "t = " + fmt(t) + " >= t_c = " + fmt(tc));
  double lo = critical_density(s);
  double hi = max_density(s);
  if (t == 0.0) return hi;
  // The residual is concave and decreasing on [lo, hi]; Newton from hi
  // approaches the root monotonically from the right.
  double rho = hi;
  for (int it = 0; it < 100; ++it) {
    const double f = momentum_sq(rho, s) - t;
    if (f == 0.0) return rho;
    if (f > 0.0) lo = rho; else hi = rho;
    const double fp = momentum_sq_drho(rho, s);
    double next = rho - f / fp;
    if (std::isfinite(next) && std::abs(next - rho) <= 4.0 * std::numeric_limits<double>::epsilon() * rho) return next;
    if (!(next >= lo && next <= hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    rho = next;
  }
  // bisection fallback
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (momentum_sq(mid, s) - t > 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// -------------------------------------------------------- upstream_profile

upstream_profile::upstream_profile(double hbar, fn u, fn du, fn d2u, fn curv, bool irrotational)
    : hbar_(hbar), u_(std::move(u)), du_(std::move(du)), d2u_(std::move(d2u)), curv_(std::move(curv)),
      irrotational_(irrotational) {
  if (!(hbar > 1.0)) raise(error_kind::configuration, "upstream height Hbar must exceed 1");
  validate_and_scan();
}

upstream_profile upstream_profile::constant(double hbar, double u0) {
  if (!(u0 > 0.0)) raise(error_kind::configuration, "upstream speed must be positive");
  return upstream_profile(
      hbar, [u0](double) { return u0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
      [](double) { return 0.0; }, true);
}

upstream_profile upstream_profile::power(double hbar, double a, double b, double n) {
  if (!(n == 2.0 || n >= 4.0)) raise(error_kind::configuration, "power profile exponent must be 2 or >= 4");
  if (b == 0.0) return constant(hbar, a);
  return upstream_profile(
      hbar, [a, b, n](double y) { return a + b * std::pow(y, n); },
      [b, n](double y) { return b * n * std::pow(y, n - 1.0); },
      [b, n](double y) { return b * n * (n - 1.0) * std::pow(y, n - 2.0); },
      [b, n](double y) { return n == 2.0 ? 0.0 : b * n * (n - 2.0) * std::pow(y, n - 4.0); }, false);
}

upstream_profile upstream_profile::table(std::vector<double> ys, std::vector<double> us) {
  if (ys.size() < 4 || ys.size() != us.size()) raise(error_kind::configuration, "profile table needs >= 4 samples");
  if (ys.front() != 0.0) raise(error_kind::configuration, "profile table must start at y = 0");
  for (std::size_t k = 1; k < ys.size(); ++k)
    if (!(ys[k] > ys[k - 1])) raise(error_kind::configuration, "profile table heights must increase");
  const double hbar = ys.back();
  bool flat = std::all_of(us.begin(), us.end(), [&](double u) { return u == us.front(); });
  if (flat) return constant(hbar, us.front());
  auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
      std::move(ys), std::move(us), 0.0);
  const double step = 1e-5 * hbar;
  auto du = [spline](double y) { return spline->prime(y); };
  auto d2u = [spline, step, hbar](double y) {
    const double a = std::max(0.0, y - step), b = std::min(hbar, y + step);
    return (spline->prime(b) - spline->prime(a)) / (b - a);
  };
  auto curv = [du, d2u, step](double y) {
    const double yy = std::max(y, 10.0 * step);
    return (d2u(yy) - du(yy) / yy) / (yy * yy);
  };
  return upstream_profile(hbar, [spline](double y) { return (*spline)(y); }, du, d2u, curv, false);
}

double upstream_profile::value(double y) const {
  if (y <= 0.0) return u_(0.0);
  if (y <= hbar_) return u_(y);
  const double s = std::min(y - hbar_, blend_length());
  return u_(hbar_) + du_(hbar_) * (s - 0.5 * s * s / blend_length());
}

double upstream_profile::d1(double y) const {
  if (y <= 0.0) return 0.0;
  if (y <= hbar_) return du_(y);
  const double s = y - hbar_;
  return s >= blend_length() ? 0.0 : du_(hbar_) * (1.0 - s / blend_length());
}

double upstream_profile::d2(double y) const {
  if (y < 0.0) return 0.0;
  if (y <= hbar_) return d2u_(y);
  return y - hbar_ >= blend_length() ? 0.0 : -du_(hbar_) / blend_length();
}

double upstream_profile::curvature(double y) const {
  if (y <= 0.0) return curv_(0.0);
  if (y <= hbar_) return curv_(y);
  return (d2(y) - d1(y) / y) / (y * y);
}

void upstream_profile::validate_and_scan() {
  u_min_ = std::numeric_limits<double>::infinity();
  u_max_ = -u_min_;
  double d2max = 0.0, cmax = 0.0;
  for (int k = 0; k < kScanPoints; ++k) {
    const double y = hbar_ * k / (kScanPoints - 1);
    const double u = u_(y);
    if (!(u > 0.0)) raise(error_kind::configuration, "upstream speed must be positive on [0, Hbar]");
    if (du_(y) < -1e-12 * std::max(1.0, std::abs(u)))
      raise(error_kind::configuration, "upstream speed must be nondecreasing in y");
    u_min_ = std::min(u_min_, u);
    u_max_ = std::max(u_max_, u);
    d2max = std::max(d2max, std::abs(d2u_(y)));
    if (k > 0) cmax = std::max(cmax, std::abs(curv_(y)));
  }
  if (std::abs(du_(0.0)) > 1e-10 * std::max(1.0, u_max_))
    raise(error_kind::configuration, "upstream speed must have zero slope on the axis");
  kappa0_ = d2max + cmax;
}

// ----------------------------------------------------------- upstream_flow

upstream_flow::upstream_flow(gas_law gas, upstream_profile profile, double q)
    : gas_(gas), profile_(std::move(profile)), q_(q) {
  if (!(q > 0.0) || !std::isfinite(q)) raise(error_kind::configuration, "mass flux Q must be positive");
  const double top = profile_.hbar() + profile_.blend_length();
  panel_y_.resize(kFluxPanels + 1);
  panel_f_.resize(kFluxPanels + 1);
  panel_f_[0] = 0.0;
  for (int k = 0; k <= kFluxPanels; ++k) panel_y_[k] = top * k / kFluxPanels;
  for (int k = 0; k < kFluxPanels; ++k) {
    auto integrand = [this](double s) { return s * profile_.value(s); };
    panel_f_[k + 1] = panel_f_[k] + gauss10::integrate(integrand, panel_y_[k], panel_y_[k + 1]);
  }
  const double mass = flux_integral(profile_.hbar());
  rho_bar_ = q_ / mass;
  const double h = gas_.enthalpy(rho_bar_);
  b_lower_ = 0.5 * profile_.min_value() * profile_.min_value() + h;
  b_upper_ = 0.5 * profile_.max_value() * profile_.max_value() + h;
  q_tilde_ = std::pow(profile_.max_value(), 2.0 / (gas_.gamma() - 1.0)) * mass;
  if (profile_.irrotational()) constant_state_ = make_state(bernoulli(0.0), 0.0, 0.0);
}

double upstream_flow::flux_integral(double y) const {
  if (y <= 0.0) return 0.5 * profile_.value(0.0) * y * y;
  if (profile_.irrotational()) return 0.5 * profile_.value(0.0) * y * y;
  const double top = panel_y_.back();
  if (y >= top) return panel_f_.back() + 0.5 * profile_.value(top) * (y * y - top * top);
  const auto k = static_cast<std::size_t>(std::min<double>(kFluxPanels - 1, std::floor(y / top * kFluxPanels)));
  auto integrand = [this](double s) { return s * profile_.value(s); };
  return panel_f_[k] + gauss10::integrate(integrand, panel_y_[k], y);
}

double upstream_flow::streamline_height(double psi) const {
  if (!(psi >= 0.0 && psi <= q_ * (1.0 + 1e-14)))
    raise(error_kind::domain, "stream value " + fmt(psi) + " outside [0, Q]");
  return streamline_height_ext(std::min(psi, q_));
}

double upstream_flow::streamline_height_ext(double psi) const {
  if (psi <= 0.0) return 0.0;
  const double f = psi / rho_bar_;
  if (profile_.irrotational()) return std::sqrt(2.0 * f / profile_.value(0.0));
  const double top = panel_y_.back();
  if (f >= panel_f_.back()) {
    const double uc = profile_.value(top);
    return std::sqrt(top * top + 2.0 * (f - panel_f_.back()) / uc);
  }
  auto it = std::upper_bound(panel_f_.begin(), panel_f_.end(), f);
  const auto k = static_cast<std::size_t>(std::distance(panel_f_.begin(), it)) - 1;
  double lo = panel_y_[k], hi = panel_y_[k + 1];
  double y = lo + (hi - lo) * (f - panel_f_[k]) / (panel_f_[k + 1] - panel_f_[k]);
  for (int iter = 0; iter < 60; ++iter) {
    const double r = flux_integral(y) - f;
    if (r == 0.0) return y;
    if (r > 0.0) hi = y; else lo = y;
    const double dr = y * profile_.value(y);
    double next = dr > 0.0 ? y - r / dr : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= 1e-15 * std::max(1.0, y)) return next;
    y = next;
  }
  return y;
}

double upstream_flow::bernoulli_at_height(double y) const {
  const double u = profile_.value(y);
  return 0.5 * u * u + gas_.enthalpy(rho_bar_);
}

double upstream_flow::bernoulli(double z) const {
  if (profile_.irrotational() || z <= 0.0) return bernoulli_at_height(0.0);
  return bernoulli_at_height(streamline_height_ext(z));
}

double upstream_flow::bernoulli_d1(double z) const {
  if (profile_.irrotational() || z <= 0.0) return 0.0;
  const double y = streamline_height_ext(z);
  if (y < 1e-12) return profile_.d2(0.0) / rho_bar_;
  return profile_.d1(y) / (rho_bar_ * y);
}

double upstream_flow::bernoulli_d2(double z) const {
  if (profile_.irrotational() || z <= 0.0) return 0.0;
  const double y = streamline_height_ext(z);
  return profile_.curvature(y) / (rho_bar_ * rho_bar_ * profile_.value(y));
}

bernoulli_state upstream_flow::make_state(double b, double db, double d2b) const {
  bernoulli_state s;
  s.b = b;
  s.db = db;
  s.d2b = d2b;
  s.rho_m = gas_.max_density(b);
  s.rho_c = gas_.critical_density(b);
  s.tc = gas_.critical_momentum_sq(b);
  s.dtc_db = gas_.critical_momentum_sq_ds(b);
  return s;
}

bernoulli_state upstream_flow::state(double z) const {
  if (profile_.irrotational()) return constant_state_;
  if (z <= 0.0) return make_state(bernoulli_at_height(0.0), 0.0, 0.0);
  const double y = streamline_height_ext(z);
  const double u = profile_.value(y);
  const double db = y < 1e-12 ? profile_.d2(0.0) / rho_bar_ : profile_.d1(y) / (rho_bar_ * y);
  const double d2b = profile_.curvature(y) / (rho_bar_ * rho_bar_ * u);
  return make_state(0.5 * u * u + gas_.enthalpy(rho_bar_), db, d2b);
}

double upstream_flow::g_lower() const { return 1.0 / gas_.max_density(b_upper_); }

double upstream_flow::g_upper() const { return 1.0 / gas_.critical_density(b_lower_); }

// ------------------------------------------------------------------ cutoff

double cutoff(double s) {
  if (s <= -1.0) return 1.0;
  if (s >= -0.5) return 0.0;
  const double u = 2.0 * (s + 1.0);
  return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

double cutoff_d1(double s) {
  if (s <= -1.0 || s >= -0.5) return 0.0;
  const double u = 2.0 * (s + 1.0);
  return -60.0 * u * u * (1.0 - u) * (1.0 - u);
}

double cutoff_d2(double s) {
  if (s <= -1.0 || s >= -0.5) return 0.0;
  const double u = 2.0 * (s + 1.0);
  return -240.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
}

}  // namespace jetfb
