#include "jetfb/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <math.h>  // pchip uses unqualified isnan
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/roots.hpp>

#include "jetfb/energy.hpp"
#include "jetfb/errors.hpp"
#include "jetfb/flow_state.hpp"

namespace jetfb {

namespace {

constexpr int kCrossingSteps = 80;
constexpr double kMinLinkFraction = 0.01;
constexpr int kMaxHalvings = 40;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// bisection on a fluid predicate that holds at a and fails at b
template <class Pred>
double predicate_crossing(Pred inside, double a, double b) {
  for (int k = 0; k < kCrossingSteps; ++k) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    if (inside(m)) a = m; else b = m;
  }
  return 0.5 * (a + b);
}

}  // namespace

// ---------------------------------------------------------------- nozzle

nozzle nozzle::logarithmic(double hbar, double a) {
  if (!(hbar > 1.0)) raise(error_kind::configuration, "nozzle height hbar must exceed 1");
  if (!(a > 0.0)) raise(error_kind::configuration, "log nozzle coefficient must be positive");
  nozzle n(kind::log, hbar);
  n.a_ = a;
  n.n_ = [hbar, a](double y) { return a * std::log((hbar - y) / (hbar - 1.0)); };
  n.dn_ = [hbar, a](double y) { return -a / (hbar - y); };
  return n;
}

nozzle nozzle::table(double hbar, std::vector<double> ys, std::vector<double> xs) {
  if (!(hbar > 1.0)) raise(error_kind::configuration, "nozzle height hbar must exceed 1");
  if (ys.size() != xs.size() || ys.size() < 3) raise(error_kind::configuration, "nozzle table needs at least 3 (y, N) rows");
  if (ys.front() != 1.0 || xs.front() != 0.0) raise(error_kind::configuration, "nozzle table must start at (y, N) = (1, 0)");
  for (std::size_t k = 1; k < ys.size(); ++k)
    if (!(ys[k] > ys[k - 1])) raise(error_kind::configuration, "nozzle table heights must increase");
  if (!(ys.back() < hbar)) raise(error_kind::configuration, "nozzle table must stay below hbar");
  const double y_last = ys.back(), x_last = xs.back();
  auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(ys), std::move(xs));
  const double tail_slope = spline->prime(y_last);
  if (!(tail_slope < 0.0)) raise(error_kind::configuration, "nozzle table must end with a decreasing N");
  const double c = -tail_slope * (hbar - y_last);
  nozzle n(kind::table, hbar);
  n.n_ = [=](double y) {
    if (y <= y_last) return (*spline)(y);
    return x_last + c * std::log((hbar - y) / (hbar - y_last));
  };
  n.dn_ = [=](double y) {
    if (y <= y_last) return spline->prime(y);
    return -c / (hbar - y);
  };
  return n;
}

nozzle nozzle::rectangle(double hbar) {
  if (!(hbar > 0.0)) raise(error_kind::configuration, "channel height hbar must be positive");
  return nozzle(kind::rectangle, hbar);
}

double nozzle::x_of(double y) const {
  if (kind_ == kind::rectangle) raise(error_kind::domain, "rectangle domain has no nozzle wall");
  if (!(y >= 1.0 && y < hbar_)) raise(error_kind::domain, "nozzle wall is defined for 1 <= y < hbar, got y = " + fmt(y));
  return n_(y);
}

double nozzle::slope(double y) const {
  if (kind_ == kind::rectangle) raise(error_kind::domain, "rectangle domain has no nozzle wall");
  if (!(y >= 1.0 && y < hbar_)) raise(error_kind::domain, "nozzle wall is defined for 1 <= y < hbar, got y = " + fmt(y));
  return dn_(y);
}

double nozzle::depth_height(double mu) const {
  if (kind_ == kind::rectangle) return hbar_;
  if (kind_ == kind::log) return hbar_ - (hbar_ - 1.0) * std::exp(-mu / a_);
  const double top = std::nextafter(hbar_, 1.0);
  if (!(n_(top) < -mu)) raise(error_kind::truncation_too_deep, "nozzle never reaches x = -mu = " + fmt(-mu));
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve([&](double y) { return n_(y) + mu; }, 1.0, top,
                                                   boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

bool nozzle::fluid(double x, double y) const {
  if (!(y > 0.0)) return false;
  if (kind_ == kind::rectangle) return y < hbar_;
  if (y < 1.0) return true;
  if (y >= hbar_) return false;
  return x < std::min(n_(y), 0.0);
}

double nozzle::vertical_crossing(double x, double y0, double y1) const {
  return predicate_crossing([&](double y) { return fluid(x, y); }, y0, y1);
}

double nozzle::horizontal_crossing(double y, double x0, double x1) const {
  return predicate_crossing([&](double x) { return fluid(x, y); }, x0, x1);
}

// ---------------------------------------------------------------- domain

domain_grid::domain_grid(const nozzle& nz, const domain_options& opt) : nozzle_(nz), opt_(opt) {
  if (!(opt.mu > 0.0) || !(opt.r > 0.0)) raise(error_kind::parameter, "truncation extents mu and R must be positive");
  if (!(opt.h > 0.0)) raise(error_kind::parameter, "grid spacing h must be positive");
  if (!(opt.s_exp > 1.5 && opt.s_exp < 2.0)) raise(error_kind::parameter, "inlet exponent must lie in (3/2, 2)");
  nx_ = std::max(2, static_cast<int>(std::lround((opt.mu + opt.r) / opt.h)));
  hx_ = (opt.mu + opt.r) / nx_;
  hy_ = opt.h;
  const double hbar = nz.hbar();
  ny_ = static_cast<int>(std::ceil(hbar / hy_ - 0.5));
  while (ny_ > 0 && y(ny_ - 1) >= hbar) --ny_;
  if (ny_ < 2) raise(error_kind::resolution, "grid spacing leaves fewer than two rows below hbar");

  b_mu_ = nz.depth_height(opt.mu);
  if (!is_rectangle()) {
    if (!(b_mu_ > 1.0 && b_mu_ < hbar)) raise(error_kind::truncation_too_deep, "no height b_mu in (1, hbar) with N(b_mu) = -mu");
    if (y(ny_ - 1) >= 1.0) deepest_wall_x_ = nz.x_of(y(ny_ - 1));
    set_inlet_layer(opt.k_mu > 0.0 ? opt.k_mu : 0.125 * (b_mu_ - 1.0));
  }
  classify();
}

void domain_grid::set_inlet_layer(double k_mu) {
  if (is_rectangle()) return;
  if (!(k_mu > 0.0 && k_mu < 0.25 * (b_mu_ - 1.0)))
    raise(error_kind::parameter, "inlet layer width k_mu = " + fmt(k_mu) + " outside (0, (b_mu - 1)/4)");
  if (hy_ > 0.25 * k_mu)
    raise(error_kind::resolution, "h = " + fmt(hy_) + " does not resolve the inlet layer k_mu = " + fmt(k_mu));
  k_mu_ = k_mu;
}

bool domain_grid::fluid(int i, int j) const {
  if (i < 0 || i > nx_ || j < 0 || j >= ny_) return false;
  return kinds_[index(i, j)] != node_kind::solid;
}

bool domain_grid::link_to_wall(int i, int j, direction d) const {
  switch (d) {
    case direction::east: return i < nx_ && !fluid(i + 1, j);
    case direction::west: return i > 0 && !fluid(i - 1, j);
    case direction::north: return !fluid(i, j + 1);
    case direction::south: return j > 0 && !fluid(i, j - 1);
  }
  return false;
}

double domain_grid::column_top(int i) const {
  int j = 0;
  while (j + 1 < ny_ && fluid(i, j + 1)) ++j;
  return y(j) + link(i, j, direction::north);
}

void domain_grid::classify() {
  kinds_.assign(node_count(), node_kind::solid);
  links_.assign(node_count(), {0.0, 0.0, 0.0, 0.0});
  for (int j = 0; j < ny_; ++j)
    for (int i = 0; i <= nx_; ++i) {
      if (!nozzle_.fluid(x(i), y(j))) continue;
      kinds_[index(i, j)] = i == 0 ? node_kind::inlet : (i == nx_ ? node_kind::outlet : node_kind::interior);
    }
  const double min_x = kMinLinkFraction * hx_, min_y = kMinLinkFraction * hy_;
  for (int j = 0; j < ny_; ++j)
    for (int i = 0; i <= nx_; ++i) {
      if (!fluid(i, j)) continue;
      auto& l = links_[index(i, j)];
      const double xi = x(i), yj = y(j);
      if (i < nx_)
        l[0] = fluid(i + 1, j) ? hx_ : std::clamp(nozzle_.horizontal_crossing(yj, xi, x(i + 1)) - xi, min_x, hx_);
      if (i > 0)
        l[1] = fluid(i - 1, j) ? hx_ : std::clamp(xi - nozzle_.horizontal_crossing(yj, xi, x(i - 1)), min_x, hx_);
      if (fluid(i, j + 1)) {
        l[2] = hy_;
      } else {
        const double above = j + 1 < ny_ ? y(j + 1) : nozzle_.hbar();
        l[2] = std::clamp(nozzle_.vertical_crossing(xi, yj, above) - yj, min_y, hy_);
      }
      if (j == 0) l[3] = 0.5 * hy_;
      else l[3] = fluid(i, j - 1) ? hy_ : std::clamp(yj - nozzle_.vertical_crossing(xi, yj, y(j - 1)), min_y, hy_);
    }
}

void domain_grid::select_inlet_layer(const truncated_law& law) {
  if (is_rectangle()) return;
  const double q = law.flow().q();
  double k = opt_.k_mu > 0.0 ? opt_.k_mu : 0.125 * (b_mu_ - 1.0);
  halvings_ = 0;
  for (;;) {
    set_inlet_layer(k);
    std::vector<double> profile;
    for (int j = 0; j < ny_ && fluid(0, j); ++j) profile.push_back(inlet_profile(*this, q, y(j)));
    const auto res = column_profile_residual(*this, 0, law, profile);
    bool ok = true;
    for (std::size_t j = 0; j < res.size(); ++j) {
      const double below = j > 0 ? profile[j - 1] : 0.0;
      const double above = j + 1 < profile.size() ? profile[j + 1] : q;
      // rows whose stencil sees only the zero part are independent of k_mu
      if (below == 0.0 && profile[j] == 0.0 && above == 0.0) continue;
      if (res[j] < 0.0) ok = false;
    }
    if (ok) return;
    if (opt_.k_mu > 0.0) raise(error_kind::parameter, "configured k_mu = " + fmt(k) + " is not a discrete subsolution");
    if (++halvings_ > kMaxHalvings) raise(error_kind::resolution, "inlet layer selection did not terminate");
    k *= 0.5;
  }
}

// ---------------------------------------------------------------- boundary data

double outlet_height(double lambda, double q) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) raise(error_kind::invalid_lambda, "Lambda must be positive");
  if (lambda <= q) return 1.0;
  const double target = q / lambda;
  boost::uintmax_t iters = 200;
  try {
    const auto r = boost::math::tools::toms748_solve(
        [&](double hh) { return hh * hh * std::exp(1.0 - hh) - target; }, 0.0, 1.0,
        boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
  } catch (const std::exception& e) {
    raise(error_kind::invalid_lambda, std::string("outlet height root failed: ") + e.what());
  }
}

double outlet_profile(double y, double lambda, double q) {
  if (y >= 1.0) return q;
  if (lambda > q) return std::min(lambda * y * y * std::exp(1.0 - y), q);
  return q * y * y * std::exp(1.0 - y);
}

double inlet_profile(const domain_grid& grid, double q, double y) {
  const double lo = grid.b_mu_prime();
  if (y <= lo) return 0.0;
  if (y >= grid.b_mu()) return q;
  return q * std::pow((y - lo) / grid.k_mu(), grid.s_exp());
}

boundary_values boundary_data(const domain_grid& grid, const upstream_flow& flow, double lambda) {
  boundary_values bv;
  const double q = flow.q();
  bv.lambda = lambda;
  bv.inlet.assign(grid.ny(), q);
  bv.outlet.assign(grid.ny(), q);
  if (grid.is_rectangle()) {
    for (int j = 0; j < grid.ny(); ++j) bv.inlet[j] = bv.outlet[j] = flow.psi_bar(grid.y(j));
    return bv;
  }
  bv.h_star = outlet_height(lambda, q);
  for (int j = 0; j < grid.ny(); ++j) {
    if (grid.fluid(0, j)) bv.inlet[j] = inlet_profile(grid, q, grid.y(j));
    if (grid.fluid(grid.nx(), j)) bv.outlet[j] = outlet_profile(grid.y(j), lambda, q);
  }
  return bv;
}

std::vector<double> column_profile_residual(const domain_grid& grid, int column, const truncated_law& law,
                                            const std::vector<double>& profile) {
  std::vector<double> ys(profile.size());
  for (std::size_t j = 0; j < ys.size(); ++j) ys[j] = grid.y(static_cast<int>(j));
  const int top = static_cast<int>(profile.size()) - 1;
  const double y_top = grid.y(top) + grid.link(column, top, direction::north);
  return radial_residual(law, ys, profile, y_top, law.flow().q());
}

}  // namespace jetfb
