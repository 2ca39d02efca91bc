#include "jetfb/energy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "jetfb/errors.hpp"
#include "jetfb/flow_state.hpp"

namespace jetfb {

namespace {

constexpr std::size_t kBlock = 4096;

// Runs fn(block) for every block of [0, n) on up to `workers` threads. Block
// boundaries do not depend on the worker count, so per-block partial results
// combined in block order are reproducible.
template <class Fn>
void for_blocks(std::size_t n, int workers, Fn fn) {
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  if (workers <= 1 || blocks < 2) {
    for (std::size_t b = 0; b < blocks; ++b) fn(b, b * kBlock, std::min(n, (b + 1) * kBlock));
    return;
  }
  const std::size_t nw = std::min<std::size_t>(workers, blocks);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < blocks; b += nw) fn(b, b * kBlock, std::min(n, (b + 1) * kBlock));
    });
  for (auto& t : pool) t.join();
}

double checked(double v) {
  if (!std::isfinite(v)) raise(error_kind::domain, "non-finite value in stream function field");
  return v;
}

}  // namespace

double indicator(double psi, double q, double delta) {
  if (delta <= 0.0) return psi < q ? 1.0 : 0.0;
  const double s = (psi - (q - delta)) / delta;
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  return 1.0 - s * s * (3.0 - 2.0 * s);
}

double indicator_d1(double psi, double q, double delta) {
  if (delta <= 0.0) return 0.0;
  const double s = (psi - (q - delta)) / delta;
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return -6.0 * s * (1.0 - s) / delta;
}

double indicator_d2(double psi, double q, double delta) {
  if (delta <= 0.0) return 0.0;
  const double s = (psi - (q - delta)) / delta;
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return -6.0 * (1.0 - 2.0 * s) / (delta * delta);
}

int workers_from_env(int fallback) {
  const char* env = std::getenv("JETFB_WORKERS");
  if (!env) return fallback;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1 || v > 1024) return fallback;
  return static_cast<int>(v);
}

// ---------------------------------------------------------------- assembly

discrete_energy::discrete_energy(const domain_grid& grid, const truncated_law& law)
    : grid_(&grid), law_(&law), q_(law.flow().q()) {
  build();
}

void discrete_energy::build() {
  const domain_grid& g = *grid_;
  const int nx = g.nx(), ny = g.ny();
  unknown_of_node_.assign(g.node_count(), -1);
  fixed_of_node_.assign(g.node_count(), -1);
  std::size_t n_fixed = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const node_kind k = g.kind(i, j);
      if (k == node_kind::interior) {
        unknown_of_node_[g.index(i, j)] = static_cast<long>(unknown_i_.size());
        unknown_i_.push_back(i);
        unknown_j_.push_back(j);
      } else if (k != node_kind::solid) {
        fixed_of_node_[g.index(i, j)] = static_cast<long>(n_fixed++);
      }
    }
  const std::size_t nu = unknown_i_.size();
  fixed_values_.assign(n_fixed + 2, 0.0);
  fixed_values_[n_fixed + 1] = q_;
  const std::uint32_t zero_slot = static_cast<std::uint32_t>(nu + n_fixed);
  const std::uint32_t wall_slot = zero_slot + 1;

  auto is_fluid = [&](int i, int j) { return j < 0 ? true : g.fluid(i, j); };
  auto row_y = [&](int j) { return j < 0 ? 0.0 : g.y(j); };
  auto ext_index = [&](int i, int j) -> std::uint32_t {
    if (j < 0) return zero_slot;
    const std::size_t n = g.index(i, j);
    if (unknown_of_node_[n] >= 0) return static_cast<std::uint32_t>(unknown_of_node_[n]);
    return static_cast<std::uint32_t>(nu + fixed_of_node_[n]);
  };

  std::vector<double> dual_node(g.node_count(), 0.0);
  triangles_.clear();
  triangles_.reserve(4 * g.node_count());
  for (int j = -1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      // corners in counter-clockwise order: BL, BR, TR, TL
      const std::array<int, 4> ci = {i, i + 1, i + 1, i};
      const std::array<int, 4> cj = {j, j, j + 1, j + 1};
      std::array<bool, 4> wet;
      int n_wet = 0;
      for (int c = 0; c < 4; ++c) {
        wet[c] = is_fluid(ci[c], cj[c]);
        n_wet += wet[c];
      }
      // lumped mass: each vertex of the fluid polygon, wall points included, takes an equal share
      if (n_wet == 0) continue;
      const double x0 = g.x(i), y0 = row_y(j), y1 = row_y(j + 1);
      const double hx = g.hx(), hy = y1 - y0;
      // legs of every wet corner along the cell edges
      std::array<double, 4> lx{}, ly{};
      std::array<corner_triangle, 4> tri{};
      double tri_area = 0.0;
      for (int c = 0; c < 4; ++c) {
        if (!wet[c]) continue;
        const int sx = (c == 0 || c == 3) ? 1 : -1;
        const int sy = (c == 0 || c == 1) ? 1 : -1;
        const int hc = c ^ 1;      // horizontal partner: 0<->1, 2<->3
        const int vc = 3 - c;      // vertical partner: 0<->3, 1<->2
        corner_triangle& t = tri[c];
        t.p = ext_index(ci[c], cj[c]);
        if (wet[hc]) {
          lx[c] = hx;
          t.a = ext_index(ci[hc], cj[hc]);
        } else {
          lx[c] = g.link(ci[c], cj[c], sx > 0 ? direction::east : direction::west);
          t.a = wall_slot;
        }
        if (wet[vc]) {
          ly[c] = hy;
          t.b = ext_index(ci[vc], cj[vc]);
        } else {
          ly[c] = g.link(ci[c], cj[c], sy > 0 ? direction::north : direction::south);
          t.b = wall_slot;
        }
        t.cx = sx / lx[c];
        t.cy = sy / ly[c];
        t.y = row_y(cj[c]) + sy * 0.5 * ly[c];
        t.wa = 0.5 * lx[c] * ly[c];
        tri_area += t.wa;
      }
      // fluid polygon of the cell, walls cut linearly between corners
      const std::array<double, 4> px = {x0, x0 + hx, x0 + hx, x0};
      const std::array<double, 4> py = {y0, y0, y1, y1};
      std::vector<std::array<double, 2>> poly;
      for (int c = 0; c < 4; ++c) {
        const int d = (c + 1) % 4;
        if (wet[c]) poly.push_back({px[c], py[c]});
        if (wet[c] != wet[d]) {
          const int from = wet[c] ? c : d, to = wet[c] ? d : c;
          const bool horizontal = (c == 0 || c == 2);
          const double len = horizontal ? lx[from] : ly[from];
          const double span = horizontal ? hx : hy;
          const double f = len / span;
          poly.push_back({px[from] + f * (px[to] - px[from]), py[from] + f * (py[to] - py[from])});
        }
      }
      double area = 0.0;
      for (std::size_t k = 0; k < poly.size(); ++k) {
        const auto& u = poly[k];
        const auto& v = poly[(k + 1) % poly.size()];
        area += u[0] * v[1] - v[0] * u[1];
      }
      area = 0.5 * std::abs(area);
      const double w = area / tri_area;
      for (int c = 0; c < 4; ++c) {
        if (!wet[c]) continue;
        tri[c].wa *= w;
        triangles_.push_back(tri[c]);
        if (cj[c] >= 0) dual_node[g.index(ci[c], cj[c])] += area / poly.size();
      }
    }

  dual_.resize(nu);
  y_.resize(nu);
  for (std::size_t k = 0; k < nu; ++k) {
    dual_[k] = dual_node[g.index(unknown_i_[k], unknown_j_[k])];
    y_[k] = g.y(unknown_j_[k]);
  }

  // incidence lists in triangle order
  inc_ptr_.assign(nu + 1, 0);
  for (const auto& t : triangles_)
    for (std::uint32_t v : {t.p, t.a, t.b})
      if (v < nu) ++inc_ptr_[v + 1];
  for (std::size_t k = 0; k < nu; ++k) inc_ptr_[k + 1] += inc_ptr_[k];
  inc_.resize(inc_ptr_[nu]);
  {
    std::vector<std::size_t> fill(inc_ptr_.begin(), inc_ptr_.end() - 1);
    for (std::size_t n = 0; n < triangles_.size(); ++n) {
      const auto& t = triangles_[n];
      const std::array<std::uint32_t, 3> v = {t.p, t.a, t.b};
      for (std::uint8_t s = 0; s < 3; ++s)
        if (v[s] < nu) inc_[fill[v[s]]++] = {static_cast<std::uint32_t>(n), s};
    }
  }

  // lower-triangular Hessian pattern
  std::vector<std::vector<int>> rows(nu);
  for (std::size_t k = 0; k < nu; ++k) rows[k].push_back(static_cast<int>(k));
  for (const auto& t : triangles_) {
    const std::array<std::uint32_t, 3> v = {t.p, t.a, t.b};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        if (v[r] < nu && v[c] < nu && v[r] > v[c]) rows[v[c]].push_back(static_cast<int>(v[r]));
  }
  col_ptr_.assign(nu + 1, 0);
  row_index_.clear();
  for (std::size_t k = 0; k < nu; ++k) {
    auto& r = rows[k];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    row_index_.insert(row_index_.end(), r.begin(), r.end());
    col_ptr_[k + 1] = static_cast<int>(row_index_.size());
  }
  diag_slot_.resize(nu);
  for (std::size_t k = 0; k < nu; ++k) diag_slot_[k] = col_ptr_[k];
  auto slot_of = [&](std::uint32_t r, std::uint32_t c) -> std::int64_t {
    const auto begin = row_index_.begin() + col_ptr_[c], end = row_index_.begin() + col_ptr_[c + 1];
    return std::lower_bound(begin, end, static_cast<int>(r)) - row_index_.begin();
  };
  hess_slot_.assign(9 * triangles_.size(), -1);
  for (std::size_t n = 0; n < triangles_.size(); ++n) {
    const auto& t = triangles_[n];
    const std::array<std::uint32_t, 3> v = {t.p, t.a, t.b};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        if (v[r] < nu && v[c] < nu && v[r] >= v[c]) hess_slot_[9 * n + 3 * r + c] = slot_of(v[r], v[c]);
  }
}

void discrete_energy::set_boundary(const boundary_values& bv) {
  const domain_grid& g = *grid_;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i <= g.nx(); i += g.nx()) {
      const long f = fixed_of_node_[g.index(i, j)];
      if (f < 0) continue;
      fixed_values_[f] = i == 0 ? bv.inlet[j] : bv.outlet[j];
    }
}

void discrete_energy::set_indicator(double lambda_eps, double delta) {
  if (!(lambda_eps >= 0.0) || !(delta >= 0.0)) raise(error_kind::parameter, "indicator weight and width must be non-negative");
  lambda_eps_ = lambda_eps;
  delta_ = delta;
}

std::vector<double> discrete_energy::gather(const std::vector<double>& field) const {
  if (field.size() != grid_->node_count()) raise(error_kind::domain, "field does not match the grid");
  std::vector<double> x(size());
  for (std::size_t k = 0; k < size(); ++k) x[k] = field[grid_->index(unknown_i_[k], unknown_j_[k])];
  return x;
}

std::vector<double> discrete_energy::scatter(const std::vector<double>& x) const {
  const domain_grid& g = *grid_;
  std::vector<double> field(g.node_count(), q_);
  for (std::size_t n = 0; n < field.size(); ++n) {
    if (unknown_of_node_[n] >= 0) field[n] = x[unknown_of_node_[n]];
    else if (fixed_of_node_[n] >= 0) field[n] = fixed_values_[fixed_of_node_[n]];
  }
  return field;
}

void discrete_energy::fill_extended(const std::vector<double>& x, std::vector<double>& ext) const {
  if (x.size() != size()) raise(error_kind::domain, "unknown vector does not match the grid");
  ext.resize(size() + fixed_values_.size());
  for (std::size_t k = 0; k < size(); ++k) ext[k] = checked(x[k]);
  std::copy(fixed_values_.begin(), fixed_values_.end(), ext.begin() + size());
}

std::vector<double> discrete_energy::extended(const std::vector<double>& x) const {
  std::vector<double> ext;
  fill_extended(x, ext);
  return ext;
}

double discrete_energy::triangle_terms(const std::vector<double>& ext, std::size_t begin, std::size_t end,
                                       std::vector<double>* local, bool with_z) const {
  const truncated_law& law = *law_;
  const bool irrotational = law.flow().profile().irrotational();
  const bernoulli_state fixed_state = irrotational ? law.state(0.0) : bernoulli_state{};
  double sum = 0.0;
  for (std::size_t n = begin; n < end; ++n) {
    const corner_triangle& t = triangles_[n];
    const double vp = ext[t.p], va = ext[t.a], vb = ext[t.b];
    const double px = t.cx * (va - vp), py = t.cy * (vb - vp);
    const double tt = (px * px + py * py) / (t.y * t.y);
    const double z = (vp + va + vb) / 3.0;
    const auto pot = law.eval_potential(tt, irrotational ? fixed_state : law.state(z));
    sum += t.wa * t.y * pot.g;
    if (local) {
      const double fx = 2.0 * t.wa * pot.g_t * px / t.y;
      const double fy = 2.0 * t.wa * pot.g_t * py / t.y;
      const double fz = with_z ? t.wa * t.y * pot.g_z / 3.0 : 0.0;
      double* out = local->data() + 3 * n;
      out[0] = -fx * t.cx - fy * t.cy + fz;
      out[1] = fx * t.cx + fz;
      out[2] = fy * t.cy + fz;
    }
  }
  return sum;
}

double discrete_energy::value(const std::vector<double>& x) const {
  std::vector<double> ext;
  fill_extended(x, ext);
  const std::size_t nt = triangles_.size();
  std::vector<double> partial((nt + kBlock - 1) / kBlock, 0.0);
  for_blocks(nt, workers_, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    partial[b] = triangle_terms(ext, lo, hi, nullptr, true);
  });
  double e = 0.0;
  for (double p : partial) e += p;
  if (lambda_eps_ > 0.0) {
    const double l2 = lambda_eps_ * lambda_eps_;
    for (std::size_t k = 0; k < size(); ++k) e += l2 * dual_[k] * y_[k] * indicator(x[k], q_, delta_);
  }
  return e;
}

double discrete_energy::gradient(const std::vector<double>& x, std::vector<double>& grad) const {
  std::vector<double> ext;
  fill_extended(x, ext);
  const std::size_t nt = triangles_.size();
  std::vector<double> local(3 * nt);
  std::vector<double> partial((nt + kBlock - 1) / kBlock, 0.0);
  for_blocks(nt, workers_, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    partial[b] = triangle_terms(ext, lo, hi, &local, true);
  });
  double e = 0.0;
  for (double p : partial) e += p;
  grad.assign(size(), 0.0);
  for_blocks(size(), workers_, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      double s = 0.0;
      for (std::size_t m = inc_ptr_[k]; m < inc_ptr_[k + 1]; ++m) s += local[3 * inc_[m].triangle + inc_[m].slot];
      grad[k] = s;
    }
  });
  if (lambda_eps_ > 0.0) {
    const double l2 = lambda_eps_ * lambda_eps_;
    for (std::size_t k = 0; k < size(); ++k) {
      e += l2 * dual_[k] * y_[k] * indicator(x[k], q_, delta_);
      grad[k] += l2 * dual_[k] * y_[k] * indicator_d1(x[k], q_, delta_);
    }
  }
  return e;
}

std::vector<double> discrete_energy::el_residual(const std::vector<double>& x) const {
  std::vector<double> ext;
  fill_extended(x, ext);
  const std::size_t nt = triangles_.size();
  std::vector<double> local(3 * nt);
  for_blocks(nt, workers_, [&](std::size_t, std::size_t lo, std::size_t hi) { triangle_terms(ext, lo, hi, &local, true); });
  std::vector<double> res(size(), 0.0);
  for (std::size_t k = 0; k < size(); ++k) {
    if (!(x[k] < q_ - delta_)) continue;
    double s = 0.0;
    for (std::size_t m = inc_ptr_[k]; m < inc_ptr_[k + 1]; ++m) s += local[3 * inc_[m].triangle + inc_[m].slot];
    res[k] = -s / dual_[k];
  }
  return res;
}

std::vector<double> discrete_energy::hessian_values(const std::vector<double>& x, hessian_kind kind) const {
  std::vector<double> ext;
  fill_extended(x, ext);
  const truncated_law& law = *law_;
  const bool irrotational = law.flow().profile().irrotational();
  const bernoulli_state fixed_state = irrotational ? law.state(0.0) : bernoulli_state{};
  const bool convex = kind == hessian_kind::convexified;
  std::vector<double> vals(row_index_.size(), 0.0);
  for (std::size_t n = 0; n < triangles_.size(); ++n) {
    const corner_triangle& t = triangles_[n];
    const std::int64_t* slots = hess_slot_.data() + 9 * n;
    bool any = false;
    for (int s = 0; s < 9; ++s) any = any || slots[s] >= 0;
    if (!any) continue;
    const double vp = ext[t.p], va = ext[t.a], vb = ext[t.b];
    const double px = t.cx * (va - vp), py = t.cy * (vb - vp);
    const double y2 = t.y * t.y;
    const double tt = (px * px + py * py) / y2;
    const double z = (vp + va + vb) / 3.0;
    const auto pot = law.eval_potential(tt, irrotational ? fixed_state : law.state(z));
    const double wy = t.wa * t.y;
    // D maps (v_p, v_a, v_b) to (psi_x, psi_y)
    const double dx[3] = {-t.cx, t.cx, 0.0};
    const double dy[3] = {-t.cy, 0.0, t.cy};
    const double a = 2.0 * pot.g_t / y2;
    const double b = 4.0 * pot.g_tt / (y2 * y2);
    const double mixed = convex ? 0.0 : 2.0 * pot.g_tz / y2 / 3.0;
    const double zz = (convex && pot.g_zz < 0.0) ? 0.0 : pot.g_zz / 9.0;
    double qd[3];
    for (int r = 0; r < 3; ++r) qd[r] = px * dx[r] + py * dy[r];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        const std::int64_t s = slots[3 * r + c];
        if (s < 0) continue;
        const double h = a * (dx[r] * dx[c] + dy[r] * dy[c]) + b * qd[r] * qd[c] + mixed * (qd[r] + qd[c]) + zz;
        vals[s] += wy * h;
      }
  }
  if (lambda_eps_ > 0.0) {
    const double l2 = lambda_eps_ * lambda_eps_;
    for (std::size_t k = 0; k < size(); ++k) {
      double c2 = indicator_d2(x[k], q_, delta_);
      if (convex && c2 < 0.0) c2 = 0.0;
      vals[diag_slot_[k]] += l2 * dual_[k] * y_[k] * c2;
    }
  }
  return vals;
}

void discrete_energy::local_derivatives(std::vector<double>& ext, std::size_t k, bool with_indicator, double& grad,
                                        double& curv) const {
  const truncated_law& law = *law_;
  const bool irrotational = law.flow().profile().irrotational();
  const bernoulli_state fixed_state = irrotational ? law.state(0.0) : bernoulli_state{};
  grad = 0.0;
  curv = 0.0;
  for (std::size_t m = inc_ptr_[k]; m < inc_ptr_[k + 1]; ++m) {
    const corner_triangle& t = triangles_[inc_[m].triangle];
    const int slot = inc_[m].slot;
    const double vp = ext[t.p], va = ext[t.a], vb = ext[t.b];
    const double px = t.cx * (va - vp), py = t.cy * (vb - vp);
    const double y2 = t.y * t.y;
    const double tt = (px * px + py * py) / y2;
    const double z = (vp + va + vb) / 3.0;
    const auto pot = law.eval_potential(tt, irrotational ? fixed_state : law.state(z));
    const double dx = slot == 0 ? -t.cx : (slot == 1 ? t.cx : 0.0);
    const double dy = slot == 0 ? -t.cy : (slot == 2 ? t.cy : 0.0);
    const double qd = px * dx + py * dy;
    const double wy = t.wa * t.y;
    grad += wy * (2.0 * pot.g_t * qd / y2 + pot.g_z / 3.0);
    curv += wy * (2.0 * pot.g_t * (dx * dx + dy * dy) / y2 + 4.0 * pot.g_tt * qd * qd / (y2 * y2) +
                  std::max(pot.g_zz, 0.0) / 9.0);
  }
  if (with_indicator && lambda_eps_ > 0.0) {
    const double l2 = lambda_eps_ * lambda_eps_;
    grad += l2 * dual_[k] * y_[k] * indicator_d1(ext[k], q_, delta_);
    curv += l2 * dual_[k] * y_[k] * std::max(indicator_d2(ext[k], q_, delta_), 0.0);
  }
}

// ---------------------------------------------------------------- radial operator

std::vector<double> radial_residual(const truncated_law& law, const std::vector<double>& ys,
                                    const std::vector<double>& v, double y_top, double v_top) {
  const std::size_t n = ys.size();
  if (v.size() != n || n == 0) raise(error_kind::domain, "radial profile needs matching heights and values");
  std::vector<double> yy(n + 2), vv(n + 2);
  yy[0] = 0.0;
  vv[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    yy[k + 1] = ys[k];
    vv[k + 1] = checked(v[k]);
  }
  yy[n + 1] = y_top;
  vv[n + 1] = v_top;
  std::vector<double> grad(n + 2, 0.0);
  for (std::size_t e = 0; e + 1 < n + 2; ++e) {
    const double len = yy[e + 1] - yy[e];
    const double ym = 0.5 * (yy[e] + yy[e + 1]);
    const double p = (vv[e + 1] - vv[e]) / len;
    const double tt = p * p / (ym * ym);
    const bool wall = e + 1 == n + 1;
    // corner triangles centred on the lower and on the upper node
    const double z_lo = (2.0 * vv[e] + vv[e + 1]) / 3.0, z_hi = (vv[e] + 2.0 * vv[e + 1]) / 3.0;
    const double w_lo = wall ? 1.0 : 0.5, w_hi = wall ? 0.0 : 0.5;
    for (int side = 0; side < 2; ++side) {
      const double w = side == 0 ? w_lo : w_hi;
      if (w == 0.0) continue;
      const auto pot = law.eval_potential(tt, side == 0 ? z_lo : z_hi);
      const double flux = w * len * ym * pot.g_t * 2.0 * p / (ym * ym) / len;
      const double zt = w * len * ym * pot.g_z;
      grad[e] += -flux + zt * (side == 0 ? 2.0 / 3.0 : 1.0 / 3.0);
      grad[e + 1] += flux + zt * (side == 0 ? 1.0 / 3.0 : 2.0 / 3.0);
    }
  }
  std::vector<double> res(n);
  for (std::size_t k = 0; k < n; ++k) res[k] = -grad[k + 1] / (0.5 * (yy[k + 2] - yy[k]));
  return res;
}

}  // namespace jetfb
