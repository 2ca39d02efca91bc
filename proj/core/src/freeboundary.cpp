#include "jetfb/freeboundary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
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

// Lagrange quadratic through three (y, x) samples: value and slope at y
std::array<double, 2> quadratic_at(const std::array<std::array<double, 2>, 3>& p, double y) {
  double value = 0.0, slope = 0.0;
  for (int a = 0; a < 3; ++a) {
    double num = 1.0, den = 1.0, dnum = 0.0;
    for (int b = 0; b < 3; ++b) {
      if (b == a) continue;
      den *= p[a][0] - p[b][0];
      double term = 1.0;
      for (int c = 0; c < 3; ++c)
        if (c != a && c != b) term *= y - p[c][0];
      dnum += term;
      num *= y - p[b][0];
    }
    value += p[a][1] * num / den;
    slope += p[a][1] * dnum / den;
  }
  return {value, slope};
}

// bilinear interpolation of a nodal field; false unless the four corners are flow nodes
bool bilinear(const jet_solution& sol, const std::vector<double>& f, double x, double y, double& out) {
  const domain_grid& g = sol.grid();
  const double fi = (x - g.x(0)) / g.hx(), fj = y / g.hy() - 0.5;
  const int i = static_cast<int>(std::floor(fi)), j = static_cast<int>(std::floor(fj));
  if (i < 0 || i >= g.nx() || j < 0 || j + 1 >= g.ny()) return false;
  const double a = fi - i, b = fj - j;
  double acc = 0.0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj) {
      if (!g.fluid(i + di, j + dj)) return false;
      const std::size_t n = g.index(i + di, j + dj);
      if (!sol.in_flow(n)) return false;
      acc += (di ? a : 1.0 - a) * (dj ? b : 1.0 - b) * f[n];
    }
  out = acc;
  return true;
}

}  // namespace

std::vector<std::array<double, 2>> free_boundary::polyline() const {
  std::vector<std::array<double, 2>> out;
  // graph from the orifice downwards, then the tail beyond the graph
  for (auto it = graph.rbegin(); it != graph.rend(); ++it) out.push_back({(*it)[1], (*it)[0]});
  const double last_x = out.empty() ? -std::numeric_limits<double>::infinity() : out.back()[0];
  for (const auto& p : tail)
    if (p[0] > last_x) out.push_back(p);
  return out;
}

free_boundary extract_boundary(const domain_grid& g, const std::vector<double>& psi, double level, double y_top) {
  if (psi.size() != g.node_count()) raise(error_kind::domain, "field does not match the grid");
  free_boundary fb;
  fb.level = level;
  const double hx = g.hx();

  for (int j = 0; j < g.ny() && g.y(j) < y_top; ++j) {
    int crossings = 0;
    double first = 0.0, last = 0.0;
    int i_end = 0;
    for (int i = 0; i < g.nx() && g.fluid(i + 1, j); ++i) {
      const double a = psi[g.index(i, j)], b = psi[g.index(i + 1, j)];
      i_end = i + 1;
      if (a < level && level <= b) {
        const double x = g.x(i) + hx * (level - a) / (b - a);
        if (crossings++ == 0) first = x;
        last = x;
      }
    }
    if (crossings == 0 || psi[g.index(i_end, j)] < level) continue;
    if (last - first > 2.0 * hx) {
      fb.graph_ok = false;
      raise(error_kind::property_violation, "free boundary is not a graph in y: row y = " + fmt(g.y(j)) +
                                                " crosses the level between x = " + fmt(first) + " and " + fmt(last));
    }
    fb.graph.push_back({g.y(j), last});
  }

  for (int i = 0; i <= g.nx(); ++i) {
    if (!(g.x(i) > 0.0)) continue;
    double below = 0.0, y_below = 0.0;
    for (int j = 0; j < g.ny() && g.fluid(i, j); ++j) {
      const double p = psi[g.index(i, j)];
      if (p >= level) {
        fb.tail.push_back({g.x(i), y_below + (g.y(j) - y_below) * (level - below) / (p - below)});
        break;
      }
      below = p;
      y_below = g.y(j);
    }
  }

  if (!fb.tail.empty()) {
    const double x0 = fb.tail.front()[0], x1 = fb.tail.back()[0];
    const double cut = x1 - 0.1 * (x1 - x0);
    fb.h_low = std::numeric_limits<double>::infinity();
    for (const auto& p : fb.tail)
      if (p[0] >= cut) fb.h_low = std::min(fb.h_low, p[1]);
  }
  fb.found = !fb.graph.empty();
  if (!fb.found) {
    fb.upsilon_1 = std::numeric_limits<double>::infinity();
    return fb;
  }
  const std::size_t m = fb.graph.size();
  if (m >= 3) {
    const auto v = quadratic_at({fb.graph[m - 3], fb.graph[m - 2], fb.graph[m - 1]}, 1.0);
    fb.upsilon_1 = v[0];
    fb.slope_residual = v[1];
  } else if (m == 2) {
    const auto& p = fb.graph[0];
    const auto& q = fb.graph[1];
    const double s = (q[1] - p[1]) / (q[0] - p[0]);
    fb.upsilon_1 = q[1] + s * (1.0 - q[0]);
    fb.slope_residual = s;
  } else {
    fb.upsilon_1 = fb.graph[0][1];
  }
  if (!g.is_rectangle()) fb.slope_residual -= g.geometry().slope(1.0);

  return fb;
}

free_boundary extract_boundary(const jet_solution& sol) {
  const double q = sol.problem->q();
  const double big_lambda = sol.big_lambda;
  // rows inside the smoothing layer under the top line see the ramp rather than the jet
  const double y_top = big_lambda > 0.0 ? 1.0 - sol.delta / big_lambda : 1.0;
  return extract_boundary(sol.grid(), sol.psi, q - 0.5 * sol.delta, y_top);
}

fb_residual_report fb_condition_residual(const jet_solution& sol, const free_boundary& fb) {
  fb_residual_report rep;
  const auto line = fb.polyline();
  if (line.size() < 2) return rep;
  const domain_grid& g = sol.grid();
  const truncated_law& law = sol.problem->law();
  const double q = sol.problem->q();
  const double big_lambda = sol.big_lambda;
  const double lam2 = law.phi(big_lambda * big_lambda, q);
  // far enough inside that no corner of the interpolation cell differences across the boundary
  const double offset = 2.5 * std::max(g.hx(), g.hy());

  std::vector<double> arc(line.size(), 0.0);
  for (std::size_t k = 1; k < line.size(); ++k)
    arc[k] = arc[k - 1] + std::hypot(line[k][0] - line[k - 1][0], line[k][1] - line[k - 1][1]);
  const double total = arc.back();
  if (!(total > 0.0)) return rep;

  constexpr int kSamples = 50;
  double sum_rel = 0.0, sum_phi = 0.0;
  for (int s = 0; s < kSamples; ++s) {
    const double target = total * (0.05 + 0.9 * s / (kSamples - 1));
    std::size_t k = std::upper_bound(arc.begin(), arc.end(), target) - arc.begin();
    k = std::clamp<std::size_t>(k, 1, line.size() - 1);
    const double len = arc[k] - arc[k - 1];
    if (!(len > 0.0)) continue;
    const double f = (target - arc[k - 1]) / len;
    const double tx = (line[k][0] - line[k - 1][0]) / len, ty = (line[k][1] - line[k - 1][1]) / len;
    const double px = line[k - 1][0] + f * (line[k][0] - line[k - 1][0]) + offset * ty;
    const double py = line[k - 1][1] + f * (line[k][1] - line[k - 1][1]) - offset * tx;
    double gx = 0.0, gy = 0.0;
    if (!(py > 0.0) || !bilinear(sol, sol.psi_x, px, py, gx) || !bilinear(sol, sol.psi_y, px, py, gy)) continue;
    const double t = (gx * gx + gy * gy) / (py * py);
    const double d_rel = std::sqrt(t) / big_lambda - 1.0;
    const double d_phi = (law.phi(t, q) - lam2) / lam2;
    rep.max_rel = std::max(rep.max_rel, std::abs(d_rel));
    rep.max_phi = std::max(rep.max_phi, std::abs(d_phi));
    sum_rel += std::abs(d_rel);
    sum_phi += std::abs(d_phi);
    if (std::abs(d_rel) > 1e-12 && std::abs(d_phi) > 1e-12 && (d_rel > 0.0) != (d_phi > 0.0)) rep.agree = false;
    ++rep.samples;
  }
  if (rep.samples > 0) {
    rep.mean_rel = sum_rel / rep.samples;
    rep.mean_phi = sum_phi / rep.samples;
  }
  return rep;
}

fit_result search_lambda(const std::function<fit_step(double)>& evaluate, double lo, double hi, double tol,
                         double lambda_tol, int max_expansions, double jump, std::size_t* chosen) {
  if (!(lo > 0.0 && lo < hi)) raise(error_kind::parameter, "fit bracket must satisfy 0 < lo < hi");
  fit_result res;
  auto probe = [&](double big_lambda) -> const fit_step& {
    res.history.push_back(evaluate(big_lambda));
    res.history.back().big_lambda = big_lambda;
    return res.history.back();
  };
  auto positive = [](const fit_step& s) { return !s.found || s.upsilon_1 > 0.0; };
  auto pick = [&](std::size_t k) {
    res.big_lambda = res.history[k].big_lambda;
    res.final_lo = lo;
    res.final_hi = hi;
    if (chosen) *chosen = k;
  };

  // bracket: positive side at lo, a boundary with negative Upsilon(1) at hi
  bool lo_ok = positive(probe(lo));
  for (int e = 0; !lo_ok && e < max_expansions; ++e) lo_ok = positive(probe(lo *= 0.5));
  bool hi_ok = !positive(probe(hi));
  for (int e = 0; !hi_ok && e < max_expansions; ++e) hi_ok = !positive(probe(hi *= 2.0));
  if (!lo_ok || !hi_ok)
    raise(error_kind::fit_bracket, "no sign change of Upsilon(1) on [" + fmt(lo) + ", " + fmt(hi) + "] after " +
                                       std::to_string(max_expansions) + " expansions");
  res.lo = lo;
  res.hi = hi;

  bool done = false;
  for (std::size_t k = 0; k < res.history.size() && !done; ++k) {
    const auto& s = res.history[k];
    if (s.found && std::abs(s.upsilon_1) <= tol) {
      pick(k);
      done = true;
    }
  }
  while (!done) {
    const double mid = 0.5 * (lo + hi);
    const fit_step& s = probe(mid);
    ++res.bisections;
    if (s.found && std::abs(s.upsilon_1) <= tol) {
      pick(res.history.size() - 1);
      break;
    }
    if (positive(s)) lo = mid;
    else hi = mid;
    if (hi - lo < lambda_tol) {
      res.ambiguous = true;
      res.warnings.push_back("fit ambiguity: Upsilon(1) changes sign across [" + fmt(lo) + ", " + fmt(hi) +
                             "] without reaching |Upsilon(1)| <= " + fmt(tol));
      pick(res.history.size() - 1);
      break;
    }
  }

  // continuity and monotonicity over the recorded sweep
  std::vector<fit_step> sorted;
  for (const auto& s : res.history)
    if (s.found) sorted.push_back(s);
  std::sort(sorted.begin(), sorted.end(), [](const fit_step& a, const fit_step& b) { return a.big_lambda < b.big_lambda; });
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    const double dl = sorted[k].big_lambda / sorted[k - 1].big_lambda - 1.0;
    const double du = sorted[k].upsilon_1 - sorted[k - 1].upsilon_1;
    if (dl <= 0.01 && std::abs(du) > jump)
      res.warnings.push_back("Upsilon(1) jumps by " + fmt(du) + " between Lambda = " + fmt(sorted[k - 1].big_lambda) +
                             " and " + fmt(sorted[k].big_lambda));
    if (du > tol)
      res.warnings.push_back("Upsilon(1) increases between Lambda = " + fmt(sorted[k - 1].big_lambda) + " and " +
                             fmt(sorted[k].big_lambda));
  }
  return res;
}

fit_result fit_lambda(const jet_problem& problem, const solver_config& cfg, const fit_options& opt) {
  const double q = problem.q();
  const domain_grid& g = problem.grid();
  if (g.is_rectangle()) raise(error_kind::domain, "the rectangle domain has no free boundary to fit");
  const double h = std::max(g.hx(), g.hy());
  const double lo = opt.lo > 0.0 ? opt.lo : q / 8.0;
  const double hi = opt.hi > 0.0 ? opt.hi : 8.0 * q;
  const double tol = opt.tol > 0.0 ? opt.tol : 2.0 * h;
  const double lambda_tol = opt.lambda_tol > 0.0 ? opt.lambda_tol : 1e-6 * q;

  struct probe {
    jet_solution sol;
    free_boundary fb;
  };
  std::vector<probe> probes;
  auto evaluate = [&](double big_lambda) {
    const std::vector<double>* warm = nullptr;
    if (opt.warm_start && !probes.empty()) {
      const auto near = std::min_element(probes.begin(), probes.end(), [&](const probe& a, const probe& b) {
        return std::abs(std::log(a.sol.big_lambda / big_lambda)) < std::abs(std::log(b.sol.big_lambda / big_lambda));
      });
      warm = &near->sol.psi;
    }
    jet_solution sol = solve_fixed_lambda(problem, big_lambda, cfg, warm);
    free_boundary fb = extract_boundary(sol);
    const fit_step step{big_lambda, fb.upsilon_1, fb.found, sol.iterations};
    if (cfg.verbose)
      std::fprintf(stderr, "fit: Lambda %.9g Upsilon(1) %.6g found %d iterations %d\n", big_lambda, fb.upsilon_1,
                   fb.found ? 1 : 0, sol.iterations);
    probes.push_back({std::move(sol), std::move(fb)});
    return step;
  };
  std::size_t chosen = 0;
  fit_result res = search_lambda(evaluate, lo, hi, tol, lambda_tol, opt.max_expansions, 10.0 * h, &chosen);
  res.solution = std::move(probes[chosen].sol);
  res.boundary = std::move(probes[chosen].fb);
  res.solution.free_boundary = res.boundary.graph;
  return res;
}

}  // namespace jetfb
