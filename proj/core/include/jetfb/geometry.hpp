#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace jetfb {

class upstream_flow;
class truncated_law;

// Upper solid boundary x = N(y) for y in [1, hbar), with N(1) = 0 and
// N -> -infinity as y -> hbar. The rectangle kind has no nozzle: the domain
// is the strip 0 < y < hbar and no free boundary is expected.
class nozzle {
 public:
  enum class kind { log, table, rectangle };

  // N(y) = a ln((hbar - y) / (hbar - 1))
  static nozzle logarithmic(double hbar, double a = 1.0);
  // monotone cubic through (y_k, N_k) starting at (1, 0); a logarithmic tail
  // matching the last slope continues the samples up to hbar
  static nozzle table(double hbar, std::vector<double> ys, std::vector<double> xs);
  static nozzle rectangle(double hbar);

  kind type() const { return kind_; }
  double hbar() const { return hbar_; }
  double x_of(double y) const;
  double slope(double y) const;

  // height b with N(b) = -mu
  double depth_height(double mu) const;
  // whether (x, y) with y > 0 lies inside the untruncated fluid domain
  bool fluid(double x, double y) const;
  // height of the upper boundary crossed between (x, y0) and (x, y1), y0 < y1
  double vertical_crossing(double x, double y0, double y1) const;
  // abscissa of the upper boundary crossed along row y between x0 and x1
  double horizontal_crossing(double y, double x0, double x1) const;

 private:
  nozzle(kind k, double hbar) : kind_(k), hbar_(hbar) {}

  kind kind_;
  double hbar_;
  double a_ = 1.0;
  std::function<double(double)> n_, dn_;
};

enum class node_kind : std::uint8_t { solid, interior, inlet, outlet };

enum class direction : int { east = 0, west = 1, north = 2, south = 3 };

struct domain_options {
  double mu = 4.0;
  double r = 8.0;
  double h = 1.0 / 64.0;
  double s_exp = 1.75;
  // inlet layer width; 0 selects it automatically
  double k_mu = 0.0;
};

// Structured grid on the truncated domain. Columns x_i = -mu + i hx for
// i = 0..nx, rows y_j = (j + 1/2) hy for j = 0..ny-1, plus a row of axis
// nodes at y = 0 carrying psi = 0. Column 0 is the inlet and column nx the
// outlet. Links from a fluid node towards a solid neighbour end on the wall
// at the crossing distance, where psi = Q.
class domain_grid {
 public:
  domain_grid(const nozzle& nz, const domain_options& opt);

  const nozzle& geometry() const { return nozzle_; }
  const domain_options& options() const { return opt_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double x(int i) const { return -opt_.mu + i * hx_; }
  double y(int j) const { return (j + 0.5) * hy_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * (nx_ + 1) + i; }
  std::size_t node_count() const { return static_cast<std::size_t>(nx_ + 1) * ny_; }

  node_kind kind(int i, int j) const { return kinds_[index(i, j)]; }
  bool fluid(int i, int j) const;
  // distance from node (i, j) to its neighbour or to the wall in direction d;
  // south links of row 0 reach the axis at hy / 2
  double link(int i, int j, direction d) const { return links_[index(i, j)][static_cast<int>(d)]; }
  // whether the link ends on the wall rather than on a grid or axis node
  bool link_to_wall(int i, int j, direction d) const;

  double b_mu() const { return b_mu_; }
  double b_mu_prime() const { return b_mu_ - k_mu_; }
  double k_mu() const { return k_mu_; }
  double s_exp() const { return opt_.s_exp; }
  // N at the highest grid row below hbar; diagnostic for the depth of the nozzle
  double deepest_wall_x() const { return deepest_wall_x_; }
  bool is_rectangle() const { return nozzle_.type() == nozzle::kind::rectangle; }
  // top of the fluid region along column i
  double column_top(int i) const;

  // number of k_mu halvings performed by select_inlet_layer
  int layer_halvings() const { return halvings_; }
  // Halve k_mu from (b_mu - 1)/8 until the inlet profile is a discrete
  // subsolution; raises a resolution error once hy > k_mu / 4.
  void select_inlet_layer(const truncated_law& law);
  void set_inlet_layer(double k_mu);

 private:
  void classify();

  nozzle nozzle_;
  domain_options opt_;
  int nx_ = 0, ny_ = 0;
  double hx_ = 0, hy_ = 0;
  double b_mu_ = 0, k_mu_ = 0;
  double deepest_wall_x_ = 0;
  int halvings_ = 0;
  std::vector<node_kind> kinds_;
  std::vector<std::array<double, 4>> links_;
};

double outlet_height(double lambda, double q);
double outlet_profile(double y, double lambda, double q);

// Dirichlet data psi# on the inlet and outlet columns for a given Lambda.
struct boundary_values {
  double lambda = 0;
  double h_star = 1;
  std::vector<double> inlet;   // per row, inlet column
  std::vector<double> outlet;  // per row, outlet column
};

boundary_values boundary_data(const domain_grid& grid, const upstream_flow& flow, double lambda);

// psi# on the inlet column as a function of height
double inlet_profile(const domain_grid& grid, double q, double y);

// Residual of the discrete radial operator on a 1-D profile sampled at the
// rows below the column top; positive entries mean subsolution rows.
std::vector<double> column_profile_residual(const domain_grid& grid, int column, const truncated_law& law,
                                            const std::vector<double>& profile);

}  // namespace jetfb
