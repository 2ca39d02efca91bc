#pragma once

#include <cstdint>
#include <vector>

#include "jetfb/geometry.hpp"

namespace jetfb {

class truncated_law;

// Smoothed indicator: 1 for psi <= q - delta, 0 for psi >= q, C^1 cubic in between.
double indicator(double psi, double q, double delta);
double indicator_d1(double psi, double q, double delta);
double indicator_d2(double psi, double q, double delta);

// One corner triangle of a grid cell: the centre node p and the ends a
// (horizontal leg) and b (vertical leg). Indices address the extended value
// vector [unknowns | Dirichlet nodes | 0 | Q].
struct corner_triangle {
  std::uint32_t p = 0, a = 0, b = 0;
  double cx = 0;  // psi_x = cx (v_a - v_p)
  double cy = 0;  // psi_y = cy (v_b - v_p)
  double wa = 0;  // quadrature weight times area
  double y = 0;   // height of the leg midpoint, used for the weight y and for 1/y
};

enum class hessian_kind { exact, convexified };

// Discrete functional sum_T y G_eps(|grad psi / y|^2, psi) + lambda_eps^2 sum_nodes y chi_delta(psi)
// over corner triangles of the structured grid. Each grid cell carries one
// triangle per fluid corner, weighted so the triangles of a cell integrate its
// fluid area; the indicator term uses lumped nodal quadrature.
class discrete_energy {
 public:
  discrete_energy(const domain_grid& grid, const truncated_law& law);

  const domain_grid& grid() const { return *grid_; }
  const truncated_law& law() const { return *law_; }
  std::size_t size() const { return unknown_i_.size(); }
  int unknown_i(std::size_t k) const { return unknown_i_[k]; }
  int unknown_j(std::size_t k) const { return unknown_j_[k]; }
  // index of the unknown at node (i, j) or -1
  long unknown_at(int i, int j) const { return unknown_of_node_[grid_->index(i, j)]; }
  const std::vector<double>& dual_area() const { return dual_; }
  const std::vector<corner_triangle>& triangles() const { return triangles_; }

  void set_boundary(const boundary_values& bv);
  void set_indicator(double lambda_eps, double delta);
  double lambda_eps() const { return lambda_eps_; }
  double delta() const { return delta_; }
  void set_workers(int workers) { workers_ = workers < 1 ? 1 : workers; }
  int workers() const { return workers_; }

  // grid field (one value per node, Q on solid nodes) <-> unknown vector
  std::vector<double> gather(const std::vector<double>& field) const;
  std::vector<double> scatter(const std::vector<double>& x) const;

  double value(const std::vector<double>& x) const;
  double value_field(const std::vector<double>& field) const { return value(gather(field)); }
  // returns the energy and fills grad
  double gradient(const std::vector<double>& x, std::vector<double>& grad) const;
  // div(g grad psi / y) - y dG/dz at unknowns with psi < Q - delta; zero elsewhere
  std::vector<double> el_residual(const std::vector<double>& x) const;
  std::vector<double> el_residual_field(const std::vector<double>& field) const { return el_residual(gather(field)); }

  // Lower triangle of the Hessian in compressed-column form over the unknowns.
  const std::vector<int>& hessian_col_ptr() const { return col_ptr_; }
  const std::vector<int>& hessian_row_index() const { return row_index_; }
  std::vector<double> hessian_values(const std::vector<double>& x, hessian_kind kind) const;

  // Energy gradient component at unknown k and its diagonal curvature with
  // every other value frozen; used by the Gauss-Seidel sweeps.
  void local_derivatives(std::vector<double>& ext, std::size_t k, bool with_indicator, double& grad,
                         double& curv) const;
  std::vector<double> extended(const std::vector<double>& x) const;

 private:
  struct incidence {
    std::uint32_t triangle;
    std::uint8_t slot;
  };
  void build();
  void fill_extended(const std::vector<double>& x, std::vector<double>& ext) const;
  double triangle_terms(const std::vector<double>& ext, std::size_t begin, std::size_t end,
                        std::vector<double>* local, bool with_z) const;

  const domain_grid* grid_;
  const truncated_law* law_;
  double q_;
  double lambda_eps_ = 0, delta_ = 0;
  int workers_ = 1;

  std::vector<int> unknown_i_, unknown_j_;
  std::vector<long> unknown_of_node_;
  std::vector<long> fixed_of_node_;
  std::vector<double> fixed_values_;
  std::vector<double> dual_, y_;
  std::vector<corner_triangle> triangles_;
  std::vector<std::size_t> inc_ptr_;
  std::vector<incidence> inc_;
  std::vector<int> col_ptr_, row_index_;
  std::vector<std::int64_t> hess_slot_;  // nine per triangle, -1 when a node is fixed
  std::vector<std::size_t> diag_slot_;
};

// Discrete radial operator (g_eps psi'/y)' - y dG_eps/dz for an x-independent
// profile: nodes ys with values v, psi = 0 on the axis and v_top at y_top.
// It is the restriction of the planar scheme to fields constant in x.
std::vector<double> radial_residual(const truncated_law& law, const std::vector<double>& ys,
                                    const std::vector<double>& v, double y_top, double v_top);

// Worker count from JETFB_WORKERS, or the fallback when unset or invalid.
int workers_from_env(int fallback);

}  // namespace jetfb
