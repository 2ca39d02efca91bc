#pragma once

#include <memory>
#include <vector>

#include "jetfb/flow_state.hpp"
#include "jetfb/solver.hpp"

namespace jetfb {

// psi_bar(y) = rho_bar * integral_0^y s u(s) ds by adaptive quadrature.
std::vector<double> upstream_field(const upstream_flow& flow, const std::vector<double>& ys);

// Far-downstream jet for a given free-boundary momentum Lambda, obtained by
// following each upstream streamline y to its downstream height theta(y).
class downstream_state {
 public:
  // samples: number of upstream heights on [0, hbar] carrying theta
  downstream_state(const upstream_flow& flow, double big_lambda, int samples = 2001);

  double big_lambda() const { return big_lambda_; }
  double rho_d() const { return rho_d_; }
  double h_d() const { return h_d_; }
  double pressure() const { return p_d_; }

  // theta at an upstream height y in [0, hbar]
  double theta(double y) const;
  // upstream height whose streamline ends at downstream height y in [0, H_d]
  double source_height(double y) const;
  // downstream axial speed at height y in [0, H_d]
  double u(double y) const;
  // rho_d integral_0^y s u_d(s) ds, equal to Q above H_d
  double psi(double y) const;

  const std::vector<double>& ys() const { return ys_; }
  const std::vector<double>& thetas() const { return thetas_; }
  const std::vector<double>& speeds() const { return speeds_; }
  // max |u_d(theta)^2 / 2 + h(rho_d) - B(psi_bar(y))| / B over the samples
  double bernoulli_defect() const { return bernoulli_defect_; }
  // |rho_d integral_0^H_d y u_d dy - Q| / Q by quadrature of the resampled speed
  double mass_defect() const { return mass_defect_; }

 private:
  const upstream_flow* flow_;
  double big_lambda_ = 0, rho_d_ = 0, h_d_ = 0, p_d_ = 0;
  std::vector<double> ys_, thetas_, speeds_;
  double bernoulli_defect_ = 0, mass_defect_ = 0;
  struct splines;
  std::shared_ptr<const splines> splines_;
};

struct monotonicity_row {
  double big_lambda = 0;
  double rho_d = 0;
  double h_d = 0;
  double p_d = 0;
};

// H_d, rho_d and p_d over increasing Lambda; raises property_violation unless
// all three decrease strictly.
std::vector<monotonicity_row> lambda_monotonicity_probe(const upstream_flow& flow, std::vector<double> lambdas);

struct farfield_report {
  double x_upstream = 0, x_downstream = 0;
  double upstream_dev = 0;    // sup |psi - psi_bar| / Q on the upstream slice
  double downstream_dev = 0;  // sup |psi - psi_under| / Q on the downstream slice
  double h_d = 0;
};

// Compares the columns x = -mu + 5h and R - 5h of a solution with the far fields.
farfield_report farfield_compare(const jet_solution& sol, const downstream_state* ds);

}  // namespace jetfb
