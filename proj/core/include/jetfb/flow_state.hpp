#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace jetfb {

// Polytropic gas with unit entropy constant: p = rho^gamma / gamma.
class gas_law {
 public:
  explicit gas_law(double gamma);

  double gamma() const { return gamma_; }
  double enthalpy(double rho) const;
  double pressure(double rho) const;
  double sound_speed(double rho) const;

  // Squared momentum 2 rho^2 (s - h(rho)) at Bernoulli constant s, and its rho-derivative.
  double momentum_sq(double rho, double s) const;
  double momentum_sq_drho(double rho, double s) const;

  double critical_density(double s) const;
  double max_density(double s) const;
  double critical_momentum_sq(double s) const;
  double critical_momentum_sq_ds(double s) const;

  // Subsonic root rho in (rho_c(s), rho_m(s)] of momentum_sq(rho, s) = t.
  double density_from_momentum(double t, double s) const;

 private:
  double gamma_;
};

// Upstream axial speed profile on [0, Hbar], extended to the real line by a
// constant below the axis and a monotone quadratic blend above Hbar.
class upstream_profile {
 public:
  using fn = std::function<double(double)>;

  static upstream_profile constant(double hbar, double u0);
  // u(y) = a + b y^n with n == 2 or n >= 4
  static upstream_profile power(double hbar, double a, double b, double n);
  // monotone cubic (pchip) through samples (y_k, u_k); y_0 must be 0 and y_last = hbar
  static upstream_profile table(std::vector<double> ys, std::vector<double> us);

  double hbar() const { return hbar_; }
  bool irrotational() const { return irrotational_; }

  double value(double y) const;
  double d1(double y) const;
  double d2(double y) const;
  // (1/y) (u'/y)'
  double curvature(double y) const;

  double min_value() const { return u_min_; }
  double max_value() const { return u_max_; }
  // sup |u''| + sup |(1/y)(u'/y)'| over [0, hbar]
  double kappa0() const { return kappa0_; }
  // length of the quadratic blend above hbar
  double blend_length() const { return hbar_; }

 private:
  upstream_profile(double hbar, fn u, fn du, fn d2u, fn curv, bool irrotational);
  void validate_and_scan();

  double hbar_;
  fn u_, du_, d2u_, curv_;
  bool irrotational_;
  double u_min_ = 0, u_max_ = 0, kappa0_ = 0;
};

struct bernoulli_state {
  double b = 0;       // B(z)
  double db = 0;      // B'(z)
  double d2b = 0;     // B''(z)
  double rho_m = 0;   // stagnation density at B
  double rho_c = 0;   // sonic density at B
  double tc = 0;      // critical squared momentum at B
  double dtc_db = 0;  // d tc / dB
};

// Upstream state: mean density, streamline heights and the Bernoulli function.
class upstream_flow {
 public:
  upstream_flow(gas_law gas, upstream_profile profile, double q);

  const gas_law& gas() const { return gas_; }
  const upstream_profile& profile() const { return profile_; }
  double q() const { return q_; }
  double hbar() const { return profile_.hbar(); }
  double rho_bar() const { return rho_bar_; }

  // integral_0^y s u(s) ds for y >= 0
  double flux_integral(double y) const;
  double psi_bar(double y) const { return rho_bar_ * flux_integral(y); }

  // Height of the upstream streamline carrying psi; psi must lie in [0, Q].
  double streamline_height(double psi) const;
  // Same on the extended profile; psi <= 0 maps to 0.
  double streamline_height_ext(double psi) const;

  double bernoulli(double z) const;
  double bernoulli_d1(double z) const;
  double bernoulli_d2(double z) const;
  double bernoulli_at_height(double y) const;
  bernoulli_state state(double z) const;

  double b_lower() const { return b_lower_; }
  double b_upper() const { return b_upper_; }
  double q_tilde() const { return q_tilde_; }
  double kappa0() const { return profile_.kappa0(); }
  // g_* = 1/rho_m(B^*) and g^* = 1/rho_c(B_*)
  double g_lower() const;
  double g_upper() const;

 private:
  bernoulli_state make_state(double b, double db, double d2b) const;

  gas_law gas_;
  upstream_profile profile_;
  double q_;
  double rho_bar_ = 0;
  double b_lower_ = 0, b_upper_ = 0, q_tilde_ = 0;
  std::vector<double> panel_y_;
  std::vector<double> panel_f_;
  bernoulli_state constant_state_{};
};

// C^2 cutoff: 1 for s <= -1, 0 for s >= -1/2, quintic blend in between.
double cutoff(double s);
double cutoff_d1(double s);
double cutoff_d2(double s);

// Truncated inverse density g_eps and the potential G_eps built from it.
class truncated_law {
 public:
  struct density {
    double g = 0;
    double g_t = 0;
    double g_z = 0;
  };
  struct potential {
    double g = 0;     // G
    double g_t = 0;   // dG/dt = g_eps / 2
    double g_z = 0;   // dG/dz
    double g_tt = 0;
    double g_tz = 0;
    double g_zz = 0;  // exact below the truncation band, frozen inside it
  };

  truncated_law(const upstream_flow& flow, double eps);

  const upstream_flow& flow() const { return *flow_; }
  double eps() const { return eps_; }
  double g_star() const { return g_star_; }
  double g_low() const { return g_low_; }

  bernoulli_state state(double z) const;

  // Untruncated g = 1/rho for t < tc(B(z)).
  density exact(double t, double z) const;
  density exact(double t, const bernoulli_state& s) const;
  density eval(double t, double z) const;
  density eval(double t, const bernoulli_state& s) const;
  potential eval_potential(double t, double z) const;
  potential eval_potential(double t, const bernoulli_state& s) const;
  double phi(double t, double z) const;
  double phi_t(double t, double z) const;

  // sqrt(Phi_eps(Lambda^2, Q)). Without allow_truncated a free-boundary
  // momentum at or above the sonic value is rejected.
  double lambda(double big_lambda, bool allow_truncated = false) const;

 private:
  struct band {
    double rho1 = 0;    // density at the lower band edge
    double rho_up = 0;  // density at the upper integration limit
    double base = 0;    // closed half-integral of g up to the band
    double g_int = 0;   // half-integral of g_eps across the band
    double gz_int = 0;  // half-integral of dg_eps/dz across the band
  };
  double closed_half_integral(double rho, const bernoulli_state& s) const;
  density exact_at_density(double rho, const bernoulli_state& s) const;
  // cutoff blend of the exact values with g_star inside the band
  density blend(double t, const density& ex, const bernoulli_state& s) const;
  band band_values(const bernoulli_state& s, double upper) const;

  const upstream_flow* flow_;
  double eps_;
  double g_star_;
  double g_low_;
  double rho_m_q_pow_;
  band cached_band_{};
  bool have_cached_band_ = false;
};

}  // namespace jetfb
