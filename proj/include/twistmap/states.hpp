#pragma once

#include <vector>

#include "twistmap/common.hpp"

namespace twistmap {

// Generalized Laguerre polynomial L_n^alpha(x) by the upward three-term recurrence.
double laguerre(int n, double alpha, double x);

// Stationary state of a charged particle in a uniform axial field
// (symmetric gauge), indexed by the radial number n and the orbital angular
// momentum l:
//
//   psi(rho, phi, t) = N (rho/rho_H)^|l| L_n^|l|(2 rho^2/rho_H^2)
//                        exp(-rho^2/rho_H^2 + i l phi - i eps_perp t)
//
// with rho_H = sqrt(2/(m omega0)) and eps_perp = omega0 (2n + |l| + l + 1).
// The normalization N makes 2 pi int |psi|^2 rho drho = 1; it is computed by
// quadrature (the orthogonality closed form is only a cross-check in tests).
struct LandauState {
  int n = 0;
  int l = 0;
  double mass = 1.0;
  double omega0 = 1.0;
  double rho_h = 0.0;
  double norm = 0.0;      // N
  double eps_perp = 0.0;

  // radial profile R(rho) with the normalization applied; the full state is
  // R(rho) exp(i l phi - i eps_perp t)
  double radial(double rho) const;
  double radial_derivative(double rho) const;
  Complex evaluate(double rho, double phi, double t) const;
};

LandauState make_landau_state(int n, int l, double mass, double omega0);

// N such that 2 pi int |psi|^2 rho drho = 1 (adaptive quadrature).
double normalization_constant(int n, int l, double rho_h);

// <rho^2> of the stationary state: (2n + |l| + 1)/(m omega0)
double mean_rho2_stationary(const LandauState& state);

// Outer radius beyond which the state carries less than ~1e-12 of its
// probability, scaled by the largest envelope factor the state will see.
double support_radius(const LandauState& state, double b_max);

// ---------------------------------------------------------------------------
// Superposition of Landau states, organised by angular-momentum sector; the
// reference input of the Ermakov mapping.
// ---------------------------------------------------------------------------

class ReferenceState {
 public:
  ReferenceState() = default;
  ReferenceState(const LandauState& single) { add(1.0, single); }  // NOLINT(google-explicit-constructor)

  void add(Complex coeff, const LandauState& state);

  // radial part of sector l at time t (includes the e^{-i eps t} evolution
  // and coefficients; the e^{i l phi} factor is left to the caller)
  Complex sector_value(int l, double rho, double t) const;
  Complex sector_radial_derivative(int l, double rho, double t) const;

  std::vector<int> sectors() const;
  const std::vector<std::pair<Complex, LandauState>>& components() const { return comps_; }

  double mass() const;
  double omega0() const;
  bool single_sector() const;
  int max_abs_l() const;
  double support_radius(double b_max) const;

  Complex evaluate(double rho, double phi, double t) const;

 private:
  std::vector<std::pair<Complex, LandauState>> comps_;
};

}  // namespace twistmap
