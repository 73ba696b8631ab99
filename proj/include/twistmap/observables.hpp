#pragma once

#include <array>
#include <utility>
#include <vector>

#include "twistmap/mapping.hpp"

namespace twistmap {

// <rho^2> of the mapped state: b^2 (2n+|l|+1)/(m omega0).  The closed form
// requires a single-component Landau reference; the quadrature path works
// for any mapped state.
double mean_rho2(const MappedState& state, double t2);
double mean_rho2_quadrature(const MappedState& state, double t2, int order = 400);

// Reference-frame energy of the mapped state,
//   omega0 (2n+|l|+1)/2 [b^2 + (b'/omega0)^2 + 1/b^2] + l omega0,
// which is the instantaneous <H> whenever the target is the uniform Landau
// field.  The quadrature path evaluates <i d/dt> directly for any target.
double mean_energy(const MappedState& state, double t2);
double mean_energy_quadrature(const MappedState& state, double t2, int order = 400);

// Matrix element <n'| i d/dt2 |n> between mapped Landau levels sharing l,
// expressed through reference-basis brackets (computed by quadrature):
//   (b'/b) <n'|sym(p.r)|n> + (1/b^2)[eps_perp - l w0] d_{n'n} + l w0 d_{n'n}
//   + (m/2)[w0^2 b^2 + b'^2 - w0^2/b^2] <n'|r^2|n>.
// sym(p.r) is the Hermitized product (p.r + r.p)/2; the literal p-then-r
// ordering leaves a spurious -i b'/b on the diagonal.
Complex hamiltonian_matrix_element(int n_prime, int n, int l,
                                   const ErmakovTrajectory& trajectory, double t2);

// mean L_z by quadrature and the winding number of arg(psi) on the outermost
// adequately-sampled circle.
struct OamCharge {
  double mean_lz = 0.0;
  long charge = 0;
};
OamCharge oam_and_charge(const PolarSamples& samples);

// Ermakov-Lewis invariant <I> = <I_x> + <I_y> with
//   I_x = (1/2b^2) [x^2 + (b^2 p_x - b b' x)^2]
// in the normalization omega0 -> 1, m -> 1 (general units rescaled
// internally).  The emittance operator is e_{x,y} = 2 I_{x,y}.
double ermakov_lewis(const MappedState& state, double t2, int order = 400);
double ermakov_lewis(const RadialSamples& samples, double b, double bdot, double mass,
                     double omega0);
// <I^2>, for the variance-level conservation check (uniform samples).
double ermakov_lewis_squared(const RadialSamples& samples, double b, double bdot, double mass,
                             double omega0);

// (beta, alpha) = (b^2, -b b')
std::pair<double, double> twiss(const ErmakovTrajectory& trajectory, double t2);

// (Q proxy, radiated-power scaling) = (b^2, (d^3(b^2)/dt^3)^2)
std::pair<double, double> radiation_diagnostics(const ErmakovTrajectory& trajectory, double t2);

// ((1/T) int b^2 dt over one cyclotron period 2 pi/omega0 from window_begin,
//  sqrt(max b * min b) over the window).  The window must span >= one period
// and lie inside a constant-field lens segment.
std::pair<double, double> lens_averages(const ErmakovTrajectory& trajectory,
                                        double window_begin, double window_end);

// <p2> = <p1>/b + (m/w2) b' <r1>, with the reference brackets carrying the
// sector phases of the map (so the identity holds for superpositions too).
std::array<double, 2> mean_momentum(const MappedState& state, double t2);

// ---------------------------------------------------------------------------

struct ObservableSeries {
  std::vector<double> times;
  std::vector<double> mean_rho2;
  std::vector<double> energy;
  std::vector<double> first_integral_value;
  std::vector<double> ermakov_lewis;
  std::vector<double> emittance_x;
  std::vector<double> emittance_y;
  std::vector<double> twiss_beta;
  std::vector<double> twiss_alpha;
  std::vector<double> quadrupole;
  std::vector<double> radiation_scaling;
};

ObservableSeries compute_series(const MappedState& state, const std::vector<double>& times);

}  // namespace twistmap
