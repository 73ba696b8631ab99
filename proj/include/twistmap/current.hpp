#pragma once

#include "twistmap/mapping.hpp"

namespace twistmap {

// Probability current of a twisted state on a polar grid, in polar
// components.  Units: probability / (area * time).
struct CurrentField {
  std::vector<double> rho;
  std::vector<double> wrho;
  int n_phi = 0;
  std::vector<double> j_rho;  // [i_rho * n_phi + k_phi]
  std::vector<double> j_phi;
  bool under_resolved = false;

  double phi(int k) const { return 2.0 * kPi * k / n_phi; }
  double dphi() const { return 2.0 * kPi / n_phi; }
};

// j = (1/m) [ Re(psi* sqrt(w2) p psi) - e A2 |psi|^2 ] with the symmetric
// gauge A2 = (B(t2)/(2 sqrt(w2))) (-y, x) and e = -1.  Gradients: 4th-order
// central differences in rho, spectral in phi.  Samples must be on a uniform
// half-offset radial grid.
CurrentField current_direct(const PolarSamples& samples, const FieldProfile& profile,
                            double t2);

// The same current assembled from the reference frame:
//   j2 = (sqrt(w2)/sqrt(w1)) (1/b^2) { j1/b
//        + [ (1/b - (B2/B1)(w1/w2) b) eA1/m + (b/m) G ] |psi1|^2 },
// with G = m (sqrt(w1)/w2) (b'/b) r1.  Evaluated on the same grid layout as
// current_direct for pointwise comparison.
CurrentField current_transformed(const ReferenceState& reference,
                                 const ErmakovTrajectory& trajectory, double t2,
                                 const std::vector<double>& rho, const std::vector<double>& wrho,
                                 int n_phi);

// Gauge-field potential G(r1) of the mapping at time t2.
std::array<double, 2> gauge_potential(const ErmakovTrajectory& trajectory, double t2,
                                      const std::array<double, 2>& r1);

// || d|psi|^2/dt + div j ||_2 / || d|psi|^2/dt ||_2 over the grid, with a
// central-difference time derivative of the sampled density.
double continuity_residual(const MappedState& state, const FieldProfile& profile,
                           const RadialGrid& grid, int n_phi, double t2, double dt = 1e-4);

void write_current_csv(const CurrentField& field, const std::string& path);

}  // namespace twistmap
