#pragma once

#include <functional>
#include <vector>

#include "twistmap/common.hpp"

namespace twistmap {

// Half-offset radial grid rho_j = (j + 1/2) h.  No node sits on the axis, so
// the centrifugal term l^2/rho^2 is finite everywhere, and sector functions
// extend across the origin by parity: u(-rho) = (-1)^{|l|} u(rho).
struct RadialGrid {
  int n = 0;
  double rho_max = 0.0;
  double h = 0.0;

  static RadialGrid half_offset(double rho_max, int n);
  double rho(int j) const { return (j + 0.5) * h; }
  std::vector<double> nodes() const;
};

// Complex samples of one angular sector on a radial grid with quadrature
// weights (plain d-rho weights; norms carry the 2 pi rho factor).
struct RadialSamples {
  int l = 0;
  double t = 0.0;
  std::vector<double> rho;
  std::vector<double> weight;
  std::vector<Complex> u;

  double norm2() const;                       // 2 pi sum w rho |u|^2
  Complex inner(const RadialSamples& o) const;  // 2 pi sum w rho conj(u) v
  double moment_rho2() const;                 // 2 pi sum w rho^3 |u|^2
  bool uniform_spacing() const;
};

using SectorEvaluator = std::function<Complex(double rho, double t)>;

RadialSamples sample_sector(const SectorEvaluator& f, int l, const RadialGrid& grid, double t);
RadialSamples sample_sector_gauss(const SectorEvaluator& f, int l, double rho_max, int order,
                                  double t);

// Full wavefunction samples on a polar grid; phi is uniform with M points.
struct PolarSamples {
  std::vector<double> rho;
  std::vector<double> wrho;
  int n_phi = 0;
  std::vector<Complex> values;  // row-major [i_rho * n_phi + k_phi]

  double phi(int k) const { return 2.0 * kPi * k / n_phi; }
  double dphi() const { return 2.0 * kPi / n_phi; }
  Complex& at(int i, int k) { return values[static_cast<std::size_t>(i) * n_phi + k]; }
  Complex at(int i, int k) const { return values[static_cast<std::size_t>(i) * n_phi + k]; }
  double norm2() const;
};

using PolarEvaluator = std::function<Complex(double rho, double phi)>;

PolarSamples sample_polar(const PolarEvaluator& f, const std::vector<double>& rho,
                          const std::vector<double>& wrho, int n_phi);
PolarSamples sample_polar_uniform(const PolarEvaluator& f, const RadialGrid& grid, int n_phi);
PolarSamples sample_polar_gauss(const PolarEvaluator& f, double rho_max, int order, int n_phi);

// 4th-order centered first derivative in rho of sector samples on a uniform
// half-offset grid.  Inner ghosts come from the parity fold; outer ghosts
// from `outer` when given (analytic tail), otherwise zero.
std::vector<Complex> radial_derivative_4th(const std::vector<Complex>& u, double h, int l,
                                           const std::function<Complex(double)>& outer = nullptr);

// Spectral d/dphi per radial ring (exact for band-limited data).
std::vector<Complex> phi_derivative_spectral(const PolarSamples& s);

}  // namespace twistmap
