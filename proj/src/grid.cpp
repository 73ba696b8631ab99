#include "twistmap/grid.hpp"

#include <cmath>

#include "twistmap/quadrature.hpp"

namespace twistmap {

RadialGrid RadialGrid::half_offset(double rho_max, int n) {
  if (!(rho_max > 0.0) || n < 8) throw ConfigError("invalid radial grid");
  RadialGrid g;
  g.n = n;
  g.rho_max = rho_max;
  g.h = rho_max / n;
  return g;
}

std::vector<double> RadialGrid::nodes() const {
  std::vector<double> r(n);
  for (int j = 0; j < n; ++j) r[j] = rho(j);
  return r;
}

double RadialSamples::norm2() const {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += weight[i] * rho[i] * std::norm(u[i]);
  return 2.0 * kPi * s;
}

Complex RadialSamples::inner(const RadialSamples& o) const {
  Complex s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += weight[i] * rho[i] * std::conj(u[i]) * o.u[i];
  return 2.0 * kPi * s;
}

double RadialSamples::moment_rho2() const {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    s += weight[i] * rho[i] * rho[i] * rho[i] * std::norm(u[i]);
  return 2.0 * kPi * s;
}

bool RadialSamples::uniform_spacing() const {
  if (rho.size() < 2) return false;
  const double h = rho[1] - rho[0];
  for (std::size_t i = 1; i + 1 < rho.size(); ++i)
    if (std::fabs(rho[i + 1] - rho[i] - h) > 1e-12 * h) return false;
  return true;
}

RadialSamples sample_sector(const SectorEvaluator& f, int l, const RadialGrid& grid, double t) {
  RadialSamples s;
  s.l = l;
  s.t = t;
  s.rho = grid.nodes();
  s.weight.assign(grid.n, grid.h);
  s.u.resize(grid.n);
  for (int j = 0; j < grid.n; ++j) s.u[j] = f(s.rho[j], t);
  return s;
}

RadialSamples sample_sector_gauss(const SectorEvaluator& f, int l, double rho_max, int order,
                                  double t) {
  Quadrature q = gauss_legendre(order, 0.0, rho_max);
  RadialSamples s;
  s.l = l;
  s.t = t;
  s.rho = q.x;
  s.weight = q.w;
  s.u.resize(q.x.size());
  for (std::size_t j = 0; j < q.x.size(); ++j) s.u[j] = f(s.rho[j], t);
  return s;
}

double PolarSamples::norm2() const {
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    double ring = 0.0;
    for (int k = 0; k < n_phi; ++k) ring += std::norm(at(static_cast<int>(i), k));
    s += wrho[i] * rho[i] * ring;
  }
  return s * dphi();
}

PolarSamples sample_polar(const PolarEvaluator& f, const std::vector<double>& rho,
                          const std::vector<double>& wrho, int n_phi) {
  PolarSamples s;
  s.rho = rho;
  s.wrho = wrho;
  s.n_phi = n_phi;
  s.values.resize(rho.size() * n_phi);
  for (std::size_t i = 0; i < rho.size(); ++i)
    for (int k = 0; k < n_phi; ++k) s.at(static_cast<int>(i), k) = f(rho[i], s.phi(k));
  return s;
}

PolarSamples sample_polar_uniform(const PolarEvaluator& f, const RadialGrid& grid, int n_phi) {
  return sample_polar(f, grid.nodes(), std::vector<double>(grid.n, grid.h), n_phi);
}

PolarSamples sample_polar_gauss(const PolarEvaluator& f, double rho_max, int order, int n_phi) {
  Quadrature q = gauss_legendre(order, 0.0, rho_max);
  return sample_polar(f, q.x, q.w, n_phi);
}

std::vector<Complex> radial_derivative_4th(const std::vector<Complex>& u, double h, int l,
                                           const std::function<Complex(double)>& outer) {
  const int n = static_cast<int>(u.size());
  const double sign = (std::abs(l) % 2 == 0) ? 1.0 : -1.0;
  auto value = [&](int j) -> Complex {
    if (j >= 0 && j < n) return u[j];
    if (j < 0) return sign * u[-j - 1];  // rho_{-1} = -rho_0, rho_{-2} = -rho_1
    if (outer) return outer((j + 0.5) * h);
    return 0.0;
  };
  std::vector<Complex> d(n);
  for (int j = 0; j < n; ++j) {
    d[j] = (value(j - 2) - 8.0 * value(j - 1) + 8.0 * value(j + 1) - value(j + 2)) / (12.0 * h);
  }
  return d;
}

std::vector<Complex> phi_derivative_spectral(const PolarSamples& s) {
  const int m = s.n_phi;
  std::vector<Complex> out(s.values.size());
  std::vector<Complex> coef(m);
  // direct DFT per ring; grids here are small enough that O(M^2) is fine
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    for (int mm = 0; mm < m; ++mm) {
      Complex c = 0.0;
      for (int k = 0; k < m; ++k)
        c += s.at(static_cast<int>(i), k) *
             std::exp(Complex(0.0, -2.0 * kPi * mm * k / m));
      coef[mm] = c / static_cast<double>(m);
    }
    for (int k = 0; k < m; ++k) {
      Complex v = 0.0;
      for (int mm = 0; mm < m; ++mm) {
        const int wave = mm <= m / 2 ? mm : mm - m;  // signed harmonic index
        v += Complex(0.0, wave) * coef[mm] * std::exp(Complex(0.0, 2.0 * kPi * mm * k / m));
      }
      out[i * m + k] = v;
    }
  }
  return out;
}

}  // namespace twistmap
