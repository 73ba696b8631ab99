#include "twistmap/current.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace twistmap {

namespace {

// value of a polar field at a (possibly negative) radial index: crossing the
// origin lands on the opposite azimuth
Complex polar_value(const PolarSamples& s, int i, int k) {
  const int n = static_cast<int>(s.rho.size());
  if (i >= n) return 0.0;
  if (i < 0) return s.at(-i - 1, (k + s.n_phi / 2) % s.n_phi);
  return s.at(i, k);
}

}  // namespace

CurrentField current_direct(const PolarSamples& samples, const FieldProfile& profile,
                            double t2) {
  const int n = static_cast<int>(samples.rho.size());
  const int m = samples.n_phi;
  if (n < 5 || m < 8) throw ConfigError("current_direct needs a resolved polar grid");
  if (m % 2 != 0) throw ConfigError("current_direct needs an even number of phi samples");
  const double h = samples.rho[1] - samples.rho[0];
  for (int i = 0; i + 1 < n; ++i)
    if (std::fabs(samples.rho[i + 1] - samples.rho[i] - h) >
        1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, samples.rho[i + 1]))
      throw ConfigError("current_direct needs a uniform radial grid");

  const double w = profile.dissipation(t2);
  const double om = profile.omega(t2);
  const double mass = profile.mass();
  const double sq_w = std::sqrt(w);

  const std::vector<Complex> dphi = phi_derivative_spectral(samples);

  CurrentField out;
  out.rho = samples.rho;
  out.wrho = samples.wrho;
  out.n_phi = m;
  out.j_rho.resize(samples.values.size());
  out.j_phi.resize(samples.values.size());

  double max_phase_step = 0.0;
  for (int i = 0; i < n; ++i) {
    const double rho = samples.rho[i];
    for (int k = 0; k < m; ++k) {
      const std::size_t idx = static_cast<std::size_t>(i) * m + k;
      const Complex psi = samples.at(i, k);
      const Complex drho = (polar_value(samples, i - 2, k) - 8.0 * polar_value(samples, i - 1, k) +
                            8.0 * polar_value(samples, i + 1, k) -
                            polar_value(samples, i + 2, k)) /
                           (12.0 * h);
      out.j_rho[idx] = (sq_w / mass) * (std::conj(psi) * drho).imag();
      out.j_phi[idx] = (sq_w / mass) * (std::conj(psi) * dphi[idx]).imag() / rho +
                       (om / sq_w) * rho * std::norm(psi);
      if (i + 1 < n) {
        const Complex nb = samples.at(i + 1, k);
        if (std::abs(psi) > 1e-9 && std::abs(nb) > 1e-9)
          max_phase_step = std::max(max_phase_step, std::fabs(std::arg(nb / psi)));
      }
    }
  }
  out.under_resolved = max_phase_step > 2.0 * kPi / 16.0;
  return out;
}

CurrentField current_transformed(const ReferenceState& reference,
                                 const ErmakovTrajectory& trajectory, double t2,
                                 const std::vector<double>& rho, const std::vector<double>& wrho,
                                 int n_phi) {
  const double b = trajectory.b(t2);
  const double bdot = trajectory.bdot(t2);
  const double t1 = trajectory.tau1(t2);
  const double w2 = trajectory.target().dissipation(t2);
  const double w1 = trajectory.reference().dissipation(t1);
  const double om1 = trajectory.reference().omega(t1);
  const double om2 = trajectory.target().omega(t2);
  const double mass = reference.mass();

  const double pref = std::sqrt(w2) / (std::sqrt(w1) * b * b);
  const double b2_over_b1 = om2 / om1;  // B2/B1
  const double coef_a = 1.0 / b - b2_over_b1 * (w1 / w2) * b;
  const double e_a1_over_m = -om1 / std::sqrt(w1);  // (e A1/m)_phi per unit rho1, e = -1
  const double g_rho = mass * (std::sqrt(w1) / w2) * (bdot / b);  // G per unit rho1

  const std::vector<int> ls = reference.sectors();

  CurrentField out;
  out.rho = rho;
  out.wrho = wrho;
  out.n_phi = n_phi;
  out.j_rho.resize(rho.size() * n_phi);
  out.j_phi.resize(rho.size() * n_phi);

  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double rho1 = rho[i] / b;
    for (int k = 0; k < n_phi; ++k) {
      const double phi = 2.0 * kPi * k / n_phi;
      Complex psi = 0.0, drho = 0.0, dphi = 0.0;
      for (int l : ls) {
        const Complex ph = std::exp(Complex(0.0, l * phi));
        const Complex u = reference.sector_value(l, rho1, t1);
        psi += ph * u;
        drho += ph * reference.sector_radial_derivative(l, rho1, t1);
        dphi += ph * Complex(0.0, l) * u;
      }
      const double den1 = std::norm(psi);
      const double j1_rho = (std::sqrt(w1) / mass) * (std::conj(psi) * drho).imag();
      const double j1_phi = (std::sqrt(w1) / mass) * (std::conj(psi) * dphi).imag() / rho1 +
                            (om1 / std::sqrt(w1)) * rho1 * den1;
      const std::size_t idx = i * n_phi + k;
      out.j_rho[idx] = pref * (j1_rho / b + (b / mass) * g_rho * rho1 * den1);
      out.j_phi[idx] = pref * (j1_phi / b + coef_a * e_a1_over_m * rho1 * den1);
    }
  }
  return out;
}

std::array<double, 2> gauge_potential(const ErmakovTrajectory& trajectory, double t2,
                                      const std::array<double, 2>& r1) {
  const double b = trajectory.b(t2);
  const double bdot = trajectory.bdot(t2);
  const double t1 = trajectory.tau1(t2);
  const double w2 = trajectory.target().dissipation(t2);
  const double w1 = trajectory.reference().dissipation(t1);
  const double mass = trajectory.target().mass();
  const double c = mass * (std::sqrt(w1) / w2) * (bdot / b);
  return {c * r1[0], c * r1[1]};
}

double continuity_residual(const MappedState& state, const FieldProfile& profile,
                           const RadialGrid& grid, int n_phi, double t2, double dt) {
  auto eval = [&](double rho, double phi, double t) {
    Complex v = 0.0;
    for (int l : state.sectors())
      v += state.sector_value(l, rho, t) * std::exp(Complex(0.0, l * phi));
    return v;
  };
  PolarSamples now = sample_polar_uniform(
      [&](double rho, double phi) { return eval(rho, phi, t2); }, grid, n_phi);
  PolarSamples fwd = sample_polar_uniform(
      [&](double rho, double phi) { return eval(rho, phi, t2 + dt); }, grid, n_phi);
  PolarSamples bwd = sample_polar_uniform(
      [&](double rho, double phi) { return eval(rho, phi, t2 - dt); }, grid, n_phi);

  const CurrentField j = current_direct(now, profile, t2);

  // div j = (1/rho) d(rho j_rho)/drho + (1/rho) d(j_phi)/dphi
  const int n = grid.n;
  const int m = n_phi;
  const double h = grid.h;
  std::vector<double> rj(n * m);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k) rj[i * m + k] = grid.rho(i) * j.j_rho[i * m + k];
  auto rj_value = [&](int i, int k) -> double {
    if (i >= n) return 0.0;
    if (i < 0) return rj[(-i - 1) * m + (k + m / 2) % m];  // rho j_rho is even across the axis
    return rj[i * m + k];
  };
  PolarSamples jphi_field = now;  // reuse geometry
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k) jphi_field.at(i, k) = j.j_phi[i * m + k];
  const std::vector<Complex> djphi = phi_derivative_spectral(jphi_field);

  double num = 0.0, den = 0.0, den_static = 0.0;
  for (int i = 0; i < n; ++i) {
    const double rho = grid.rho(i);
    for (int k = 0; k < m; ++k) {
      const std::size_t idx = static_cast<std::size_t>(i) * m + k;
      const double drj = (rj_value(i - 2, k) - 8.0 * rj_value(i - 1, k) +
                          8.0 * rj_value(i + 1, k) - rj_value(i + 2, k)) /
                         (12.0 * h);
      const double div = drj / rho + djphi[idx].real() / rho;
      const double dndt = (std::norm(fwd.values[idx]) - std::norm(bwd.values[idx])) / (2.0 * dt);
      const double w = rho * h * (2.0 * kPi / m);
      num += w * (dndt + div) * (dndt + div);
      den += w * dndt * dndt;
      den_static += w * std::norm(now.values[idx]) * std::norm(now.values[idx]);
    }
  }
  // relative to the density-rate norm, floored by the natural rate scale
  // omega0 ||n||_2 so stationary densities do not divide by noise
  const double scale =
      std::max(std::sqrt(den), profile.omega0() * std::sqrt(den_static));
  return std::sqrt(num) / scale;
}

void write_current_csv(const CurrentField& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path);
  out << "rho,phi,j_rho,j_phi\n";
  for (std::size_t i = 0; i < field.rho.size(); ++i) {
    for (int k = 0; k < field.n_phi; ++k) {
      const std::size_t idx = i * field.n_phi + k;
      out << format_g17(field.rho[i]) << ',' << format_g17(field.phi(k)) << ','
          << format_g17(field.j_rho[idx]) << ',' << format_g17(field.j_phi[idx]) << '\n';
    }
  }
}

}  // namespace twistmap
