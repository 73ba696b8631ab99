#include "twistmap/observables.hpp"

#include <algorithm>
#include <cmath>

#include "twistmap/quadrature.hpp"

namespace twistmap {

namespace {

const LandauState& single_landau_component(const MappedState& state, const char* who) {
  const auto* src = dynamic_cast<const LandauSource*>(&state.reference());
  if (!src || src->reference().components().size() != 1)
    throw ConfigError(std::string(who) + " closed form needs a single Landau reference");
  return src->reference().components().front().second;
}

struct SectorMoments {
  double norm2 = 0.0;   // <1>
  double rho2 = 0.0;    // <rho^2>
  double p2 = 0.0;      // <p^2>
  double d_sym = 0.0;   // <(p.r + r.p)/2>
};

// scaled second moments of the mapped state at t2, by Gauss-Legendre
// quadrature with analytic radial derivatives
SectorMoments mapped_moments(const MappedState& state, double t2, int order) {
  const double rmax = state.support_radius();
  Quadrature q = gauss_legendre(order, 0.0, rmax);
  SectorMoments m;
  for (int l : state.sectors()) {
    for (std::size_t j = 0; j < q.x.size(); ++j) {
      const double rho = q.x[j];
      const double w = q.w[j] * rho;  // rho drho
      const Complex u = state.sector_value(l, rho, t2);
      const Complex du = state.sector_radial_derivative(l, rho, t2);
      const double uu = std::norm(u);
      m.norm2 += w * uu;
      m.rho2 += w * rho * rho * uu;
      m.p2 += w * (std::norm(du) + static_cast<double>(l) * l * uu / (rho * rho));
      m.d_sym += w * rho * (std::conj(u) * du).imag();
    }
  }
  m.norm2 *= 2.0 * kPi;
  m.rho2 *= 2.0 * kPi;
  m.p2 *= 2.0 * kPi;
  m.d_sym *= 2.0 * kPi;
  return m;
}

SectorMoments sample_moments(const RadialSamples& s) {
  if (!s.uniform_spacing())
    throw ConfigError("sample-based invariants need a uniform radial grid");
  const double h = s.rho[1] - s.rho[0];
  const std::vector<Complex> du = radial_derivative_4th(s.u, h, s.l);
  SectorMoments m;
  for (std::size_t j = 0; j < s.u.size(); ++j) {
    const double rho = s.rho[j];
    const double w = s.weight[j] * rho;
    const double uu = std::norm(s.u[j]);
    m.norm2 += w * uu;
    m.rho2 += w * rho * rho * uu;
    m.p2 += w * (std::norm(du[j]) + static_cast<double>(s.l) * s.l * uu / (rho * rho));
    m.d_sym += w * rho * (std::conj(s.u[j]) * du[j]).imag();
  }
  m.norm2 *= 2.0 * kPi;
  m.rho2 *= 2.0 * kPi;
  m.p2 *= 2.0 * kPi;
  m.d_sym *= 2.0 * kPi;
  return m;
}

double lewis_from_moments(const SectorMoments& m, double b, double bdot, double mass,
                          double omega0) {
  const double bs = bdot / omega0;  // d b / d(omega0 t)
  const double x2 = mass * omega0 * m.rho2;        // scaled <rho^2>
  const double p2 = m.p2 / (mass * omega0);        // scaled <p^2>
  const double inv = 0.5 * ((1.0 / (b * b) + bs * bs) * x2 + b * b * p2 - 2.0 * b * bs * m.d_sym);
  return inv / m.norm2;
}

}  // namespace

double mean_rho2(const MappedState& state, double t2) {
  const LandauState& st = single_landau_component(state, "mean_rho2");
  const double b = state.trajectory().b(t2);
  return b * b * mean_rho2_stationary(st);
}

double mean_rho2_quadrature(const MappedState& state, double t2, int order) {
  const SectorMoments m = mapped_moments(state, t2, order);
  return m.rho2 / m.norm2;
}

double mean_energy(const MappedState& state, double t2) {
  const LandauState& st = single_landau_component(state, "mean_energy");
  const double omega0 = st.omega0;
  const double b = state.trajectory().b(t2);
  const double bdot = state.trajectory().bdot(t2);
  const double mu = 2.0 * st.n + std::abs(st.l) + 1.0;
  const double r = bdot / omega0;
  return 0.5 * omega0 * mu * (b * b + r * r + 1.0 / (b * b)) + st.l * omega0;
}

double mean_energy_quadrature(const MappedState& state, double t2, int order) {
  const double rmax = state.support_radius();
  Quadrature q = gauss_legendre(order, 0.0, rmax);
  const double dt = 1e-3;
  Complex acc = 0.0;
  double norm = 0.0;
  for (int l : state.sectors()) {
    for (std::size_t j = 0; j < q.x.size(); ++j) {
      const double rho = q.x[j];
      const double w = q.w[j] * rho;
      const Complex u = state.sector_value(l, rho, t2);
      // 4th-order central difference in time
      const Complex dudt = (-state.sector_value(l, rho, t2 + 2.0 * dt) +
                            8.0 * state.sector_value(l, rho, t2 + dt) -
                            8.0 * state.sector_value(l, rho, t2 - dt) +
                            state.sector_value(l, rho, t2 - 2.0 * dt)) /
                           (12.0 * dt);
      acc += w * std::conj(u) * Complex(0.0, 1.0) * dudt;
      norm += w * std::norm(u);
    }
  }
  return acc.real() / norm;
}

Complex hamiltonian_matrix_element(int n_prime, int n, int l,
                                   const ErmakovTrajectory& trajectory, double t2) {
  if (n_prime < 0 || n < 0) throw ConfigError("radial quantum numbers must be >= 0");
  const FieldProfile& ref = trajectory.reference();
  const double omega0 = ref.omega0();
  const double mass = ref.mass();
  const LandauState bra = make_landau_state(n_prime, l, mass, omega0);
  const LandauState ket = make_landau_state(n, l, mass, omega0);

  const double rmax = std::max(support_radius(bra, 1.0), support_radius(ket, 1.0));
  Quadrature q = gauss_legendre(400, 0.0, rmax);
  double r2 = 0.0;    // <n'| r^2 |n>
  double dsym = 0.0;  // -i <n'| 1 + rho d/drho |n> = -i * dsym (real integral)
  for (std::size_t j = 0; j < q.x.size(); ++j) {
    const double rho = q.x[j];
    const double w = q.w[j] * rho;
    const double rb = bra.radial(rho);
    const double rk = ket.radial(rho);
    r2 += w * rb * rk * rho * rho;
    dsym += w * rb * (rk + rho * ket.radial_derivative(rho));
  }
  r2 *= 2.0 * kPi;
  dsym *= 2.0 * kPi;

  const double b = trajectory.b(t2);
  const double bdot = trajectory.bdot(t2);
  const double delta = n_prime == n ? 1.0 : 0.0;
  Complex el = (bdot / b) * Complex(0.0, -1.0) * dsym;
  el += (ket.eps_perp - l * omega0) * delta / (b * b) + l * omega0 * delta;
  el += 0.5 * mass * (omega0 * omega0 * b * b + bdot * bdot - omega0 * omega0 / (b * b)) * r2;
  return el;
}

OamCharge oam_and_charge(const PolarSamples& s) {
  const std::vector<Complex> dphi = phi_derivative_spectral(s);
  double lz = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    for (int k = 0; k < s.n_phi; ++k) {
      const std::size_t idx = i * s.n_phi + k;
      const double w = s.wrho[i] * s.rho[i] * s.dphi();
      lz += w * (std::conj(s.values[idx]) * dphi[idx]).imag();
      norm += w * std::norm(s.values[idx]);
    }
  }
  if (norm <= 0.0) throw ConfigError("oam_and_charge: zero-norm samples");

  // probe circle: outermost ring that still carries usable amplitude
  long charge = 0;
  bool found = false;
  for (std::size_t i = s.rho.size(); i-- > 0;) {
    double amp = 0.0;
    for (int k = 0; k < s.n_phi; ++k)
      amp = std::max(amp, std::abs(s.at(static_cast<int>(i), k)));
    if (amp < 1e-12) continue;
    double winding = 0.0;
    for (int k = 0; k < s.n_phi; ++k) {
      const Complex a = s.at(static_cast<int>(i), k);
      const Complex bb = s.at(static_cast<int>(i), (k + 1) % s.n_phi);
      winding += std::arg(bb / a);
    }
    charge = std::lround(winding / (2.0 * kPi));
    found = true;
    break;
  }
  if (!found)
    throw Error("topological charge undefined: amplitude below 1e-12 on every circle");
  return {lz / norm, charge};
}

double ermakov_lewis(const MappedState& state, double t2, int order) {
  const double b = state.trajectory().b(t2);
  const double bdot = state.trajectory().bdot(t2);
  const auto* src = dynamic_cast<const LandauSource*>(&state.reference());
  const double omega0 =
      src ? src->reference().omega0() : state.trajectory().reference().omega0();
  return lewis_from_moments(mapped_moments(state, t2, order), b, bdot, state.mass(), omega0);
}

double ermakov_lewis(const RadialSamples& samples, double b, double bdot, double mass,
                     double omega0) {
  return lewis_from_moments(sample_moments(samples), b, bdot, mass, omega0);
}

double ermakov_lewis_squared(const RadialSamples& s, double b, double bdot, double mass,
                             double omega0) {
  if (!s.uniform_spacing())
    throw ConfigError("sample-based invariants need a uniform radial grid");
  const double h = s.rho[1] - s.rho[0];
  const int n = static_cast<int>(s.u.size());
  const double sign = (std::abs(s.l) % 2 == 0) ? 1.0 : -1.0;
  auto val = [&](int j) -> Complex {
    if (j >= 0 && j < n) return s.u[j];
    if (j < 0) return sign * s.u[-j - 1];
    return 0.0;
  };
  const double bs = bdot / omega0;
  std::vector<Complex> iu(n);
  for (int j = 0; j < n; ++j) {
    const double rho = s.rho[j];
    const Complex d1 =
        (val(j - 2) - 8.0 * val(j - 1) + 8.0 * val(j + 1) - val(j + 2)) / (12.0 * h);
    const Complex d2 = (-val(j - 2) + 16.0 * val(j - 1) - 30.0 * val(j) + 16.0 * val(j + 1) -
                        val(j + 2)) /
                       (12.0 * h * h);
    const Complex p2u =
        -(d2 + d1 / rho - static_cast<double>(s.l) * s.l * s.u[j] / (rho * rho));
    const Complex dsym_u = Complex(0.0, -1.0) * (s.u[j] + rho * d1);
    iu[j] = 0.5 * ((1.0 / (b * b) + bs * bs) * (mass * omega0) * rho * rho * s.u[j] +
                   b * b / (mass * omega0) * p2u - 2.0 * b * bs * dsym_u);
  }
  double num = 0.0, den = 0.0;
  for (int j = 0; j < n; ++j) {
    const double w = s.weight[j] * s.rho[j];
    num += w * std::norm(iu[j]);
    den += w * std::norm(s.u[j]);
  }
  return num / den;
}

std::pair<double, double> twiss(const ErmakovTrajectory& trajectory, double t2) {
  const double b = trajectory.b(t2);
  const double bdot = trajectory.bdot(t2);
  return {b * b, -b * bdot};
}

std::pair<double, double> radiation_diagnostics(const ErmakovTrajectory& trajectory, double t2) {
  const double b = trajectory.b(t2);
  const double d3 = trajectory.b2_third_derivative(t2);
  return {b * b, d3 * d3};
}

std::pair<double, double> lens_averages(const ErmakovTrajectory& trajectory,
                                        double window_begin, double window_end) {
  const double omega0 = trajectory.reference().omega0();
  const double period = 2.0 * kPi / omega0;
  if (window_end - window_begin < period - 1e-12)
    throw ConfigError("lens_averages window must span at least one period 2 pi/omega0");
  Quadrature q = gauss_legendre(256, window_begin, window_begin + period);
  double avg = 0.0;
  for (std::size_t j = 0; j < q.x.size(); ++j) {
    const double b = trajectory.b(q.x[j]);
    avg += q.w[j] * b * b;
  }
  avg /= period;
  const double bmax = trajectory.b_max_on(window_begin, window_end);
  const double bmin = trajectory.b_min_on(window_begin, window_end);
  return {avg, std::sqrt(bmax * bmin)};
}

std::array<double, 2> mean_momentum(const MappedState& state, double t2) {
  const ErmakovTrajectory& tr = state.trajectory();
  const double b = tr.b(t2);
  const double bdot = tr.bdot(t2);
  const double t1 = tr.tau1(t2);
  const double w2 = tr.target().dissipation(t2);
  const double m = state.mass();
  const double dphase = tr.phi1(t2) - tr.phi2(t2);

  // reference-frame brackets of the phase-dressed state on a polar grid
  const double rmax = state.reference().support_radius(1.0);
  Quadrature q = gauss_legendre(256, 0.0, rmax);
  const int n_phi = 64;
  const std::vector<int> ls = state.sectors();

  double px = 0.0, py = 0.0, rx = 0.0, ry = 0.0, norm = 0.0;
  for (std::size_t j = 0; j < q.x.size(); ++j) {
    const double rho = q.x[j];
    const double w = q.w[j] * rho * (2.0 * kPi / n_phi);
    for (int k = 0; k < n_phi; ++k) {
      const double phi = 2.0 * kPi * k / n_phi;
      Complex psi = 0.0, gx = 0.0, gy = 0.0;
      for (int l : ls) {
        const Complex dress = std::exp(Complex(0.0, l * (dphase + phi)));
        const Complex u = dress * state.reference().sector_value(l, rho, t1);
        const Complex du = dress * state.reference().sector_radial_derivative(l, rho, t1);
        const Complex ang = Complex(0.0, l) * u / rho;
        psi += u;
        gx += du * std::cos(phi) - ang * std::sin(phi);
        gy += du * std::sin(phi) + ang * std::cos(phi);
      }
      const double den = std::norm(psi);
      norm += w * den;
      px += w * (std::conj(psi) * Complex(0.0, -1.0) * gx).real();
      py += w * (std::conj(psi) * Complex(0.0, -1.0) * gy).real();
      rx += w * rho * std::cos(phi) * den;
      ry += w * rho * std::sin(phi) * den;
    }
  }
  px /= norm;
  py /= norm;
  rx /= norm;
  ry /= norm;
  return {px / b + (m / w2) * bdot * rx, py / b + (m / w2) * bdot * ry};
}

ObservableSeries compute_series(const MappedState& state, const std::vector<double>& times) {
  ObservableSeries s;
  const std::size_t n = times.size();
  s.times = times;
  s.mean_rho2.resize(n);
  s.energy.resize(n);
  s.first_integral_value.resize(n);
  s.ermakov_lewis.resize(n);
  s.emittance_x.resize(n);
  s.emittance_y.resize(n);
  s.twiss_beta.resize(n);
  s.twiss_alpha.resize(n);
  s.quadrupole.resize(n);
  s.radiation_scaling.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const double t = times[i];
    s.mean_rho2[i] = mean_rho2(state, t);
    s.energy[i] = mean_energy(state, t);
    s.first_integral_value[i] = state.trajectory().first_integral_at(t);
    const double lewis = ermakov_lewis(state, t);
    s.ermakov_lewis[i] = lewis;
    // e_x = 2 I_x; for a single-sector state <I_x> = <I_y> = <I>/2
    s.emittance_x[i] = lewis;
    s.emittance_y[i] = lewis;
    auto [beta, alpha] = twiss(state.trajectory(), t);
    s.twiss_beta[i] = beta;
    s.twiss_alpha[i] = alpha;
    auto [qp, rad] = radiation_diagnostics(state.trajectory(), t);
    s.quadrupole[i] = qp;
    s.radiation_scaling[i] = rad;
  });
  return s;
}

}  // namespace twistmap
