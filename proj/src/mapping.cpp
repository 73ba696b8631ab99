#include "twistmap/mapping.hpp"

#include <algorithm>
#include <cmath>

#include "twistmap/quadrature.hpp"

namespace twistmap {

Complex SectorSource::evaluate(double rho, double phi, double t) const {
  Complex v = 0.0;
  for (int l : sectors()) v += sector_value(l, rho, t) * std::exp(Complex(0.0, l * phi));
  return v;
}

// ---------------------------------------------------------------------------

MappedState::MappedState(std::shared_ptr<const SectorSource> reference,
                         std::shared_ptr<const ErmakovTrajectory> trajectory)
    : reference_(std::move(reference)), trajectory_(std::move(trajectory)) {
  if (!reference_ || !trajectory_) throw ConfigError("null reference or trajectory");
  if (reference_->mass() != trajectory_->target().mass())
    throw ConfigError("reference and trajectory must share the particle mass");
}

Complex MappedState::sector_value(int l, double rho, double t2) const {
  const ErmakovTrajectory& tr = *trajectory_;
  const double b = tr.b(t2);
  const double bdot = tr.bdot(t2);
  const double t1 = tr.tau1(t2);
  const double w2 = tr.target().dissipation(t2);
  const double m = reference_->mass();
  const Complex ref = reference_->sector_value(l, rho / b, t1);
  const double quad_phase = 0.5 * (m / w2) * (bdot / b) * rho * rho;
  const double l_phase = l * (tr.phi1(t2) - tr.phi2(t2));
  return ref / b * std::exp(Complex(0.0, quad_phase + l_phase));
}

Complex MappedState::sector_radial_derivative(int l, double rho, double t2) const {
  const ErmakovTrajectory& tr = *trajectory_;
  const double b = tr.b(t2);
  const double bdot = tr.bdot(t2);
  const double t1 = tr.tau1(t2);
  const double w2 = tr.target().dissipation(t2);
  const double m = reference_->mass();
  const double alpha = 0.5 * (m / w2) * (bdot / b);
  const double l_phase = l * (tr.phi1(t2) - tr.phi2(t2));
  const Complex phase = std::exp(Complex(0.0, alpha * rho * rho + l_phase));
  const Complex ref = reference_->sector_value(l, rho / b, t1);
  const Complex dref = reference_->sector_radial_derivative(l, rho / b, t1);
  return phase * (dref / (b * b) + ref / b * Complex(0.0, 2.0 * alpha * rho));
}

double MappedState::support_radius(double b_max) const {
  return reference_->support_radius(trajectory_->b_max() * b_max);
}

double MappedState::norm_quadrature(double t2, int order) const {
  Quadrature q = gauss_legendre(order, 0.0, support_radius());
  double total = 0.0;
  for (int l : sectors()) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.x.size(); ++j)
      s += q.w[j] * q.x[j] * std::norm(sector_value(l, q.x[j], t2));
    total += s;
  }
  return 2.0 * kPi * total;
}

MappedState map_state(const ReferenceState& reference, const ErmakovTrajectory& trajectory,
                      const FieldProfile& target) {
  if (reference.omega0() != trajectory.reference().omega0() ||
      reference.mass() != trajectory.reference().mass())
    throw ConfigError("reference state and trajectory reference system disagree");
  const FieldProfile& tt = trajectory.target();
  if (target.omega0() != tt.omega0() || target.mass() != tt.mass() ||
      std::fabs(target.duration() - tt.duration()) > 1e-12 * std::max(1.0, tt.duration()))
    throw ConfigError("span mismatch between the trajectory and the target profile");
  return MappedState(std::make_shared<LandauSource>(reference),
                     std::make_shared<ErmakovTrajectory>(trajectory));
}

MappedState map_state(std::shared_ptr<const SectorSource> reference,
                      std::shared_ptr<const ErmakovTrajectory> trajectory) {
  return MappedState(std::move(reference), std::move(trajectory));
}

// ---------------------------------------------------------------------------

double Sampled1d::norm2() const {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    s += 0.5 * (x[i + 1] - x[i]) * (std::norm(values[i]) + std::norm(values[i + 1]));
  return s;
}

Sampled1d qat_map_1d(const Sampled1d& psi, const LinearPair& pair) {
  const double t = psi.t;
  const double u2 = pair.u2(t);
  if (!(u2 > 0.0))
    throw LocalityError("1D QAT needs u2 > 0 on the mapped span; u2(" + std::to_string(t) +
                            ") = " + std::to_string(u2),
                        t);
  const double u1 = pair.u1(t);
  const double du2 = pair.du2(t);
  const double w = pair.profile().dissipation(t);
  const double m = pair.profile().mass();
  Sampled1d out;
  out.t = -u1 / u2;  // tau
  out.x.resize(psi.x.size());
  out.values.resize(psi.x.size());
  const double root = std::sqrt(u2);
  for (std::size_t i = 0; i < psi.x.size(); ++i) {
    const double x = psi.x[i];
    out.x[i] = x / u2;  // kappa
    out.values[i] =
        psi.values[i] * root * std::exp(Complex(0.0, -0.5 * (m / w) * (du2 / u2) * x * x));
  }
  return out;
}

// ---------------------------------------------------------------------------

VectorSamples momentum_action(const MappedState& state, const PolarSamples& samples, double t2) {
  const ErmakovTrajectory& tr = state.trajectory();
  const double b = tr.b(t2);
  const double bdot = tr.bdot(t2);
  const double t1 = tr.tau1(t2);
  const double w2 = tr.target().dissipation(t2);
  const double m = state.mass();
  const double alpha = 0.5 * (m / w2) * (bdot / b);
  const double coupl = (m / w2) * (bdot / b);

  VectorSamples out;
  out.rho = samples.rho;
  out.wrho = samples.wrho;
  out.n_phi = samples.n_phi;
  out.x.assign(samples.values.size(), 0.0);
  out.y.assign(samples.values.size(), 0.0);

  for (int l : state.sectors()) {
    const double l_phase = l * (tr.phi1(t2) - tr.phi2(t2));
    for (std::size_t i = 0; i < samples.rho.size(); ++i) {
      const double rho = samples.rho[i];
      const double rho1 = rho / b;
      const Complex u = state.reference().sector_value(l, rho1, t1);
      const Complex du = state.reference().sector_radial_derivative(l, rho1, t1);
      for (int k = 0; k < samples.n_phi; ++k) {
        const double phi = samples.phi(k);
        const double c = std::cos(phi), s = std::sin(phi);
        const Complex chi =
            std::exp(Complex(0.0, alpha * rho * rho + l_phase + l * phi));
        // p1 psi1 in Cartesian components at (rho1, phi)
        const Complex ang = Complex(0.0, l) * u / rho1;
        const Complex p1x = Complex(0.0, -1.0) * (du * c - ang * s);
        const Complex p1y = Complex(0.0, -1.0) * (du * s + ang * c);
        const std::size_t idx = i * samples.n_phi + k;
        out.x[idx] += chi * (p1x / (b * b) + coupl * rho1 * c * u);
        out.y[idx] += chi * (p1y / (b * b) + coupl * rho1 * s * u);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Complex> radial_second_derivative_4th(const std::vector<Complex>& u, double h, int l,
                                                  const std::function<Complex(double)>& outer) {
  const int n = static_cast<int>(u.size());
  const double sign = (std::abs(l) % 2 == 0) ? 1.0 : -1.0;
  auto value = [&](int j) -> Complex {
    if (j >= 0 && j < n) return u[j];
    if (j < 0) return sign * u[-j - 1];
    if (outer) return outer((j + 0.5) * h);
    return 0.0;
  };
  std::vector<Complex> d(n);
  for (int j = 0; j < n; ++j) {
    d[j] = (-value(j - 2) + 16.0 * value(j - 1) - 30.0 * value(j) + 16.0 * value(j + 1) -
            value(j + 2)) /
           (12.0 * h * h);
  }
  return d;
}

}  // namespace

std::vector<Complex> apply_sector_hamiltonian(const std::vector<Complex>& u,
                                              const RadialGrid& grid, int l,
                                              const FieldProfile& profile, double t,
                                              const std::function<Complex(double)>& outer) {
  const double w = profile.dissipation(t);
  const double om2 = profile.omega2(t);
  const double om = profile.omega(t);
  const double m = profile.mass();
  const std::vector<Complex> d1 = radial_derivative_4th(u, grid.h, l, outer);
  const std::vector<Complex> d2 = radial_second_derivative_4th(u, grid.h, l, outer);
  std::vector<Complex> hu(u.size());
  for (int j = 0; j < grid.n; ++j) {
    const double rho = grid.rho(j);
    const Complex lap = d2[j] + d1[j] / rho - static_cast<double>(l) * l * u[j] / (rho * rho);
    hu[j] = -(w / (2.0 * m)) * lap + (0.5 * m * om2 * rho * rho / w) * u[j] + om * l * u[j];
  }
  return hu;
}

ResidualResult schrodinger_residual(const SectorEvaluator& psi, int l,
                                    const FieldProfile& profile, const RadialGrid& grid,
                                    double t2) {
  const double m = profile.mass();
  const double omega0 = profile.omega0();
  const double dt = std::min(0.5 * m * grid.h * grid.h, 1e-3 / omega0);

  std::vector<Complex> u(grid.n), up(grid.n), um(grid.n);
  for (int j = 0; j < grid.n; ++j) {
    const double rho = grid.rho(j);
    u[j] = psi(rho, t2);
    up[j] = psi(rho, t2 + dt);
    um[j] = psi(rho, t2 - dt);
  }
  auto outer = [&](double rho) { return psi(rho, t2); };
  const std::vector<Complex> hu = apply_sector_hamiltonian(u, grid, l, profile, t2, outer);

  double num = 0.0, den = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    const Complex dpsi_dt = (up[j] - um[j]) / (2.0 * dt);
    const Complex r = Complex(0.0, 1.0) * dpsi_dt - hu[j];
    const double wgt = grid.rho(j) * grid.h;
    num += std::norm(r) * wgt;
    den += std::norm(u[j]) * wgt;
  }
  if (den <= 0.0) throw ConfigError("residual undefined: zero-norm sector");

  ResidualResult res;
  res.value = std::sqrt(num / den);
  // resolution guard: phase advance between neighbouring samples should stay
  // below 2 pi / 16
  double max_step = 0.0;
  for (int j = 0; j + 1 < grid.n; ++j) {
    if (std::abs(u[j]) < 1e-9 || std::abs(u[j + 1]) < 1e-9) continue;
    max_step = std::max(max_step, std::fabs(std::arg(u[j + 1] / u[j])));
  }
  res.under_resolved = max_step > 2.0 * kPi / 16.0;
  return res;
}

ResidualResult schrodinger_residual(const MappedState& state, const FieldProfile& profile,
                                    const RadialGrid& grid, double t2) {
  // combined over sectors: sqrt(sum ||r_l||^2 / sum ||u_l||^2)
  double num = 0.0, den = 0.0;
  bool warn = false;
  for (int l : state.sectors()) {
    SectorEvaluator f = [&state, l](double rho, double t) {
      return state.sector_value(l, rho, t);
    };
    ResidualResult r = schrodinger_residual(f, l, profile, grid, t2);
    // recover the unnormalized pieces
    SectorEvaluator fs = f;
    double n2 = 0.0;
    for (int j = 0; j < grid.n; ++j)
      n2 += std::norm(fs(grid.rho(j), t2)) * grid.rho(j) * grid.h;
    num += r.value * r.value * n2;
    den += n2;
    warn = warn || r.under_resolved;
  }
  ResidualResult out;
  out.value = std::sqrt(num / den);
  out.under_resolved = warn;
  return out;
}

}  // namespace twistmap
