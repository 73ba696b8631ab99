#include "twistmap/states.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "twistmap/quadrature.hpp"

namespace twistmap {

double laguerre(int n, double alpha, double x) {
  if (n < 0) throw ConfigError("laguerre order must be >= 0");
  if (n == 0) return 1.0;
  double lm1 = 1.0;
  double l0 = 1.0 + alpha - x;
  for (int k = 1; k < n; ++k) {
    const double lp1 = ((2.0 * k + 1.0 + alpha - x) * l0 - (k + alpha) * lm1) / (k + 1.0);
    lm1 = l0;
    l0 = lp1;
  }
  return l0;
}

namespace {

// radial profile without normalization
double radial_unnormalized(int n, int absl, double rho_h, double rho) {
  const double s = rho / rho_h;
  const double s2 = s * s;
  return std::pow(s, absl) * laguerre(n, absl, 2.0 * s2) * std::exp(-s2);
}

}  // namespace

double normalization_constant(int n, int l, double rho_h) {
  if (n < 0) throw ConfigError("radial quantum number must be >= 0");
  if (!(rho_h > 0.0)) throw ConfigError("rho_h must be > 0");
  const int absl = std::abs(l);
  // support bound: the density is a polynomial of degree 2(2n+|l|) times
  // exp(-2 rho^2/rho_h^2); a tail beyond (sqrt(2n+|l|+1)+8) rho_h is < 1e-12
  const double rho_max = rho_h * (std::sqrt(2.0 * n + absl + 1.0) + 8.0);
  const double integral = integrate_adaptive(
      [&](double rho) {
        const double f = radial_unnormalized(n, absl, rho_h, rho);
        return f * f * rho;
      },
      0.0, rho_max);
  return 1.0 / std::sqrt(2.0 * kPi * integral);
}

LandauState make_landau_state(int n, int l, double mass, double omega0) {
  if (n < 0) throw ConfigError("radial quantum number must be >= 0");
  if (!(mass > 0.0) || !(omega0 > 0.0)) throw ConfigError("mass and omega0 must be > 0");
  LandauState st;
  st.n = n;
  st.l = l;
  st.mass = mass;
  st.omega0 = omega0;
  st.rho_h = std::sqrt(2.0 / (mass * omega0));
  st.eps_perp = omega0 * (2.0 * n + std::abs(l) + l + 1.0);
  st.norm = normalization_constant(n, l, st.rho_h);
  return st;
}

double LandauState::radial(double rho) const {
  return norm * radial_unnormalized(n, std::abs(l), rho_h, rho);
}

double LandauState::radial_derivative(double rho) const {
  const int absl = std::abs(l);
  const double s2 = (rho / rho_h) * (rho / rho_h);
  const double lag = laguerre(n, absl, 2.0 * s2);
  // d/dx L_n^a(x) = -L_{n-1}^{a+1}(x)
  const double dlag = n > 0 ? -laguerre(n - 1, absl + 1.0, 2.0 * s2) : 0.0;
  const double powf = std::pow(rho / rho_h, absl);
  const double env = std::exp(-s2);
  double d = 0.0;
  if (absl > 0) d += absl * std::pow(rho / rho_h, absl - 1) / rho_h * lag * env;
  d += powf * dlag * (4.0 * rho / (rho_h * rho_h)) * env;
  d += powf * lag * env * (-2.0 * rho / (rho_h * rho_h));
  return norm * d;
}

Complex LandauState::evaluate(double rho, double phi, double t) const {
  if (rho < 0.0) throw ConfigError("rho must be >= 0");
  const double r = radial(rho);
  return r * std::exp(Complex(0.0, l * phi - eps_perp * t));
}

double mean_rho2_stationary(const LandauState& state) {
  return (2.0 * state.n + std::abs(state.l) + 1.0) / (state.mass * state.omega0);
}

double support_radius(const LandauState& state, double b_max) {
  return state.rho_h * b_max * (std::sqrt(2.0 * state.n + std::abs(state.l) + 1.0) + 8.0);
}

// ---------------------------------------------------------------------------

void ReferenceState::add(Complex coeff, const LandauState& state) {
  if (!comps_.empty()) {
    if (state.mass != comps_.front().second.mass ||
        state.omega0 != comps_.front().second.omega0)
      throw ConfigError("all components of a reference state must share mass and omega0");
  }
  comps_.emplace_back(coeff, state);
}

Complex ReferenceState::sector_value(int l, double rho, double t) const {
  Complex v = 0.0;
  for (const auto& [c, st] : comps_) {
    if (st.l != l) continue;
    v += c * st.radial(rho) * std::exp(Complex(0.0, -st.eps_perp * t));
  }
  return v;
}

Complex ReferenceState::sector_radial_derivative(int l, double rho, double t) const {
  Complex v = 0.0;
  for (const auto& [c, st] : comps_) {
    if (st.l != l) continue;
    v += c * st.radial_derivative(rho) * std::exp(Complex(0.0, -st.eps_perp * t));
  }
  return v;
}

std::vector<int> ReferenceState::sectors() const {
  std::set<int> ls;
  for (const auto& [c, st] : comps_) ls.insert(st.l);
  return {ls.begin(), ls.end()};
}

double ReferenceState::mass() const {
  if (comps_.empty()) throw ConfigError("empty reference state");
  return comps_.front().second.mass;
}

double ReferenceState::omega0() const {
  if (comps_.empty()) throw ConfigError("empty reference state");
  return comps_.front().second.omega0;
}

bool ReferenceState::single_sector() const { return sectors().size() == 1; }

int ReferenceState::max_abs_l() const {
  int m = 0;
  for (const auto& [c, st] : comps_) m = std::max(m, std::abs(st.l));
  return m;
}

double ReferenceState::support_radius(double b_max) const {
  double r = 0.0;
  for (const auto& [c, st] : comps_) r = std::max(r, twistmap::support_radius(st, b_max));
  return r;
}

Complex ReferenceState::evaluate(double rho, double phi, double t) const {
  Complex v = 0.0;
  for (const auto& [c, st] : comps_) v += c * st.evaluate(rho, phi, t);
  return v;
}

}  // namespace twistmap
