// Probability-current checks: the direct definition against the
// reference-frame transform, the continuity equation, and the sign structure
// of the stationary current.

#include <doctest.h>

#include <cmath>
#include <fstream>

#include "twistmap/current.hpp"
#include "twistmap/scenario.hpp"

using namespace twistmap;

namespace {

PolarSamples mapped_samples(const MappedState& state, double t, int n_radial, int n_phi) {
  const RadialGrid grid = RadialGrid::half_offset(state.support_radius(), n_radial);
  return sample_polar_uniform(
      [&](double rho, double phi) {
        Complex v = 0.0;
        for (int l : state.sectors())
          v += state.sector_value(l, rho, t) * std::exp(Complex(0.0, l * phi));
        return v;
      },
      grid, n_phi);
}

// sup |direct - transformed| / sup |direct| over points with |psi| > 1e-8
double agreement_gap(const MappedState& state, const Simulation& sim, double t, int n_radial) {
  const int n_phi = 64;  // must exceed 2|l| for the spectral phi derivative
  PolarSamples ps = mapped_samples(state, t, n_radial, n_phi);
  const CurrentField direct = current_direct(ps, sim.target, t);
  const auto* src = dynamic_cast<const LandauSource*>(&state.reference());
  REQUIRE(src != nullptr);
  const CurrentField transf =
      current_transformed(src->reference(), state.trajectory(), t, direct.rho, direct.wrho,
                          n_phi);
  double max_diff = 0.0, max_j = 0.0;
  for (std::size_t i = 0; i < direct.j_rho.size(); ++i) {
    max_j = std::max({max_j, std::fabs(direct.j_rho[i]), std::fabs(direct.j_phi[i])});
    if (std::abs(ps.values[i]) < 1e-8) continue;
    max_diff = std::max({max_diff, std::fabs(direct.j_rho[i] - transf.j_rho[i]),
                         std::fabs(direct.j_phi[i] - transf.j_phi[i])});
  }
  return max_diff / max_j;
}

}  // namespace

TEST_CASE("stationary Landau current: no radial flow, axisymmetric azimuthal flow") {
  Scenario s = stationary_preset();
  s.l = 3;
  Simulation sim = build_simulation(s);
  PolarSamples ps = mapped_samples(sim.state, 1.0, 2048, 16);
  CurrentField j = current_direct(ps, sim.target, 1.0);
  double max_jrho = 0.0, max_asym = 0.0, max_jphi = 0.0;
  for (std::size_t i = 0; i < ps.rho.size(); ++i) {
    for (int k = 0; k < ps.n_phi; ++k) {
      max_jrho = std::max(max_jrho, std::fabs(j.j_rho[i * ps.n_phi + k]));
      max_asym =
          std::max(max_asym, std::fabs(j.j_phi[i * ps.n_phi + k] - j.j_phi[i * ps.n_phi]));
      max_jphi = std::max(max_jphi, std::fabs(j.j_phi[i * ps.n_phi + k]));
    }
  }
  CHECK(max_jrho < 1e-12 * max_jphi + 1e-15);
  CHECK(max_asym < 1e-12 * max_jphi + 1e-15);
}

TEST_CASE("l = 0 ground state: only the diamagnetic term survives") {
  Scenario s = stationary_preset();
  Simulation sim = build_simulation(s);
  PolarSamples ps = mapped_samples(sim.state, 0.5, 1024, 16);
  CurrentField j = current_direct(ps, sim.target, 0.5);
  const double om = sim.target.omega(0.5);
  for (std::size_t i = 0; i < ps.rho.size(); i += 37) {
    const double expected = om * ps.rho[i] * std::norm(ps.values[i * ps.n_phi]);
    CHECK(j.j_phi[i * ps.n_phi] == doctest::Approx(expected).epsilon(1e-8));
    CHECK(j.j_phi[i * ps.n_phi] >= 0.0);
  }
}

TEST_CASE("radial flux through a circle balances the enclosed probability") {
  Scenario sc = selfmap_preset();
  sc.segments[0].duration = 4.0 * kPi;
  Simulation sim = build_simulation(sc);
  const double t = 0.9;  // envelope breathing, nonzero j_rho
  const int n_radial = 4096, n_phi = 64;
  PolarSamples ps = mapped_samples(sim.state, t, n_radial, n_phi);
  CurrentField j = current_direct(ps, sim.target, t);

  const double dt = 1e-5;
  PolarSamples fwd = mapped_samples(sim.state, t + dt, n_radial, n_phi);
  PolarSamples bwd = mapped_samples(sim.state, t - dt, n_radial, n_phi);

  // pick the ring at ~60% of the box
  const std::size_t ring = (ps.rho.size() * 3) / 5;
  const double radius = ps.rho[ring];
  const double flux = 2.0 * kPi * radius * j.j_rho[ring * n_phi];  // axisymmetric
  double dprob = 0.0;
  for (std::size_t i = 0; i <= ring; ++i) {
    dprob += ps.wrho[i] * ps.rho[i] * 2.0 * kPi *
             (std::norm(fwd.values[i * n_phi]) - std::norm(bwd.values[i * n_phi])) /
             (2.0 * dt);
  }
  CHECK(std::fabs(flux + dprob) < 1e-6);
}

TEST_CASE("direct and transformed currents agree pointwise") {
  SUBCASE("undamped self-map") {
    Scenario s = selfmap_preset();
    s.segments[0].duration = 4.0 * kPi;
    Simulation sim = build_simulation(s);
    CHECK(agreement_gap(sim.state, sim, 1.1, 8192) < 1e-8);
  }
  SUBCASE("damped scenario") {
    Scenario s = damped_preset();
    Simulation sim = build_simulation(s);
    CHECK(agreement_gap(sim.state, sim, 4.0, 8192) < 1e-6);
  }
}

TEST_CASE("transformed current reduces to the reference current at b = 1") {
  Scenario s = stationary_preset();
  s.l = 4;
  Simulation sim = build_simulation(s);
  const auto* src = dynamic_cast<const LandauSource*>(&sim.state.reference());
  const LandauState& st = src->reference().components().front().second;
  const int n_phi = 16;
  std::vector<double> rho = {0.7, 1.4, 2.2, 3.1};
  std::vector<double> wr(rho.size(), 1.0);
  CurrentField j2 = current_transformed(src->reference(), *sim.trajectory, 1.3, rho, wr, n_phi);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double r = st.radial(rho[i]);
    const double j1_phi = (st.l / rho[i]) * r * r + rho[i] * r * r;
    CHECK(j2.j_rho[i * n_phi] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(j2.j_phi[i * n_phi] == doctest::Approx(j1_phi).epsilon(1e-9));
  }
}

TEST_CASE("current is not invariant under the map") {
  Scenario s = selfmap_preset();
  s.segments[0].duration = 4.0 * kPi;
  Simulation sim = build_simulation(s);
  const double t = kPi / 2.0;  // quarter period: b at its 1.25 turning point
  const double b = sim.trajectory->b(t);
  CHECK(b == doctest::Approx(1.25).epsilon(1e-6));

  const auto* src = dynamic_cast<const LandauSource*>(&sim.state.reference());
  const LandauState& st = src->reference().components().front().second;
  const int n_phi = 8;
  std::vector<double> rho = {0.5, 1.0, 2.0, 3.0};
  std::vector<double> wr(rho.size(), 1.0);
  CurrentField j2 = current_transformed(src->reference(), *sim.trajectory, t, rho, wr, n_phi);
  double rel_dev = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    // reference current of the stationary state at the same point
    const double r = st.radial(rho[i]);
    const double j1_phi = (st.l / rho[i]) * r * r + rho[i] * r * r;
    rel_dev = std::max(rel_dev, std::fabs(j2.j_phi[i * n_phi] - j1_phi) /
                                    std::max(std::fabs(j1_phi), 1e-12));
  }
  CHECK(rel_dev > 0.1);  // clearly not invariant at b != 1
}

TEST_CASE("gauge potential") {
  Scenario s = selfmap_preset();
  s.segments[0].duration = 4.0 * kPi;
  Simulation sim = build_simulation(s);

  SUBCASE("vanishes where b' = 0") {
    auto g = gauge_potential(*sim.trajectory, 0.0, {1.0, 2.0});
    CHECK(std::fabs(g[0]) < 1e-10);
    CHECK(std::fabs(g[1]) < 1e-10);
  }
  SUBCASE("linear in r1 with coefficient m b'/b for w = 1") {
    const double t = 0.6;
    const double c = sim.trajectory->bdot(t) / sim.trajectory->b(t);
    auto g = gauge_potential(*sim.trajectory, t, {2.0, -1.0});
    CHECK(g[0] == doctest::Approx(2.0 * c).epsilon(1e-10));
    CHECK(g[1] == doctest::Approx(-1.0 * c).epsilon(1e-10));
    auto g2 = gauge_potential(*sim.trajectory, t, {4.0, -2.0});
    CHECK(g2[0] == doctest::Approx(2.0 * g[0]).epsilon(1e-12));
  }
}

TEST_CASE("continuity residual of the mapped state") {
  Scenario s = fig2_preset();
  Simulation sim = build_simulation(s);
  const RadialGrid grid = RadialGrid::half_offset(sim.state.support_radius(), 2048);
  const double t = 0.45 * s.duration();  // inside lens 1
  CHECK(continuity_residual(sim.state, sim.target, grid, 16, t) < 1e-4);
}

TEST_CASE("current CSV serialization") {
  CurrentField f;
  f.rho = {0.5, 1.0};
  f.wrho = {0.5, 0.5};
  f.n_phi = 2;
  f.j_rho = {0.0, 0.25, -0.5, 1.0};
  f.j_phi = {1.0, 2.0, 3.0, 4.0};
  const std::string path = "/tmp/twistmap_test_current.csv";
  write_current_csv(f, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "rho,phi,j_rho,j_phi");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}
