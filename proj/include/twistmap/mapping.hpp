#pragma once

#include <memory>
#include <vector>

#include "twistmap/fields.hpp"
#include "twistmap/grid.hpp"
#include "twistmap/ode.hpp"
#include "twistmap/states.hpp"

namespace twistmap {

// ---------------------------------------------------------------------------
// Reference input of the 2D Ermakov map: a set of angular sectors with
// time-dependent radial profiles.  Landau superpositions implement this, and
// so does MappedState itself, which is what makes map compositions possible.
// ---------------------------------------------------------------------------

class SectorSource {
 public:
  virtual ~SectorSource() = default;
  virtual std::vector<int> sectors() const = 0;
  // radial part of sector l at time t (e^{i l phi} excluded)
  virtual Complex sector_value(int l, double rho, double t) const = 0;
  virtual Complex sector_radial_derivative(int l, double rho, double t) const = 0;
  virtual double mass() const = 0;
  virtual double support_radius(double b_max) const = 0;

  Complex evaluate(double rho, double phi, double t) const;
};

class LandauSource : public SectorSource {
 public:
  explicit LandauSource(ReferenceState ref) : ref_(std::move(ref)) {}
  std::vector<int> sectors() const override { return ref_.sectors(); }
  Complex sector_value(int l, double rho, double t) const override {
    return ref_.sector_value(l, rho, t);
  }
  Complex sector_radial_derivative(int l, double rho, double t) const override {
    return ref_.sector_radial_derivative(l, rho, t);
  }
  double mass() const override { return ref_.mass(); }
  double support_radius(double b_max) const override { return ref_.support_radius(b_max); }
  const ReferenceState& reference() const { return ref_; }

 private:
  ReferenceState ref_;
};

// ---------------------------------------------------------------------------
// Evolving state produced by the 2D Ermakov map applied to a reference:
//
//   psi2(rho, phi, t2) = (1/b) psi1(rho/b, phi, t1(t2))
//                        * exp[ (i/2)(m/w2)(b'/b) rho^2 ]
//                        * exp[ -i l int omega2 dt2 + i l int omega1 dt1 ]
//
// Superpositions are mapped sector by sector (the phase carries l
// explicitly) and summed.  t1, and both phase integrals, come from the
// trajectory accumulators, never from local re-integration.
// ---------------------------------------------------------------------------

class MappedState : public SectorSource {
 public:
  MappedState(std::shared_ptr<const SectorSource> reference,
              std::shared_ptr<const ErmakovTrajectory> trajectory);

  Complex sector_value(int l, double rho, double t2) const override;
  Complex sector_radial_derivative(int l, double rho, double t2) const override;
  std::vector<int> sectors() const override { return reference_->sectors(); }
  double mass() const override { return reference_->mass(); }
  double support_radius(double b_max) const override;
  double support_radius() const { return support_radius(1.0); }

  const ErmakovTrajectory& trajectory() const { return *trajectory_; }
  const FieldProfile& target() const { return trajectory_->target(); }
  const SectorSource& reference() const { return *reference_; }
  std::shared_ptr<const SectorSource> reference_ptr() const { return reference_; }
  std::shared_ptr<const ErmakovTrajectory> trajectory_ptr() const { return trajectory_; }

  double norm_quadrature(double t2, int order = 400) const;

 private:
  std::shared_ptr<const SectorSource> reference_;
  std::shared_ptr<const ErmakovTrajectory> trajectory_;
};

MappedState map_state(const ReferenceState& reference, const ErmakovTrajectory& trajectory,
                      const FieldProfile& target);
MappedState map_state(std::shared_ptr<const SectorSource> reference,
                      std::shared_ptr<const ErmakovTrajectory> trajectory);

// ---------------------------------------------------------------------------
// 1D QAT: map a time slice of an oscillator-system wavefunction psi(x, t)
// onto the free-particle frame,
//   kappa = x/u2,  tau = -u1/u2,
//   phi(kappa, tau) = psi(x, t) sqrt(u2) exp[-(i/2)(m/w)(u2'/u2) x^2].
// Local in time: valid on a branch where u2 > 0.
// ---------------------------------------------------------------------------

struct Sampled1d {
  double t = 0.0;
  std::vector<double> x;
  std::vector<Complex> values;
  double norm2() const;  // trapezoidal int |psi|^2 dx
};

Sampled1d qat_map_1d(const Sampled1d& psi, const LinearPair& pair);

// ---------------------------------------------------------------------------
// Action of the momentum operator on a mapped state, assembled from
// reference-frame derivatives:
//   p2 psi2 = chi [ (1/b^2) p1 psi1 + (m/w2)(b'/b) r1 psi1 ].
// ---------------------------------------------------------------------------

struct VectorSamples {
  std::vector<double> rho;
  std::vector<double> wrho;
  int n_phi = 0;
  std::vector<Complex> x;  // [i_rho * n_phi + k_phi]
  std::vector<Complex> y;

  double phi(int k) const { return 2.0 * kPi * k / n_phi; }
};

VectorSamples momentum_action(const MappedState& state, const PolarSamples& samples, double t2);

// ---------------------------------------------------------------------------
// || i dpsi/dt - H(t) psi ||_2 / ||psi||_2 for one angular sector, with the
// CK Hamiltonian discretized by 4th-order differences in rho and the time
// derivative by 2nd-order central differences.
// ---------------------------------------------------------------------------

struct ResidualResult {
  double value = 0.0;
  bool under_resolved = false;
};

ResidualResult schrodinger_residual(const SectorEvaluator& psi, int l,
                                    const FieldProfile& profile, const RadialGrid& grid,
                                    double t2);
ResidualResult schrodinger_residual(const MappedState& state, const FieldProfile& profile,
                                    const RadialGrid& grid, double t2);

// CK Hamiltonian applied to sector samples (4th-order differences); shared by
// the residual and the eigenstate checks.
std::vector<Complex> apply_sector_hamiltonian(const std::vector<Complex>& u,
                                              const RadialGrid& grid, int l,
                                              const FieldProfile& profile, double t,
                                              const std::function<Complex(double)>& outer = nullptr);

}  // namespace twistmap
