#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "twistmap/common.hpp"
#include "twistmap/fields.hpp"

namespace twistmap {

// ---------------------------------------------------------------------------
// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with the standard
// quartic dense-output interpolant.  The problems here are smooth and
// non-stiff; phase and time accumulators ride along as extra state so the
// error control covers them too.
// ---------------------------------------------------------------------------

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;
using StepMonitor = std::function<void(double t, std::span<const double> y)>;

struct IntegrateOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double max_step = 0.0;     // 0 = unbounded
  double initial_step = 0.0; // 0 = automatic
  long max_steps = 20000000;
};

class DenseSolution {
 public:
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  std::size_t dimension() const { return dim_; }
  std::size_t step_count() const { return steps_.size(); }

  void evaluate(double t, std::span<double> out) const;
  double component(double t, std::size_t i) const;
  // time derivative of the interpolating polynomial for component i
  double derivative(double t, std::size_t i) const;

 private:
  struct Step {
    double t0;
    double h;
    std::vector<double> cont;  // 5 * dim interpolation coefficients
  };
  const Step& locate(double t) const;

  std::vector<Step> steps_;
  std::size_t dim_ = 0;
  double t_begin_ = 0.0;
  double t_end_ = 0.0;

  friend DenseSolution integrate_ode(const OdeRhs&, std::span<const double>, double, double,
                                     const IntegrateOptions&, const StepMonitor&);
};

DenseSolution integrate_ode(const OdeRhs& rhs, std::span<const double> y0, double t0, double t1,
                            const IntegrateOptions& options = {},
                            const StepMonitor& monitor = nullptr);

// Extremum of one solution component over [a, b] (golden-section refined).
double component_max(const DenseSolution& sol, std::size_t i, double a, double b);
double component_min(const DenseSolution& sol, std::size_t i, double a, double b);

// ---------------------------------------------------------------------------
// Classical solution pair of  u'' + gamma(t) u' + omega^2(t) u = 0.
// The Wronskian u1 u2' - u2 u1' equals W(0) exp(-int gamma dt).
// ---------------------------------------------------------------------------

struct PairInitialConditions {
  double u1 = 1.0;
  double du1 = 0.0;
  double u2 = 0.0;
  double du2 = 1.0;  // default du2 = w(0) = 1
};

class LinearPair {
 public:
  LinearPair(FieldProfile profile, DenseSolution sol, PairInitialConditions ic)
      : profile_(std::move(profile)), sol_(std::move(sol)), ic_(ic) {}

  double u1(double t) const { return sol_.component(t, 0); }
  double du1(double t) const { return sol_.component(t, 1); }
  double u2(double t) const { return sol_.component(t, 2); }
  double du2(double t) const { return sol_.component(t, 3); }
  double wronskian(double t) const { return u1(t) * du2(t) - u2(t) * du1(t); }

  double t_begin() const { return sol_.t_begin(); }
  double t_end() const { return sol_.t_end(); }
  const FieldProfile& profile() const { return profile_; }
  const PairInitialConditions& initial_conditions() const { return ic_; }

 private:
  FieldProfile profile_;
  DenseSolution sol_;
  PairInitialConditions ic_;
};

LinearPair integrate_linear_pair(const FieldProfile& profile, double t_begin, double t_end,
                                 double tol,
                                 std::optional<PairInitialConditions> ic = std::nullopt);

// ---------------------------------------------------------------------------
// Scaling-parameter trajectory: the damped Ermakov-Pinney equation
//
//   b'' + gamma2(t2) b' + omega2^2(t2) b = (w2^2/w1^2) omega1^2(t1) / b^3
//
// integrated together with the reference-time and phase accumulators
//   tau1' = w2 / (w1(tau1) b^2),  phi1' = omega1(tau1) tau1',  phi2' = omega2(t2).
// ---------------------------------------------------------------------------

class ErmakovTrajectory {
 public:
  ErmakovTrajectory(FieldProfile reference, FieldProfile target, DenseSolution sol)
      : reference_(std::move(reference)), target_(std::move(target)), sol_(std::move(sol)) {}

  double b(double t2) const { return scale_ * sol_.component(t2, 0); }
  double bdot(double t2) const { return scale_ * sol_.component(t2, 1); }
  double tau1(double t2) const { return sol_.component(t2, 2); }
  double phi1(double t2) const { return sol_.component(t2, 3); }
  double phi2(double t2) const { return sol_.component(t2, 4); }

  // b'' from the equation itself (not from differencing the interpolant)
  double bddot(double t2) const;
  // d^3(b^2)/dt^3 by analytic differentiation of the equation
  double b2_third_derivative(double t2) const;
  // (1/2)[b^2 + (b'/omega0)^2 + 1/b^2] with the reference omega0
  double first_integral_at(double t2) const;

  // derivative of the b' interpolant; independent estimate of b'' for tests
  double bdot_interpolant_derivative(double t2) const { return sol_.derivative(t2, 1); }

  double b_max() const;
  double b_min() const;
  double b_max_on(double a, double c) const { return scale_ * component_max(sol_, 0, a, c); }
  double b_min_on(double a, double c) const { return scale_ * component_min(sol_, 0, a, c); }

  double t_begin() const { return sol_.t_begin(); }
  double t_end() const { return sol_.t_end(); }
  const FieldProfile& reference() const { return reference_; }
  const FieldProfile& target() const { return target_; }
  const DenseSolution& solution() const { return sol_; }

  // copy with b and b' multiplied by a constant: deliberately NOT a solution
  // of the envelope equation any more; negative-control input
  ErmakovTrajectory with_envelope_scale(double factor) const {
    ErmakovTrajectory t = *this;
    t.scale_ *= factor;
    return t;
  }
  double envelope_scale() const { return scale_; }

 private:
  FieldProfile reference_;
  FieldProfile target_;
  DenseSolution sol_;
  double scale_ = 1.0;
};

ErmakovTrajectory integrate_ermakov(const FieldProfile& reference, const FieldProfile& target,
                                    double b0, double bdot0, double t_begin, double t_end,
                                    double tol, double b_floor = 1e-6);

// (1/2)[b^2 + (bdot/omega0)^2 + 1/b^2]
double first_integral(double b, double bdot, double omega0);

// ---------------------------------------------------------------------------
// Envelope from the ratio of second pair solutions, b(t2) = u2_tgt(t2) /
// u2_ref(t1(t2)), with the time coupling t1(t2) solved self-consistently.
// This is the independent construction used to cross-check integrate_ermakov.
//
// Marching the coupling as an ODE is unstable through QAT caustics (zeros of
// u2), so t1 is instead pinned pointwise by the matched free-particle clock,
//   F(t1, t2) = u1_ref(t1) u2_tgt(t2) - u2_ref(t1) u1_tgt(t2) = 0,
// which is regular there (dF/dt1 = -W1 b != 0), and b comes from the
// equally regular cross-Wronskian identity
//   b = -W2(t2) / [u2_ref(t1) du1_tgt(t2) - u1_ref(t1) du2_tgt(t2)].
// The literal ratio is kept as ratio_b() and is undefined near the caustics.
// Both pairs must define the same free time at the start (F = 0 at t = 0).
// ---------------------------------------------------------------------------

class PairRatioEnvelope {
 public:
  PairRatioEnvelope(LinearPair ref, LinearPair target, std::vector<double> t2_nodes,
                    std::vector<double> t1_nodes, double dead_band);

  double b(double t2) const;
  double bdot(double t2) const;
  double tau1(double t2) const;
  // the u2 ratio itself; throws LocalityError inside a caustic dead zone
  double ratio_b(double t2) const;
  bool valid_at(double t2) const;

  double t_begin() const { return t2_nodes_.front(); }
  double t_end() const { return t2_nodes_.back(); }

 private:
  double solve_t1(double t2) const;

  LinearPair ref_;
  LinearPair target_;
  std::vector<double> t2_nodes_;
  std::vector<double> t1_nodes_;
  double dead_band_;  // |u2| below this fraction of its span maximum is a dead zone
  double ref_scale_ = 1.0;
  double target_scale_ = 1.0;
};

PairRatioEnvelope ermakov_via_pair_ratio(const LinearPair& ref_pair,
                                         const LinearPair& target_pair);

}  // namespace twistmap
