#pragma once

#include <vector>

#include "twistmap/common.hpp"

namespace twistmap {

// Time profile of the axial magnetic field seen by the transverse problem.
//
// The field enters through omega(t) = |e| B(t) / (2 m); we store the
// dimensionless plateau F = omega^2/omega0^2 per segment and smooth the
// segment edges with a tanh ramp so that omega(t) is continuous and the
// grid solver does not see a hard step.  Linear dissipation is described
// by gamma(t) with the same segmentation; the dissipation factor is
// w(t) = exp(-int_0^t gamma).

enum class SegmentKind { free_space, solenoid, damped };

struct Segment {
  SegmentKind kind = SegmentKind::free_space;
  double duration = 0.0;
  double f = 0.0;      // plateau value of omega^2(t)/omega0^2
  double gamma = 0.0;  // damping rate, 1/time
};

class FieldProfile {
 public:
  FieldProfile(std::vector<Segment> segments, double ramp, double omega0, double mass);

  // Uniform reference fields over [0, duration].
  static FieldProfile landau(double omega0, double mass, double duration);
  static FieldProfile free_space(double omega0, double mass, double duration);

  double omega0() const { return omega0_; }
  double mass() const { return mass_; }
  double ramp() const { return ramp_; }
  double duration() const { return duration_; }
  const std::vector<Segment>& segments() const { return segments_; }

  double f_value(double t) const;      // F(t)
  double omega(double t) const;        // omega0 * sqrt(F)
  double omega2(double t) const;       // omega^2 = omega0^2 F; smooth even where F=0
  double domega2_dt(double t) const;
  double gamma(double t) const;
  double dgamma_dt(double t) const;
  double gamma_integral(double t) const;  // int_0^t gamma dt'
  double dissipation(double t) const;     // w(t)
  double b_field(double t) const;         // B(t) = 2 m omega(t), |e| = 1

  bool has_dissipation() const { return dissipative_; }

 private:
  void check_range(double t) const;

  std::vector<Segment> segments_;
  double ramp_;
  double omega0_;
  double mass_;
  double duration_;
  bool dissipative_ = false;
  // transition times between consecutive segments and the plateau jumps
  std::vector<double> edges_;
  std::vector<double> df_;
  std::vector<double> dgamma_;
  double f0_ = 0.0;
  double gamma0_ = 0.0;
};

// Five-segment profile (free, solenoid, free, solenoid, free) shaped like the
// two-lens transport line: an expanding packet, a first lens, a drift, a
// second capture lens and a tail.
struct LensParams {
  double length = 0.0;
  double f = 1.0;
};

FieldProfile build_fig2_profile(LensParams lens1, double drift, LensParams lens2, double tail,
                                double lead = 0.3, double ramp = 0.05, double omega0 = 1.0,
                                double mass = 1.0);

}  // namespace twistmap
