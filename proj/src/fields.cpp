#include "twistmap/fields.hpp"

#include <cmath>
#include <string>

namespace twistmap {

namespace {

// Smooth unit step (1 + tanh x)/2 and friends.  For ramp = 0 the limits are
// the hard step, its (suppressed) derivative, and the piecewise-linear
// integral.
double smooth_step(double x) { return 0.5 * (1.0 + std::tanh(x)); }
double smooth_step_derivative(double x) {
  const double th = std::tanh(x);
  return 0.5 * (1.0 - th * th);
}
// log cosh(x) without overflow
double log_cosh(double x) {
  const double ax = std::fabs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
}
// antiderivative of smooth_step: d/dx [(x + log cosh x)/2] = smooth_step(x)
double smooth_step_integral(double x) { return 0.5 * (x + log_cosh(x)); }

}  // namespace

FieldProfile::FieldProfile(std::vector<Segment> segments, double ramp, double omega0, double mass)
    : segments_(std::move(segments)), ramp_(ramp), omega0_(omega0), mass_(mass) {
  if (segments_.empty()) throw ConfigError("profile needs at least one segment");
  if (!(ramp_ >= 0.0)) throw ConfigError("ramp must be >= 0");
  if (!(omega0_ > 0.0)) throw ConfigError("omega0 must be > 0");
  if (!(mass_ > 0.0)) throw ConfigError("mass must be > 0");
  duration_ = 0.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    Segment& s = segments_[i];
    const std::string where = "segment " + std::to_string(i + 1);
    if (!(s.duration > 0.0)) throw ConfigError(where + ": duration must be > 0");
    if (!(s.f >= 0.0)) throw ConfigError(where + ": F must be >= 0");
    if (!(s.gamma >= 0.0)) throw ConfigError(where + ": gamma must be >= 0");
    switch (s.kind) {
      case SegmentKind::free_space:
        if (s.f != 0.0) throw ConfigError(where + ": free segment must have F = 0");
        if (s.gamma != 0.0) throw ConfigError(where + ": free segment must have gamma = 0");
        break;
      case SegmentKind::solenoid:
        if (s.gamma != 0.0) throw ConfigError(where + ": solenoid segment must have gamma = 0");
        break;
      case SegmentKind::damped:
        break;
    }
    if (s.gamma > 0.0) dissipative_ = true;
    duration_ += s.duration;
  }
  f0_ = segments_.front().f;
  gamma0_ = segments_.front().gamma;
  double edge = 0.0;
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
    edge += segments_[i].duration;
    edges_.push_back(edge);
    df_.push_back(segments_[i + 1].f - segments_[i].f);
    dgamma_.push_back(segments_[i + 1].gamma - segments_[i].gamma);
  }
}

FieldProfile FieldProfile::landau(double omega0, double mass, double duration) {
  return FieldProfile({{SegmentKind::solenoid, duration, 1.0, 0.0}}, 0.0, omega0, mass);
}

FieldProfile FieldProfile::free_space(double omega0, double mass, double duration) {
  return FieldProfile({{SegmentKind::free_space, duration, 0.0, 0.0}}, 0.0, omega0, mass);
}

void FieldProfile::check_range(double t) const {
  const double slack = 1e-9 * std::max(1.0, duration_);
  if (t < -slack || t > duration_ + slack)
    throw RangeError("time " + std::to_string(t) + " outside profile span [0, " +
                     std::to_string(duration_) + "]");
}

double FieldProfile::f_value(double t) const {
  check_range(t);
  double f = f0_;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (df_[k] == 0.0) continue;
    f += df_[k] * (ramp_ > 0.0 ? smooth_step((t - edges_[k]) / ramp_)
                               : (t > edges_[k] ? 1.0 : (t < edges_[k] ? 0.0 : 0.5)));
  }
  return std::max(f, 0.0);
}

double FieldProfile::omega(double t) const { return omega0_ * std::sqrt(f_value(t)); }

double FieldProfile::omega2(double t) const { return omega0_ * omega0_ * f_value(t); }

double FieldProfile::domega2_dt(double t) const {
  check_range(t);
  if (ramp_ <= 0.0) return 0.0;
  double dfdt = 0.0;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (df_[k] == 0.0) continue;
    dfdt += df_[k] * smooth_step_derivative((t - edges_[k]) / ramp_) / ramp_;
  }
  return omega0_ * omega0_ * dfdt;
}

double FieldProfile::gamma(double t) const {
  check_range(t);
  double g = gamma0_;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (dgamma_[k] == 0.0) continue;
    g += dgamma_[k] * (ramp_ > 0.0 ? smooth_step((t - edges_[k]) / ramp_)
                                   : (t > edges_[k] ? 1.0 : (t < edges_[k] ? 0.0 : 0.5)));
  }
  return std::max(g, 0.0);
}

double FieldProfile::dgamma_dt(double t) const {
  check_range(t);
  if (ramp_ <= 0.0) return 0.0;
  double dg = 0.0;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (dgamma_[k] == 0.0) continue;
    dg += dgamma_[k] * smooth_step_derivative((t - edges_[k]) / ramp_) / ramp_;
  }
  return dg;
}

double FieldProfile::gamma_integral(double t) const {
  check_range(t);
  double integral = gamma0_ * t;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (dgamma_[k] == 0.0) continue;
    if (ramp_ > 0.0) {
      integral += dgamma_[k] * ramp_ *
                  (smooth_step_integral((t - edges_[k]) / ramp_) -
                   smooth_step_integral((0.0 - edges_[k]) / ramp_));
    } else {
      integral += dgamma_[k] * std::max(t - edges_[k], 0.0);
    }
  }
  return integral;
}

double FieldProfile::dissipation(double t) const { return std::exp(-gamma_integral(t)); }

double FieldProfile::b_field(double t) const { return 2.0 * mass_ * omega(t); }

FieldProfile build_fig2_profile(LensParams lens1, double drift, LensParams lens2, double tail,
                                double lead, double ramp, double omega0, double mass) {
  std::vector<Segment> segs = {
      {SegmentKind::free_space, lead, 0.0, 0.0},
      {SegmentKind::solenoid, lens1.length, lens1.f, 0.0},
      {SegmentKind::free_space, drift, 0.0, 0.0},
      {SegmentKind::solenoid, lens2.length, lens2.f, 0.0},
      {SegmentKind::free_space, tail, 0.0, 0.0},
  };
  return FieldProfile(std::move(segs), ramp, omega0, mass);
}

}  // namespace twistmap
