#include "twistmap/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace twistmap {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double kC2 = 1.0 / 5.0, kC3 = 3.0 / 10.0, kC4 = 4.0 / 5.0, kC5 = 8.0 / 9.0;
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0, kA53 = 64448.0 / 6561.0,
                 kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kA71 = 35.0 / 384.0, kA73 = 500.0 / 1113.0, kA74 = 125.0 / 192.0,
                 kA75 = -2187.0 / 6784.0, kA76 = 11.0 / 84.0;
// embedded error weights (5th order minus 4th order solution)
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                 kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;
// dense-output weights
constexpr double kD1 = -12715105075.0 / 11282082432.0;
constexpr double kD3 = 87487479700.0 / 32700410799.0;
constexpr double kD4 = -10690763975.0 / 1880347072.0;
constexpr double kD5 = 701980252875.0 / 199316789632.0;
constexpr double kD6 = -1453857185.0 / 822651844.0;
constexpr double kD7 = 69997945.0 / 29380423.0;

bool finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void DenseSolution::evaluate(double t, std::span<double> out) const {
  const Step& s = locate(t);
  const double theta = (t - s.t0) / s.h;
  const double theta1 = 1.0 - theta;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double* c = s.cont.data() + 5 * i;
    out[i] = c[0] + theta * (c[1] + theta1 * (c[2] + theta * (c[3] + theta1 * c[4])));
  }
}

double DenseSolution::component(double t, std::size_t i) const {
  const Step& s = locate(t);
  const double theta = (t - s.t0) / s.h;
  const double theta1 = 1.0 - theta;
  const double* c = s.cont.data() + 5 * i;
  return c[0] + theta * (c[1] + theta1 * (c[2] + theta * (c[3] + theta1 * c[4])));
}

double DenseSolution::derivative(double t, std::size_t i) const {
  const Step& s = locate(t);
  const double theta = (t - s.t0) / s.h;
  const double* c = s.cont.data() + 5 * i;
  // d/dtheta of c1 + c2 th + c3 th(1-th) + c4 th^2(1-th) + c5 th^2(1-th)^2
  const double d = c[1] + c[2] * (1.0 - 2.0 * theta) + c[3] * theta * (2.0 - 3.0 * theta) +
                   c[4] * 2.0 * theta * (1.0 - theta) * (1.0 - 2.0 * theta);
  return d / s.h;
}

const DenseSolution::Step& DenseSolution::locate(double t) const {
  const double slack = 1e-9 * std::max(1.0, std::fabs(t_end_ - t_begin_));
  if (t < t_begin_ - slack || t > t_end_ + slack)
    throw RangeError("dense output queried at t = " + std::to_string(t) + " outside [" +
                     std::to_string(t_begin_) + ", " + std::to_string(t_end_) + "]");
  auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                             [](double v, const Step& s) { return v < s.t0; });
  if (it != steps_.begin()) --it;
  return *it;
}

DenseSolution integrate_ode(const OdeRhs& rhs, std::span<const double> y0, double t0, double t1,
                            const IntegrateOptions& options, const StepMonitor& monitor) {
  if (!(t1 > t0)) throw ConfigError("integration span must be forward in time");
  const std::size_t n = y0.size();
  DenseSolution sol;
  sol.dim_ = n;
  sol.t_begin_ = t0;
  sol.t_end_ = t0;

  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> ynew(n), ytmp(n), err(n);
  std::vector<std::vector<double>> k(7, std::vector<double>(n));

  double t = t0;
  rhs(t, y, k[0]);
  if (!finite(k[0])) throw IntegratorError("right-hand side not finite at start", t);

  const double span = t1 - t0;
  const double hmax = options.max_step > 0.0 ? std::min(options.max_step, span) : span;
  double h = options.initial_step;
  if (h <= 0.0) {
    // crude automatic start: limited by span, max_step and the initial slope
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = options.atol + options.rtol * std::fabs(y[i]);
      scale = std::max(scale, std::fabs(k[0][i]) / sc);
    }
    h = std::min({hmax, 1e-2 * span, scale > 0.0 ? 1e-2 / scale : hmax});
    h = std::max(h, 1e-12 * span);
  }
  h = std::min(h, hmax);

  const double expo = 0.2;  // 1/5
  bool last_rejected = false;

  for (long step = 0; step < options.max_steps; ++step) {
    if (t >= t1) break;
    h = std::min(h, t1 - t);
    if (h < 1e-14 * std::max(1.0, std::fabs(t)))
      throw IntegratorError("step size underflow", t);

    auto stage = [&](std::vector<double>& out, double c, auto&&... aw) {
      // out = y + h * sum(a_i * k_i)
      const double a[] = {static_cast<double>(aw)...};
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < sizeof...(aw); ++j) acc += a[j] * k[j][i];
        out[i] = y[i] + h * acc;
      }
      rhs(t + c * h, out, k[sizeof...(aw)]);
    };

    stage(ytmp, kC2, kA21);
    stage(ytmp, kC3, kA31, kA32);
    stage(ytmp, kC4, kA41, kA42, kA43);
    stage(ytmp, kC5, kA51, kA52, kA53, kA54);
    stage(ytmp, 1.0, kA61, kA62, kA63, kA64, kA65);
    // 5th-order solution (a7 row; FSAL)
    for (std::size_t i = 0; i < n; ++i) {
      ynew[i] = y[i] + h * (kA71 * k[0][i] + kA73 * k[2][i] + kA74 * k[3][i] + kA75 * k[4][i] +
                            kA76 * k[5][i]);
    }
    rhs(t + h, ynew, k[6]);

    double err_norm = 0.0;
    bool ok = finite(ynew) && finite(k[6]);
    if (ok) {
      for (std::size_t i = 0; i < n; ++i) {
        err[i] = h * (kE1 * k[0][i] + kE3 * k[2][i] + kE4 * k[3][i] + kE5 * k[4][i] +
                      kE6 * k[5][i] + kE7 * k[6][i]);
        const double sc =
            options.atol + options.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
        const double r = err[i] / sc;
        err_norm += r * r;
      }
      err_norm = std::sqrt(err_norm / static_cast<double>(n));
      ok = std::isfinite(err_norm);
    }

    if (!ok || err_norm > 1.0) {
      // reject
      const double factor =
          ok ? std::max(0.2, 0.9 * std::pow(err_norm, -expo)) : 0.2;
      h *= std::min(factor, 1.0);
      last_rejected = true;
      continue;
    }

    // accept: store dense coefficients
    DenseSolution::Step st;
    st.t0 = t;
    st.h = h;
    st.cont.resize(5 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ydiff = ynew[i] - y[i];
      const double bspl = h * k[0][i] - ydiff;
      double* c = st.cont.data() + 5 * i;
      c[0] = y[i];
      c[1] = ydiff;
      c[2] = bspl;
      c[3] = ydiff - h * k[6][i] - bspl;
      c[4] = h * (kD1 * k[0][i] + kD3 * k[2][i] + kD4 * k[3][i] + kD5 * k[4][i] +
                  kD6 * k[5][i] + kD7 * k[6][i]);
    }
    sol.steps_.push_back(std::move(st));

    t += h;
    sol.t_end_ = t;
    y.swap(ynew);
    k[0].swap(k[6]);  // FSAL
    if (monitor) monitor(t, y);

    double factor = 0.9 * std::pow(std::max(err_norm, 1e-10), -expo);
    factor = std::clamp(factor, 0.2, 5.0);
    if (last_rejected) factor = std::min(factor, 1.0);
    last_rejected = false;
    h = std::min(h * factor, hmax);
  }

  if (t < t1) throw IntegratorError("maximum step count exceeded", t);
  return sol;
}

namespace {

double refine_extremum(const DenseSolution& sol, std::size_t comp, double a, double b,
                       double sign) {
  // golden-section on [a, b]; assumes a single interior extremum
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = a, hi = b;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = sign * sol.component(x1, comp), f2 = sign * sol.component(x2, comp);
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, std::fabs(hi)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = sign * sol.component(x2, comp);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = sign * sol.component(x1, comp);
    }
  }
  return sign * sol.component(0.5 * (lo + hi), comp);
}

double component_extremum(const DenseSolution& sol, std::size_t i, double a, double b,
                          double sign) {
  const int samples = 4096;
  double best = -std::numeric_limits<double>::infinity();
  int best_j = 0;
  for (int j = 0; j <= samples; ++j) {
    const double t = a + (b - a) * j / samples;
    const double v = sign * sol.component(t, i);
    if (v > best) {
      best = v;
      best_j = j;
    }
  }
  const double dt = (b - a) / samples;
  const double lo = std::max(a, a + (best_j - 1) * dt);
  const double hi = std::min(b, a + (best_j + 1) * dt);
  return refine_extremum(sol, i, lo, hi, sign);
}

}  // namespace

double component_max(const DenseSolution& sol, std::size_t i, double a, double b) {
  return component_extremum(sol, i, a, b, 1.0);
}

double component_min(const DenseSolution& sol, std::size_t i, double a, double b) {
  return -component_extremum(sol, i, a, b, -1.0);
}

// ---------------------------------------------------------------------------

LinearPair integrate_linear_pair(const FieldProfile& profile, double t_begin, double t_end,
                                 double tol, std::optional<PairInitialConditions> ic_opt) {
  if (!(tol > 0.0)) throw ConfigError("tolerance must be > 0");
  PairInitialConditions ic = ic_opt.value_or(PairInitialConditions{});
  const double w0 = ic.u1 * ic.du2 - ic.u2 * ic.du1;
  if (w0 == 0.0) throw ConfigError("linear pair initial conditions must be independent");

  OdeRhs rhs = [&profile](double t, std::span<const double> y, std::span<double> dydt) {
    const double g = profile.gamma(t);
    const double o2 = profile.omega2(t);
    dydt[0] = y[1];
    dydt[1] = -g * y[1] - o2 * y[0];
    dydt[2] = y[3];
    dydt[3] = -g * y[3] - o2 * y[2];
  };
  const double y0[4] = {ic.u1, ic.du1, ic.u2, ic.du2};
  // internal safety factor: keeps dense-output residuals (which lose one
  // interpolation order) inside the advertised tolerance; ramps bound the
  // step so the interpolant resolves the edge forcing
  IntegrateOptions opts;
  opts.rtol = 0.2 * tol;
  opts.atol = 0.2 * tol;
  opts.max_step = 0.25 / profile.omega0();
  // ramp edges force h^4 * d5(forcing) below the dense-derivative budget
  if (profile.ramp() > 0.0) opts.max_step = std::min(opts.max_step, profile.ramp() / 25.0);
  DenseSolution sol = integrate_ode(rhs, y0, t_begin, t_end, opts);
  return LinearPair(profile, std::move(sol), ic);
}

// ---------------------------------------------------------------------------

namespace {

struct ErmakovRhs {
  const FieldProfile* ref;
  const FieldProfile* target;

  void operator()(double t2, std::span<const double> y, std::span<double> dydt) const {
    const double b = y[0];
    const double bdot = y[1];
    const double t1 = y[2];
    const double g2 = target->gamma(t2);
    const double w2 = target->dissipation(t2);
    const double om2sq = target->omega2(t2);
    const double w1 = ref->dissipation(t1);
    const double om1sq = ref->omega2(t1);
    const double wr = w2 / w1;
    const double invb2 = 1.0 / (b * b);
    dydt[0] = bdot;
    dydt[1] = -g2 * bdot - om2sq * b + wr * wr * om1sq * invb2 / b;
    dydt[2] = wr * invb2;                         // tau1
    dydt[3] = std::sqrt(om1sq) * dydt[2];         // phi1 = int omega1 dt1
    dydt[4] = std::sqrt(om2sq);                   // phi2 = int omega2 dt2
  }
};

}  // namespace

ErmakovTrajectory integrate_ermakov(const FieldProfile& reference, const FieldProfile& target,
                                    double b0, double bdot0, double t_begin, double t_end,
                                    double tol, double b_floor) {
  if (!(b0 > 0.0)) throw ConfigError("b0 must be > 0");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be > 0");
  ErmakovRhs rhs{&reference, &target};
  const double y0[5] = {b0, bdot0, 0.0, 0.0, 0.0};
  IntegrateOptions opts;
  opts.rtol = 0.2 * tol;
  opts.atol = 0.2 * tol;
  opts.max_step = 0.25 / std::max(reference.omega0(), target.omega0());
  // ramp edges force h^4 * d5(forcing) below the dense-derivative budget
  if (target.ramp() > 0.0) opts.max_step = std::min(opts.max_step, target.ramp() / 25.0);
  if (reference.ramp() > 0.0)
    opts.max_step = std::min(opts.max_step, reference.ramp() / 25.0);
  StepMonitor monitor = [b_floor](double t, std::span<const double> y) {
    if (y[0] < b_floor)
      throw SingularityError(
          "scaling parameter b = " + std::to_string(y[0]) + " fell below the floor " +
              std::to_string(b_floor) + " at t = " + std::to_string(t),
          t);
  };
  DenseSolution sol =
      integrate_ode([&rhs](double t, std::span<const double> y,
                           std::span<double> d) { rhs(t, y, d); },
                    y0, t_begin, t_end, opts, monitor);
  return ErmakovTrajectory(reference, target, std::move(sol));
}

double ErmakovTrajectory::bddot(double t2) const {
  ErmakovRhs rhs{&reference_, &target_};
  double y[5] = {b(t2), bdot(t2), tau1(t2), 0.0, 0.0};
  double d[5];
  rhs(t2, y, d);
  return d[1];
}

double ErmakovTrajectory::b2_third_derivative(double t2) const {
  // B = b^2: B''' = 6 b' b'' + 2 b b''' with b''' from differentiating the
  // equation of motion: b''' = -g2' b' - g2 b'' - (om2^2)' b - om2^2 b'
  //   + d/dt2[(w2/w1)^2 om1^2(t1)] / b^3 - 3 (w2/w1)^2 om1^2 b'/b^4.
  const double bv = b(t2);
  const double bd = bdot(t2);
  const double t1 = tau1(t2);
  const double g2 = target_.gamma(t2);
  const double w2 = target_.dissipation(t2);
  const double om2sq = target_.omega2(t2);
  const double w1 = reference_.dissipation(t1);
  const double om1sq = reference_.omega2(t1);
  const double g1 = reference_.gamma(t1);
  const double wr2 = (w2 / w1) * (w2 / w1);
  const double invb = 1.0 / bv;
  const double invb3 = invb * invb * invb;

  const double bdd = -g2 * bd - om2sq * bv + wr2 * om1sq * invb3;
  const double dt1 = (w2 / w1) * invb * invb;
  // d/dt2 of (w2/w1)^2 = (w2/w1)^2 * (-2 g2 + 2 g1 * dt1)
  const double dwr2 = wr2 * 2.0 * (g1 * dt1 - g2);
  const double dom1sq = reference_.domega2_dt(t1) * dt1;
  const double bddd = -target_.dgamma_dt(t2) * bd - g2 * bdd - target_.domega2_dt(t2) * bv -
                      om2sq * bd + (dwr2 * om1sq + wr2 * dom1sq) * invb3 -
                      3.0 * wr2 * om1sq * bd * invb3 * invb;
  return 6.0 * bd * bdd + 2.0 * bv * bddd;
}

double ErmakovTrajectory::first_integral_at(double t2) const {
  return first_integral(b(t2), bdot(t2), reference_.omega0());
}

double ErmakovTrajectory::b_max() const {
  return scale_ * component_max(sol_, 0, t_begin(), t_end());
}
double ErmakovTrajectory::b_min() const {
  return scale_ * component_min(sol_, 0, t_begin(), t_end());
}

double first_integral(double b, double bdot, double omega0) {
  if (!(b > 0.0)) throw ConfigError("first_integral requires b > 0");
  if (!(omega0 > 0.0)) throw ConfigError("first_integral requires omega0 > 0");
  const double r = bdot / omega0;
  return 0.5 * (b * b + r * r + 1.0 / (b * b));
}

// ---------------------------------------------------------------------------

namespace {

// cross-Wronskian F(t1, t2) = u1_ref(t1) u2_tgt(t2) - u2_ref(t1) u1_tgt(t2);
// zero exactly when the two free-particle clocks agree
double clock_mismatch(const LinearPair& ref, const LinearPair& tgt, double t1, double t2) {
  return ref.u1(t1) * tgt.u2(t2) - ref.u2(t1) * tgt.u1(t2);
}

double clock_mismatch_dt1(const LinearPair& ref, const LinearPair& tgt, double t1, double t2) {
  return ref.du1(t1) * tgt.u2(t2) - ref.du2(t1) * tgt.u1(t2);
}

double newton_t1(const LinearPair& ref, const LinearPair& tgt, double guess, double t2) {
  double t1 = std::clamp(guess, ref.t_begin(), ref.t_end());
  for (int it = 0; it < 60; ++it) {
    const double f = clock_mismatch(ref, tgt, t1, t2);
    const double df = clock_mismatch_dt1(ref, tgt, t1, t2);
    if (df == 0.0) break;
    const double step = f / df;
    t1 = std::clamp(t1 - step, ref.t_begin(), ref.t_end());
    if (std::fabs(step) < 1e-15 * std::max(1.0, std::fabs(t1))) return t1;
  }
  return t1;
}

}  // namespace

PairRatioEnvelope::PairRatioEnvelope(LinearPair ref, LinearPair target,
                                     std::vector<double> t2_nodes, std::vector<double> t1_nodes,
                                     double dead_band)
    : ref_(std::move(ref)),
      target_(std::move(target)),
      t2_nodes_(std::move(t2_nodes)),
      t1_nodes_(std::move(t1_nodes)),
      dead_band_(dead_band) {
  auto scan = [](const LinearPair& p) {
    double m = 0.0;
    for (int j = 0; j <= 2000; ++j) {
      const double t = p.t_begin() + (p.t_end() - p.t_begin()) * j / 2000.0;
      m = std::max(m, std::fabs(p.u2(t)));
    }
    return m;
  };
  ref_scale_ = scan(ref_);
  target_scale_ = scan(target_);
}

double PairRatioEnvelope::solve_t1(double t2) const {
  auto it = std::upper_bound(t2_nodes_.begin(), t2_nodes_.end(), t2);
  const std::size_t hi = std::min<std::size_t>(it - t2_nodes_.begin(), t2_nodes_.size() - 1);
  const std::size_t lo = hi > 0 ? hi - 1 : 0;
  double guess = t1_nodes_[lo];
  if (hi != lo) {
    const double f = (t2 - t2_nodes_[lo]) / (t2_nodes_[hi] - t2_nodes_[lo]);
    guess += f * (t1_nodes_[hi] - t1_nodes_[lo]);
  }
  return newton_t1(ref_, target_, guess, t2);
}

double PairRatioEnvelope::tau1(double t2) const { return solve_t1(t2); }

bool PairRatioEnvelope::valid_at(double t2) const {
  const double t1 = solve_t1(t2);
  return std::fabs(target_.u2(t2)) > dead_band_ * target_scale_ &&
         std::fabs(ref_.u2(t1)) > dead_band_ * ref_scale_;
}

double PairRatioEnvelope::ratio_b(double t2) const {
  if (!valid_at(t2))
    throw LocalityError("pair-ratio envelope undefined near a u2 zero at t2 = " +
                            std::to_string(t2),
                        t2);
  return target_.u2(t2) / ref_.u2(solve_t1(t2));
}

double PairRatioEnvelope::b(double t2) const {
  const double t1 = solve_t1(t2);
  const double num = ref_.u2(t1) * target_.du1(t2) - ref_.u1(t1) * target_.du2(t2);
  return -target_.wronskian(t2) / num;
}

double PairRatioEnvelope::bdot(double t2) const {
  const double t1 = solve_t1(t2);
  const double w2 = target_.wronskian(t2);
  const double w1 = ref_.wronskian(t1);
  const double g2 = target_.profile().gamma(t2);
  const double om2sq = target_.profile().omega2(t2);
  const double num = ref_.u2(t1) * target_.du1(t2) - ref_.u1(t1) * target_.du2(t2);
  const double bv = -w2 / num;
  const double dt1 = (w2 / w1) / (bv * bv);
  // d(num)/dt2, using u'' = -gamma u' - omega^2 u for both systems
  const double ddu1_t = -g2 * target_.du1(t2) - om2sq * target_.u1(t2);
  const double ddu2_t = -g2 * target_.du2(t2) - om2sq * target_.u2(t2);
  const double dnum = ref_.du2(t1) * dt1 * target_.du1(t2) + ref_.u2(t1) * ddu1_t -
                      ref_.du1(t1) * dt1 * target_.du2(t2) - ref_.u1(t1) * ddu2_t;
  const double dw2 = -g2 * w2;
  return -dw2 / num + w2 * dnum / (num * num);
}

PairRatioEnvelope ermakov_via_pair_ratio(const LinearPair& ref_pair,
                                         const LinearPair& target_pair) {
  if (ref_pair.u2(ref_pair.t_begin()) == 0.0)
    throw LocalityError("reference u2 vanishes at the start of the span; choose initial "
                        "conditions with u2(0) != 0",
                        ref_pair.t_begin());
  if (target_pair.u2(target_pair.t_begin()) == 0.0)
    throw LocalityError("target u2 vanishes at the start of the span; choose initial "
                        "conditions with u2(0) != 0",
                        target_pair.t_begin());
  const double f0 =
      clock_mismatch(ref_pair, target_pair, ref_pair.t_begin(), target_pair.t_begin());
  const double scale0 = std::fabs(ref_pair.u2(ref_pair.t_begin())) +
                        std::fabs(target_pair.u2(target_pair.t_begin()));
  if (std::fabs(f0) > 1e-9 * scale0)
    throw ConfigError("pair-ratio construction needs both pairs to define the same "
                      "free-particle time at the start (u1/u2 must match at t = 0)");

  // march t2 and pin t1 by Newton on the matched-clock condition; the
  // predictor uses the regular slope (w2/w1)/b^2
  const double span = target_pair.t_end() - target_pair.t_begin();
  const int base_nodes = 4000;
  std::vector<double> t2s, t1s;
  t2s.reserve(base_nodes + 1);
  t1s.reserve(base_nodes + 1);
  double t1 = ref_pair.t_begin();
  for (int k = 0; k <= base_nodes; ++k) {
    const double t2 = target_pair.t_begin() + span * k / base_nodes;
    if (k > 0) {
      const double t2_prev = t2s.back();
      const double num = ref_pair.u2(t1) * target_pair.du1(t2_prev) -
                         ref_pair.u1(t1) * target_pair.du2(t2_prev);
      const double bv = -target_pair.wronskian(t2_prev) / num;
      const double slope =
          (target_pair.wronskian(t2_prev) / ref_pair.wronskian(t1)) / (bv * bv);
      t1 = newton_t1(ref_pair, target_pair, t1 + slope * (t2 - t2_prev), t2);
    } else {
      t1 = newton_t1(ref_pair, target_pair, t1, t2);
    }
    t2s.push_back(t2);
    t1s.push_back(t1);
  }
  return PairRatioEnvelope(ref_pair, target_pair, std::move(t2s), std::move(t1s), 1e-3);
}

}  // namespace twistmap
