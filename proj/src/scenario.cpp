#include "twistmap/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace twistmap {

namespace fs = std::filesystem;

double Scenario::duration() const {
  double d = 0.0;
  for (const Segment& s : segments) d += s.duration;
  return d;
}

FieldProfile Scenario::profile() const { return FieldProfile(segments, ramp, omega0, mass); }

FieldProfile Scenario::reference_profile() const {
  // constant Landau reference, long enough for the accumulated tau1
  const double dur = 100.0 * (duration() + 1.0);
  return FieldProfile::landau(omega0, mass, dur);
}

// ---------------------------------------------------------------------------
// config parsing
// ---------------------------------------------------------------------------

namespace {

struct RawConfig {
  // section -> key -> value (keys lowercase)
  std::map<std::string, std::map<std::string, std::string>> kv;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

RawConfig tokenize(const std::string& text) {
  RawConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any [section]");
    if (key.empty() || val.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    if (!cfg.kv[section].emplace(key, val).second)
      throw ConfigError(section + "." + key + ": duplicate key");
  }
  return cfg;
}

double parse_double(const std::string& path, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError(path + ": cannot parse number from '" + v + "'");
  return x;
}

int parse_int(const std::string& path, const std::string& v) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError(path + ": cannot parse integer from '" + v + "'");
  return static_cast<int>(x);
}

SegmentKind parse_kind(const std::string& path, const std::string& v) {
  if (v == "free") return SegmentKind::free_space;
  if (v == "solenoid") return SegmentKind::solenoid;
  if (v == "damped") return SegmentKind::damped;
  throw ConfigError(path + ": unknown segment kind '" + v + "' (free|solenoid|damped)");
}

const char* kind_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::free_space: return "free";
    case SegmentKind::solenoid: return "solenoid";
    case SegmentKind::damped: return "damped";
  }
  return "?";
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  RawConfig cfg = tokenize(text);
  Scenario s;

  for (const auto& [section, keys] : cfg.kv) {
    if (section != "profile" && section != "state" && section != "envelope" &&
        section != "run" && section != "grid")
      throw ConfigError(section + ": unknown section");
    (void)keys;
  }

  // [profile]
  bool have_omega0 = false, have_bfield = false;
  double bfield = 0.0;
  std::map<int, Segment> segs;
  if (auto it = cfg.kv.find("profile"); it != cfg.kv.end()) {
    for (const auto& [key, val] : it->second) {
      const std::string path = "profile." + key;
      if (key == "omega0") {
        s.omega0 = parse_double(path, val);
        have_omega0 = true;
      } else if (key == "b_field") {
        bfield = parse_double(path, val);
        have_bfield = true;
      } else if (key == "mass") {
        s.mass = parse_double(path, val);
      } else if (key == "ramp") {
        s.ramp = parse_double(path, val);
      } else if (key.rfind("segment.", 0) == 0) {
        const std::string rest = key.substr(8);
        const auto dot = rest.find('.');
        if (dot == std::string::npos) throw ConfigError(path + ": expected segment.<k>.<field>");
        const int idx = parse_int(path, rest.substr(0, dot));
        const std::string field = rest.substr(dot + 1);
        Segment& seg = segs[idx];
        if (field == "kind")
          seg.kind = parse_kind(path, val);
        else if (field == "duration")
          seg.duration = parse_double(path, val);
        else if (field == "f")
          seg.f = parse_double(path, val);
        else if (field == "gamma")
          seg.gamma = parse_double(path, val);
        else
          throw ConfigError(path + ": unknown segment field");
      } else {
        throw ConfigError(path + ": unknown key");
      }
    }
  }
  if (segs.empty()) throw ConfigError("profile: at least one segment.<k> is required");
  int expect = 1;
  for (const auto& [idx, seg] : segs) {
    if (idx != expect)
      throw ConfigError("profile.segment." + std::to_string(idx) +
                        ": segment indices must be contiguous from 1");
    ++expect;
    s.segments.push_back(seg);
  }
  if (have_bfield) {
    if (have_omega0)
      throw ConfigError("profile.b_field: give either omega0 or b_field, not both");
    s.omega0 = bfield / (2.0 * s.mass);  // omega = |e| B / (2 m), |e| = 1
  }

  // [state]
  if (auto it = cfg.kv.find("state"); it != cfg.kv.end()) {
    for (const auto& [key, val] : it->second) {
      const std::string path = "state." + key;
      if (key == "n")
        s.n = parse_int(path, val);
      else if (key == "l")
        s.l = parse_int(path, val);
      else
        throw ConfigError(path + ": unknown key");
    }
  }

  // [envelope]
  if (auto it = cfg.kv.find("envelope"); it != cfg.kv.end()) {
    for (const auto& [key, val] : it->second) {
      const std::string path = "envelope." + key;
      if (key == "b0")
        s.b0 = parse_double(path, val);
      else if (key == "bdot0")
        s.bdot0 = parse_double(path, val);
      else if (key == "perturb_b")
        s.perturb_b = parse_double(path, val);
      else
        throw ConfigError(path + ": unknown key");
    }
  }

  // [run]
  if (auto it = cfg.kv.find("run"); it != cfg.kv.end()) {
    for (const auto& [key, val] : it->second) {
      const std::string path = "run." + key;
      if (key == "tolerance")
        s.tolerance = parse_double(path, val);
      else if (key == "samples")
        s.samples = parse_int(path, val);
      else if (key == "snapshots")
        s.snapshots = parse_int(path, val);
      else
        throw ConfigError(path + ": unknown key");
    }
  }

  // [grid]
  if (auto it = cfg.kv.find("grid"); it != cfg.kv.end()) {
    for (const auto& [key, val] : it->second) {
      const std::string path = "grid." + key;
      if (key == "radial_points")
        s.grid.radial_points = parse_int(path, val);
      else if (key == "phi_points")
        s.grid.phi_points = parse_int(path, val);
      else if (key == "dt")
        s.grid.dt = parse_double(path, val);
      else if (key == "rho_margin")
        s.grid.rho_margin = parse_double(path, val);
      else if (key == "quad_order")
        s.grid.quad_order = parse_int(path, val);
      else
        throw ConfigError(path + ": unknown key");
    }
  }

  // cross-field validation
  if (!(s.b0 > 0.0)) throw ConfigError("envelope.b0: must be > 0");
  if (s.n < 0) throw ConfigError("state.n: must be >= 0");
  if (!(s.tolerance > 0.0)) throw ConfigError("run.tolerance: must be > 0");
  if (s.samples < 2) throw ConfigError("run.samples: must be >= 2");
  if (s.grid.radial_points < 64) throw ConfigError("grid.radial_points: must be >= 64");
  s.profile();  // validates segments
  return s;
}

Scenario load_scenario(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string render_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "[profile]\n";
  out << "omega0 = " << format_g17(s.omega0) << "\n";
  out << "mass = " << format_g17(s.mass) << "\n";
  out << "ramp = " << format_g17(s.ramp) << "\n";
  for (std::size_t i = 0; i < s.segments.size(); ++i) {
    const Segment& seg = s.segments[i];
    const std::string p = "segment." + std::to_string(i + 1) + ".";
    out << p << "kind = " << kind_name(seg.kind) << "\n";
    out << p << "duration = " << format_g17(seg.duration) << "\n";
    if (seg.kind != SegmentKind::free_space) out << p << "f = " << format_g17(seg.f) << "\n";
    if (seg.kind == SegmentKind::damped) out << p << "gamma = " << format_g17(seg.gamma) << "\n";
  }
  out << "\n[state]\n";
  out << "n = " << s.n << "\n";
  out << "l = " << s.l << "\n";
  out << "\n[envelope]\n";
  out << "b0 = " << format_g17(s.b0) << "\n";
  out << "bdot0 = " << format_g17(s.bdot0) << "\n";
  if (s.perturb_b != 0.0) out << "perturb_b = " << format_g17(s.perturb_b) << "\n";
  out << "\n[run]\n";
  out << "tolerance = " << format_g17(s.tolerance) << "\n";
  out << "samples = " << s.samples << "\n";
  out << "snapshots = " << s.snapshots << "\n";
  out << "\n[grid]\n";
  out << "radial_points = " << s.grid.radial_points << "\n";
  out << "phi_points = " << s.grid.phi_points << "\n";
  out << "dt = " << format_g17(s.grid.dt) << "\n";
  out << "rho_margin = " << format_g17(s.grid.rho_margin) << "\n";
  out << "quad_order = " << s.grid.quad_order << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// presets
// ---------------------------------------------------------------------------

// Two-lens transport line, scaled so the desk-size oracle run resolves it:
// the packet expands from its focus, oscillates about 1.5 envelope periods in
// the first lens, leaves it contracting, and meets the second lens at a
// deliberately unmatched spot (match-lens finds the drift that captures it).
Scenario fig2_preset() {
  Scenario s;
  s.segments = {
      {SegmentKind::free_space, 0.30, 0.0, 0.0},
      {SegmentKind::solenoid, 4.94, 1.0, 0.0},
      {SegmentKind::free_space, 1.10, 0.0, 0.0},
      {SegmentKind::solenoid, 3.20, 1.0, 0.0},
      {SegmentKind::free_space, 0.45, 0.0, 0.0},
  };
  s.ramp = 0.05;
  s.n = 0;
  s.l = 10;
  s.b0 = 0.8;
  s.bdot0 = 0.0;
  return s;
}

Scenario stationary_preset() {
  Scenario s;
  s.segments = {{SegmentKind::solenoid, 4.0 * kPi, 1.0, 0.0}};
  s.ramp = 0.0;
  s.n = 0;
  s.l = 0;
  s.b0 = 1.0;
  s.bdot0 = 0.0;
  return s;
}

Scenario damped_preset() {
  Scenario s;
  s.segments = {{SegmentKind::damped, 10.0, 1.0, 0.1}};
  s.ramp = 0.0;
  s.n = 0;
  s.l = 5;
  s.b0 = 0.8;
  s.bdot0 = 0.0;
  return s;
}

Scenario selfmap_preset() {
  Scenario s;
  s.segments = {{SegmentKind::solenoid, 20.0 * kPi, 1.0, 0.0}};
  s.ramp = 0.0;
  s.n = 0;
  s.l = 10;
  s.b0 = 0.8;
  s.bdot0 = 0.0;
  return s;
}

Scenario preset_by_name(const std::string& name) {
  if (name == "fig2") return fig2_preset();
  if (name == "stationary") return stationary_preset();
  if (name == "damped") return damped_preset();
  if (name == "selfmap") return selfmap_preset();
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"fig2", "stationary", "damped", "selfmap"}; }

// ---------------------------------------------------------------------------
// simulation assembly
// ---------------------------------------------------------------------------

ErmakovTrajectory envelope_only(const Scenario& s) {
  return integrate_ermakov(s.reference_profile(), s.profile(), s.b0, s.bdot0, 0.0, s.duration(),
                           s.tolerance);
}

Simulation build_simulation(const Scenario& s) {
  FieldProfile target = s.profile();
  FieldProfile reference = s.reference_profile();
  ErmakovTrajectory solved =
      integrate_ermakov(reference, target, s.b0, s.bdot0, 0.0, s.duration(), s.tolerance);
  // the negative-control hook scales the envelope, which makes it stop
  // solving the envelope equation by construction
  auto trajectory = std::make_shared<ErmakovTrajectory>(
      s.perturb_b == 0.0 ? std::move(solved)
                         : solved.with_envelope_scale(1.0 + s.perturb_b));
  ReferenceState ref(make_landau_state(s.n, s.l, s.mass, s.omega0));
  MappedState state = map_state(ref, *trajectory, target);
  return Simulation{std::move(target), std::move(reference), trajectory, std::move(state)};
}

// ---------------------------------------------------------------------------
// run_scenario
// ---------------------------------------------------------------------------

namespace {

void write_columns_csv(const fs::path& path, const std::vector<std::string>& header,
                       const std::vector<const std::vector<double>*>& cols) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c)
    out << header[c] << (c + 1 < header.size() ? ',' : '\n');
  const std::size_t rows = cols.front()->size();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out << format_g17((*cols[c])[r]) << (c + 1 < cols.size() ? ',' : '\n');
}

std::vector<double> sample_times(double duration, int count) {
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = duration * i / (count - 1);
  return t;
}

}  // namespace

void write_series_csv(const ObservableSeries& s, const fs::path& path) {
  write_columns_csv(path,
                    {"times", "mean_rho2", "energy", "first_integral_value", "ermakov_lewis",
                     "emittance_x", "emittance_y", "twiss_beta", "twiss_alpha", "quadrupole",
                     "radiation_scaling"},
                    {&s.times, &s.mean_rho2, &s.energy, &s.first_integral_value,
                     &s.ermakov_lewis, &s.emittance_x, &s.emittance_y, &s.twiss_beta,
                     &s.twiss_alpha, &s.quadrupole, &s.radiation_scaling});
}

RunArtifacts run_scenario(const Scenario& s, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  Simulation sim = build_simulation(s);
  const double dur = s.duration();
  const std::vector<double> times = sample_times(dur, s.samples);

  {  // envelope.csv
    std::vector<double> b(times.size()), bdot(times.size()), c(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      b[i] = sim.trajectory->b(times[i]);
      bdot[i] = sim.trajectory->bdot(times[i]);
      c[i] = sim.trajectory->first_integral_at(times[i]);
    }
    write_columns_csv(out_dir / "envelope.csv", {"t", "b", "bdot", "first_integral"},
                      {&times, &b, &bdot, &c});
  }
  {  // profile.csv
    std::vector<double> f(times.size()), om(times.size()), g(times.size()), w(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      f[i] = sim.target.f_value(times[i]);
      om[i] = sim.target.omega(times[i]);
      g[i] = sim.target.gamma(times[i]);
      w[i] = sim.target.dissipation(times[i]);
    }
    write_columns_csv(out_dir / "profile.csv", {"t", "f", "omega", "gamma", "w"},
                      {&times, &f, &om, &g, &w});
  }

  ObservableSeries series = compute_series(sim.state, times);
  write_series_csv(series, out_dir / "observables.csv");

  if (s.snapshots > 0) {
    const double rho_max = sim.state.support_radius();
    const RadialGrid grid = RadialGrid::half_offset(rho_max, s.grid.radial_points);
    for (int k = 0; k < s.snapshots; ++k) {
      const double t = s.snapshots == 1 ? dur : dur * k / (s.snapshots - 1);
      std::vector<Complex> u(grid.n);
      for (int j = 0; j < grid.n; ++j) u[j] = sim.state.sector_value(s.l, grid.rho(j), t);
      char name[48];
      std::snprintf(name, sizeof(name), "snapshot_%03d.csv", k);
      write_snapshot_csv(grid, u, (out_dir / name).string());
    }
  }

  std::ofstream cfg(out_dir / "scenario.resolved.cfg", std::ios::binary);
  cfg << render_scenario(s);
  return RunArtifacts{out_dir, std::move(series)};
}

// ---------------------------------------------------------------------------
// validation suite
// ---------------------------------------------------------------------------

bool ValidationReport::all_pass() const {
  for (const CheckResult& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const CheckResult& c : checks) {
    out << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  measured=" << format_g17(c.measured)
        << (c.greater_is_pass ? "  must-exceed=" : "  threshold=") << format_g17(c.threshold)
        << "\n";
  }
  out << (all_pass() ? "ALL CHECKS PASSED" : "VALIDATION FAILED") << "\n";
  return out.str();
}

namespace {

CheckResult check_leq(const std::string& name, double measured, double threshold) {
  return {name, measured, threshold, false, measured <= threshold};
}

CheckResult check_geq(const std::string& name, double measured, double threshold) {
  return {name, measured, threshold, true, measured >= threshold};
}

}  // namespace

ValidationReport validate(const Scenario& s) {
  ValidationReport rep;
  Simulation sim = build_simulation(s);
  const double dur = s.duration();
  std::vector<double> probe_times;
  for (int k = 0; k < 5; ++k) probe_times.push_back(dur * (k + 0.5) / 5.0);

  // negative control: the envelope distortion must be a clear violation for
  // the state at hand, so scale it with the state's width sensitivity ~ mu
  const double mu = 2.0 * s.n + std::abs(s.l) + 1.0;
  Scenario s_neg = s;
  s_neg.perturb_b = s.perturb_b == 0.0 ? std::max(0.08, 1.2 / mu) : 2.0 * s.perturb_b;
  Simulation sim_neg = build_simulation(s_neg);

  const double rho_max = sim.state.support_radius();
  const RadialGrid rgrid = RadialGrid::half_offset(rho_max, s.grid.radial_points);

  // Schrodinger residuals
  {
    const LandauState eig = make_landau_state(s.n, s.l, s.mass, s.omega0);
    const FieldProfile landau = FieldProfile::landau(s.omega0, s.mass, dur);
    SectorEvaluator f = [&](double rho, double t) {
      return Complex(eig.radial(rho)) * std::exp(Complex(0.0, -eig.eps_perp * t));
    };
    const RadialGrid eig_grid =
        RadialGrid::half_offset(support_radius(eig, 1.0), s.grid.radial_points);
    rep.checks.push_back(check_leq("residual_eigenstate",
                                   schrodinger_residual(f, s.l, landau, eig_grid, dur / 2).value,
                                   1e-4));

    double worst = 0.0, best_neg = 1e300;
    for (double t : probe_times) {
      worst = std::max(worst, schrodinger_residual(sim.state, sim.target, rgrid, t).value);
      best_neg =
          std::min(best_neg, schrodinger_residual(sim_neg.state, sim.target, rgrid, t).value);
    }
    rep.checks.push_back(check_leq("residual_mapped", worst, 1e-3));
    rep.checks.push_back(check_geq("residual_negative_control", best_neg, 1e-1));
  }

  // unitarity
  {
    double worst = 0.0;
    for (double t : probe_times)
      worst = std::max(worst, std::fabs(sim.state.norm_quadrature(t) - 1.0));
    rep.checks.push_back(check_leq("unitarity_norm_drift", worst, 1e-8));
  }

  // OAM and charge
  {
    double worst = 0.0;
    long charge_dev = 0;
    for (int k = 0; k < 3; ++k) {
      const double t = probe_times[k];
      PolarSamples ps = sample_polar_gauss(
          [&](double rho, double phi) {
            Complex v = 0.0;
            for (int l : sim.state.sectors())
              v += sim.state.sector_value(l, rho, t) * std::exp(Complex(0.0, l * phi));
            return v;
          },
          rho_max, 320, 128);
      OamCharge oc = oam_and_charge(ps);
      worst = std::max(worst, std::fabs(oc.mean_lz - s.l));
      charge_dev = std::max(charge_dev, std::labs(oc.charge - s.l));
    }
    rep.checks.push_back(check_leq("oam_mean_lz_deviation", worst, 1e-8));
    rep.checks.push_back(
        check_leq("topological_charge_deviation", static_cast<double>(charge_dev), 0.0));
  }

  // Ermakov-Lewis drift of the mapped state
  {
    const double i0 = ermakov_lewis(sim.state, probe_times.front());
    double worst = 0.0;
    for (double t : probe_times)
      worst = std::max(worst, std::fabs(ermakov_lewis(sim.state, t) - i0) / std::fabs(i0));
    rep.checks.push_back(check_leq("ermakov_lewis_drift_mapped", worst, 1e-6));
  }

  // oracle equivalence, and invariants along the oracle evolution
  {
    const RadialGrid ogrid =
        RadialGrid::half_offset(rho_max * s.grid.rho_margin, s.grid.radial_points);
    std::vector<Complex> init(ogrid.n);
    for (int j = 0; j < ogrid.n; ++j) init[j] = sim.state.sector_value(s.l, ogrid.rho(j), 0.0);
    EvolveOptions opts;
    opts.dt = s.grid.dt;
    // track the instantaneous mean energy so every profile segment sees a
    // centered spectrum (pure global phase, optimized away in compare())
    auto traj = sim.trajectory;
    const FieldProfile target = sim.target;
    const double omega0 = s.omega0;
    const int ll = s.l;
    opts.energy_shift_fn = [traj, target, mu, omega0, ll](double t) {
      const double b = traj->b(t);
      const double bd = traj->bdot(t) / omega0;
      const double om2 = target.omega2(t) / (omega0 * omega0);
      return 0.5 * omega0 * mu * (1.0 / (b * b) + bd * bd + om2 * b * b) +
             target.omega(t) * ll;
    };
    const long steps = std::lround(std::ceil(dur / opts.dt));
    opts.store_every = static_cast<int>(std::max<long>(1, steps / 16));
    EvolvedState ev = evolve(std::move(init), s.l, sim.target, 0.0, dur, ogrid, opts);

    auto [l2, fid] = compare(ev, sim.state, dur);
    rep.checks.push_back(check_leq("oracle_l2_error", l2, 1e-4));
    rep.checks.push_back(check_leq("oracle_infidelity", 1.0 - fid, 1e-6));
    auto [l2n, fid_neg] = compare(ev, sim_neg.state, dur);
    (void)l2n;
    rep.checks.push_back(check_leq("oracle_negative_control_fidelity", fid_neg, 0.99));

    double lewis0 = 0.0, lewis_worst = 0.0, e2_0 = 0.0, e2_worst = 0.0;
    for (std::size_t k = 0; k < ev.times.size(); ++k) {
      RadialSamples rs;
      rs.l = s.l;
      rs.t = ev.times[k];
      rs.rho = ogrid.nodes();
      rs.weight.assign(ogrid.n, ogrid.h);
      rs.u = ev.snapshots[k];
      const double b = sim.trajectory->b(ev.times[k]);
      const double bdot = sim.trajectory->bdot(ev.times[k]);
      const double li = ermakov_lewis(rs, b, bdot, s.mass, s.omega0);
      const double e2 = 4.0 * ermakov_lewis_squared(rs, b, bdot, s.mass, s.omega0);
      if (k == 0) {
        lewis0 = li;
        e2_0 = e2;
      } else {
        lewis_worst = std::max(lewis_worst, std::fabs(li - lewis0) / std::fabs(lewis0));
        e2_worst = std::max(e2_worst, std::fabs(e2 - e2_0) / std::fabs(e2_0));
      }
    }
    rep.checks.push_back(check_leq("ermakov_lewis_drift_oracle", lewis_worst, 1e-4));
    rep.checks.push_back(check_leq("emittance_sq_drift_oracle", e2_worst, 1e-4));
    rep.checks.push_back(
        check_leq("oracle_norm_drift",
                  std::fabs(ev.norm_history.back() - ev.norm_history.front()), 1e-6));
  }

  // current agreement and continuity
  {
    const double t = probe_times[2];
    const int ncur = 8192;
    const RadialGrid cgrid = RadialGrid::half_offset(rho_max, ncur);
    const int mphi = 64;
    PolarSamples ps = sample_polar_uniform(
        [&](double rho, double phi) {
          Complex v = 0.0;
          for (int l : sim.state.sectors())
            v += sim.state.sector_value(l, rho, t) * std::exp(Complex(0.0, l * phi));
          return v;
        },
        cgrid, mphi);
    const CurrentField direct = current_direct(ps, sim.target, t);
    const auto* src = dynamic_cast<const LandauSource*>(&sim.state.reference());
    const CurrentField transf = current_transformed(src->reference(), *sim.trajectory, t,
                                                    direct.rho, direct.wrho, mphi);
    double max_diff = 0.0, max_j = 0.0;
    for (std::size_t i = 0; i < direct.j_rho.size(); ++i) {
      const double a = std::abs(ps.values[i]);
      max_j = std::max({max_j, std::fabs(direct.j_rho[i]), std::fabs(direct.j_phi[i])});
      if (a < 1e-8) continue;
      max_diff = std::max({max_diff, std::fabs(direct.j_rho[i] - transf.j_rho[i]),
                           std::fabs(direct.j_phi[i] - transf.j_phi[i])});
    }
    const double tol_current = sim.target.has_dissipation() ? 1e-6 : 1e-8;
    rep.checks.push_back(check_leq("current_agreement", max_diff / max_j, tol_current));

    // the adopted current convention satisfies the continuity equation only
    // for w = 1, so this check runs on dissipation-free targets
    if (!sim.target.has_dissipation()) {
      const RadialGrid kgrid = RadialGrid::half_offset(rho_max, 2048);
      rep.checks.push_back(
          check_leq("continuity_residual",
                    continuity_residual(sim.state, sim.target, kgrid, mphi, t), 1e-4));
    }
  }

  return rep;
}

// ---------------------------------------------------------------------------
// lens matching
// ---------------------------------------------------------------------------

namespace {

struct TwoLensLayout {
  std::size_t drift_index = 0;   // free segment between the lenses
  std::size_t lens2_index = 0;
};

TwoLensLayout find_two_lens_layout(const std::vector<Segment>& segs) {
  std::vector<std::size_t> lenses;
  for (std::size_t i = 0; i < segs.size(); ++i)
    if (segs[i].kind == SegmentKind::solenoid) lenses.push_back(i);
  if (lenses.size() < 2)
    throw ConfigError("match-lens requires a profile with two solenoid lenses");
  const std::size_t a = lenses[0], b = lenses[1];
  if (b != a + 2 || segs[a + 1].kind != SegmentKind::free_space)
    throw ConfigError("match-lens requires a single free drift between the two lenses");
  return {a + 1, b};
}

double lens2_excess(const Scenario& base, const TwoLensLayout& lay, double drift) {
  Scenario s = base;
  s.segments[lay.drift_index].duration = drift;
  ErmakovTrajectory tr = envelope_only(s);
  double t0 = 0.0;
  for (std::size_t i = 0; i < lay.lens2_index; ++i) t0 += s.segments[i].duration;
  const double mid = t0 + 0.5 * s.segments[lay.lens2_index].duration;
  return tr.first_integral_at(mid) - 1.0;
}

}  // namespace

MatchResult match_lens(const Scenario& s, double min_drift, double max_drift) {
  const TwoLensLayout lay = find_two_lens_layout(s.segments);
  const double period = kPi / s.omega0;
  if (!(min_drift > 0.0) || !(max_drift > min_drift))
    throw ConfigError("match-lens needs 0 < min < max drift bounds");
  if (max_drift - min_drift < period * (1.0 - 1e-9))
    throw ConfigError("match-lens bounds must bracket at least one oscillation period pi/omega0");

  MatchResult res;
  res.baseline_drift = s.segments[lay.drift_index].duration;
  res.baseline_excess = lens2_excess(s, lay, res.baseline_drift);

  // coarse scan, then golden-section refinement around the best cell
  const int coarse = 64;
  double best = 1e300, best_d = min_drift;
  for (int k = 0; k <= coarse; ++k) {
    const double d = min_drift + (max_drift - min_drift) * k / coarse;
    const double e = lens2_excess(s, lay, d);
    if (e < best) {
      best = e;
      best_d = d;
    }
  }
  const double cell = (max_drift - min_drift) / coarse;
  double lo = std::max(min_drift, best_d - cell);
  double hi = std::min(max_drift, best_d + cell);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = lens2_excess(s, lay, x1), f2 = lens2_excess(s, lay, x2);
  while (hi - lo > 1e-10) {
    if (f1 > f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = lens2_excess(s, lay, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = lens2_excess(s, lay, x1);
    }
  }
  res.best_drift = 0.5 * (lo + hi);
  res.best_excess = lens2_excess(s, lay, res.best_drift);
  res.improved = res.best_excess < res.baseline_excess;

  // residual envelope swing inside lens 2 at the matched drift
  Scenario matched = s;
  matched.segments[lay.drift_index].duration = res.best_drift;
  ErmakovTrajectory tr = envelope_only(matched);
  double t0 = 0.0;
  for (std::size_t i = 0; i < lay.lens2_index; ++i) t0 += matched.segments[i].duration;
  const double t1 = t0 + matched.segments[lay.lens2_index].duration;
  res.b_amplitude = 0.5 * (tr.b_max_on(t0, t1) - tr.b_min_on(t0, t1));
  return res;
}

}  // namespace twistmap
