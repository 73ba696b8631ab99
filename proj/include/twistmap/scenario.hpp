#pragma once

#include <filesystem>
#include <string>

#include "twistmap/current.hpp"
#include "twistmap/observables.hpp"
#include "twistmap/oracle.hpp"

namespace twistmap {

// One simulation scenario: field profile, reference quantum numbers, initial
// envelope, numerical settings.  Parsed from a flat key = value config with
// section headers; natural units throughout (hbar = 1, defaults m = 1,
// omega0 = 1); the field may equivalently be given as B0 = 2 m omega0.

struct GridSettings {
  int radial_points = 2048;
  int phi_points = 256;
  double dt = 1e-3;
  double rho_margin = 1.25;  // oracle box beyond the support bound
  int quad_order = 400;
};

struct Scenario {
  std::vector<Segment> segments;
  double ramp = 0.05;
  double omega0 = 1.0;
  double mass = 1.0;

  int n = 0;
  int l = 0;

  double b0 = 1.0;
  double bdot0 = 0.0;
  // negative-control hook: scales the solved envelope by (1 + perturb_b),
  // which deliberately stops it from solving the envelope equation
  double perturb_b = 0.0;

  double tolerance = 1e-10;
  int samples = 201;
  int snapshots = 0;
  GridSettings grid;

  FieldProfile profile() const;
  FieldProfile reference_profile() const;
  double duration() const;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& file);
std::string render_scenario(const Scenario& s);  // resolved config echo

// presets
Scenario fig2_preset();
Scenario stationary_preset();
Scenario damped_preset();
Scenario selfmap_preset();
Scenario preset_by_name(const std::string& name);
std::vector<std::string> preset_names();

// Build the simulation objects for a scenario.
struct Simulation {
  FieldProfile target;
  FieldProfile reference;
  std::shared_ptr<const ErmakovTrajectory> trajectory;
  MappedState state;
};
Simulation build_simulation(const Scenario& s);
// trajectory only (envelope work, lens matching)
ErmakovTrajectory envelope_only(const Scenario& s);

// Writes envelope.csv, observables.csv, profile.csv, optional snapshots and
// the resolved config under out_dir.
struct RunArtifacts {
  std::filesystem::path dir;
  ObservableSeries series;
};
RunArtifacts run_scenario(const Scenario& s, const std::filesystem::path& out_dir);

// Validation suite: residuals, oracle equivalence, unitarity, OAM,
// invariant drift, current agreement.  One line per check.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool greater_is_pass = false;  // negative controls pass when above threshold
  bool pass = false;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  std::string to_text() const;
};

ValidationReport validate(const Scenario& s);

// Golden-section search for the drift length between the two lenses that
// minimizes the post-second-lens first-integral excess c - 1.
struct MatchResult {
  double best_drift = 0.0;
  double best_excess = 0.0;
  double b_amplitude = 0.0;      // residual half-swing of b inside lens 2
  double baseline_drift = 0.0;
  double baseline_excess = 0.0;
  bool improved = false;
};

MatchResult match_lens(const Scenario& s, double min_drift, double max_drift);

void write_series_csv(const ObservableSeries& series, const std::filesystem::path& path);

}  // namespace twistmap
