// Scenario config parsing, CSV determinism, presets, the lens-matching
// search, and the CLI exit-status contract.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "twistmap/scenario.hpp"

using namespace twistmap;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("twistmap_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("render/parse round trip") {
    Scenario s = fig2_preset();
    Scenario r = parse_scenario(render_scenario(s));
    CHECK(r.segments.size() == s.segments.size());
    CHECK(r.l == s.l);
    CHECK(r.b0 == s.b0);
    CHECK(r.ramp == s.ramp);
    CHECK(r.duration() == doctest::Approx(s.duration()).epsilon(1e-15));
    CHECK(render_scenario(r) == render_scenario(s));
  }
  SUBCASE("errors carry field paths") {
    const std::string base =
        "[profile]\nsegment.1.kind = solenoid\nsegment.1.duration = 1\nsegment.1.f = 1\n";
    CHECK_THROWS_WITH_AS(parse_scenario(base + "bogus = 1\n"),
                         doctest::Contains("profile.bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario(base + "[envelope]\nb0 = -1\n"),
                         doctest::Contains("envelope.b0"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario(base + "[state]\nn = -2\n"),
                         doctest::Contains("state.n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("[profile]\nsegment.2.kind = free\nsegment.2.duration = 1\n"),
                    ConfigError);  // indices must start at 1
    CHECK_THROWS_AS(parse_scenario("key_without_section = 1\n"), ConfigError);
  }
  SUBCASE("B0 converts to omega0 = B0/(2m)") {
    Scenario s = parse_scenario(
        "[profile]\nb_field = 3\nmass = 1.5\nsegment.1.kind = solenoid\n"
        "segment.1.duration = 1\nsegment.1.f = 1\n");
    CHECK(s.omega0 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(parse_scenario("[profile]\nomega0 = 1\nb_field = 2\n"
                                   "segment.1.kind = free\nsegment.1.duration = 1\n"),
                    ConfigError);
  }
}

TEST_CASE("run_scenario artifacts and determinism") {
  Scenario s = stationary_preset();
  s.samples = 24;
  s.segments[0].duration = 2.0;
  const fs::path dir_a = fresh_dir("det_a");
  const fs::path dir_b = fresh_dir("det_b");
  RunArtifacts a = run_scenario(s, dir_a);
  RunArtifacts b = run_scenario(s, dir_b);

  for (const char* f : {"envelope.csv", "observables.csv", "profile.csv",
                        "scenario.resolved.cfg"}) {
    CHECK(fs::exists(dir_a / f));
    CHECK(slurp(dir_a / f) == slurp(dir_b / f));
  }
  // header contract
  std::string head = slurp(dir_a / "envelope.csv").substr(0, 24);
  CHECK(head.rfind("t,b,bdot,first_integral", 0) == 0);
  std::string obs = slurp(dir_a / "observables.csv");
  CHECK(obs.rfind("times,mean_rho2,energy,first_integral_value,ermakov_lewis,emittance_x,"
                  "emittance_y,twiss_beta,twiss_alpha,quadrupole,radiation_scaling",
                  0) == 0);
  CHECK(obs.find('\r') == std::string::npos);  // LF only

  SUBCASE("stationary series are constant") {
    const ObservableSeries& ser = a.series;
    for (std::size_t i = 0; i < ser.times.size(); ++i) {
      CHECK(ser.mean_rho2[i] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(ser.energy[i] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(ser.twiss_beta[i] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(std::fabs(ser.radiation_scaling[i]) < 1e-12);
    }
  }
}

TEST_CASE("damped preset writes the dissipation factor") {
  Scenario s = damped_preset();
  s.samples = 11;
  const fs::path dir = fresh_dir("damped");
  run_scenario(s, dir);
  std::ifstream in(dir / "profile.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,f,omega,gamma,w");
  // t = 5 row: w = e^{-0.5}
  for (int i = 0; i < 6; ++i) std::getline(in, line);
  const auto last_comma = line.rfind(',');
  const double w = std::strtod(line.substr(last_comma + 1).c_str(), nullptr);
  CHECK(w == doctest::Approx(std::exp(-0.1 * 5.0)).epsilon(1e-12));
}

TEST_CASE("snapshots are written on request") {
  Scenario s = stationary_preset();
  s.segments[0].duration = 1.0;
  s.samples = 5;
  s.snapshots = 3;
  s.grid.radial_points = 128;
  const fs::path dir = fresh_dir("snap");
  run_scenario(s, dir);
  CHECK(fs::exists(dir / "snapshot_000.csv"));
  CHECK(fs::exists(dir / "snapshot_002.csv"));
  std::ifstream in(dir / "snapshot_000.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "rho,re_u,im_u");
}

TEST_CASE("fig2 preset envelope: parabolic expansion, then bounded oscillation") {
  Scenario s = fig2_preset();
  Simulation sim = build_simulation(s);
  // lead segment: b^2 follows the free-space closed form (away from the
  // first ramp tail)
  for (double t : {0.04, 0.08, 0.12}) {
    CHECK(sim.trajectory->b(t) ==
          doctest::Approx(std::sqrt(0.64 + t * t / 0.64)).epsilon(1e-4));
  }
  // inside lens 1 the envelope stays bounded and oscillates
  const double t0 = s.segments[0].duration + 0.3;
  const double t1 = t0 + s.segments[1].duration - 0.6;
  const double bmax = sim.trajectory->b_max_on(t0, t1);
  const double bmin = sim.trajectory->b_min_on(t0, t1);
  CHECK(bmax < 1.6);
  CHECK(bmax - bmin > 0.3);
}

TEST_CASE("validation suite passes on a stationary scenario") {
  Scenario s = stationary_preset();
  s.segments[0].duration = 2.0;
  s.grid.radial_points = 512;
  ValidationReport rep = validate(s);
  CHECK(rep.all_pass());
}

TEST_CASE("series assembly is deterministic for any worker count") {
  Scenario s = selfmap_preset();
  s.segments[0].duration = 3.0;
  Simulation sim = build_simulation(s);
  std::vector<double> times;
  for (int k = 0; k <= 16; ++k) times.push_back(3.0 * k / 16.0);
  setenv("TWISTMAP_WORKERS", "1", 1);
  ObservableSeries one = compute_series(sim.state, times);
  setenv("TWISTMAP_WORKERS", "5", 1);
  ObservableSeries five = compute_series(sim.state, times);
  unsetenv("TWISTMAP_WORKERS");
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(one.ermakov_lewis[i] == five.ermakov_lewis[i]);
    CHECK(one.energy[i] == five.energy[i]);
    CHECK(one.radiation_scaling[i] == five.radiation_scaling[i]);
  }
}

TEST_CASE("match_lens") {
  Scenario s = fig2_preset();

  SUBCASE("improves the unmatched preset by a large factor") {
    MatchResult m = match_lens(s, 0.15, 3.5);
    CHECK(m.improved);
    CHECK(m.best_excess <= 0.1 * m.baseline_excess);
    CHECK(m.b_amplitude < 0.1);  // nearly-captured envelope inside lens 2
  }
  SUBCASE("already-matched configuration returns its own drift") {
    MatchResult first = match_lens(s, 0.15, 3.5);
    Scenario matched = s;
    matched.segments[2].duration = first.best_drift;
    MatchResult again = match_lens(matched, 0.15, 3.5);
    CHECK(again.best_drift == doctest::Approx(first.best_drift).epsilon(1e-3));
    CHECK(again.best_excess <= again.baseline_excess * (1.0 + 1e-9));
  }
  SUBCASE("bounds that exclude the optimum report no improvement") {
    MatchResult first = match_lens(s, 0.15, 3.5);
    Scenario matched = s;
    matched.segments[2].duration = first.best_drift;
    // search strictly past the focus: everything is worse than the baseline
    MatchResult m = match_lens(matched, first.best_drift + 0.4, first.best_drift + 0.4 + kPi);
    CHECK_FALSE(m.improved);
  }
  SUBCASE("validates the layout and the bracket") {
    CHECK_THROWS_AS(match_lens(s, 1.0, 1.5), ConfigError);  // bracket < pi
    Scenario single = stationary_preset();
    CHECK_THROWS_AS(match_lens(single, 0.2, 3.5), ConfigError);
  }
}

#ifdef TWISTMAP_CLI_PATH
TEST_CASE("CLI exit-status contract") {
  const std::string cli = TWISTMAP_CLI_PATH;
  const fs::path dir = fresh_dir("cli");
  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
  };

  // preset then simulate: success
  CHECK(run("preset stationary --out " + dir.string()) == 0);
  {
    // shrink to keep the test quick
    Scenario s = load_scenario(dir / "stationary.cfg");
    s.segments[0].duration = 2.0;
    s.samples = 8;
    std::ofstream f(dir / "small.cfg", std::ios::binary);
    f << render_scenario(s);
  }
  CHECK(run("simulate " + (dir / "small.cfg").string() + " --out " + (dir / "out").string()) ==
        0);
  CHECK(fs::exists(dir / "out" / "envelope.csv"));

  // config error: exit 2
  std::ofstream bad(dir / "bad.cfg");
  bad << "[profile]\nsegment.1.kind = warp\nsegment.1.duration = 1\n";
  bad.close();
  CHECK(run("simulate " + (dir / "bad.cfg").string()) == 2);
  CHECK(run("preset no-such-preset --out " + dir.string()) == 2);

  // validation failure: exit 1 (perturbed envelope fails the suites)
  {
    Scenario s = load_scenario(dir / "small.cfg");
    s.perturb_b = 0.1;
    s.grid.radial_points = 512;
    std::ofstream f(dir / "perturbed.cfg", std::ios::binary);
    f << render_scenario(s);
  }
  CHECK(run("validate " + (dir / "perturbed.cfg").string()) == 1);
}
#endif
