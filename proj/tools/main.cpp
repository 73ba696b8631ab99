// Scenario-driven front end: simulate twisted-state evolution, run the
// validation suites, search for the matched lens spacing, or emit preset
// configs.  Exit status: 0 success, 1 validation failure, 2 config error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "twistmap/scenario.hpp"

namespace fs = std::filesystem;
using namespace twistmap;

namespace {

fs::path default_out_dir(const fs::path& config, const char* verb) {
  return fs::path(std::string("run-") + verb + "-" + config.stem().string());
}

int run_simulate(const fs::path& config, fs::path out_dir) {
  const Scenario s = load_scenario(config);
  if (out_dir.empty()) out_dir = default_out_dir(config, "simulate");
  RunArtifacts art = run_scenario(s, out_dir);
  std::cout << "wrote " << (art.dir / "envelope.csv").string() << "\n"
            << "wrote " << (art.dir / "observables.csv").string() << "\n"
            << "wrote " << (art.dir / "profile.csv").string() << "\n";
  return 0;
}

int run_validate(const fs::path& config, fs::path out_dir) {
  const Scenario s = load_scenario(config);
  ValidationReport rep = validate(s);
  const std::string text = rep.to_text();
  std::cout << text;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream f(out_dir / "validation.txt", std::ios::binary);
    f << text;
    std::ofstream cfg(out_dir / "scenario.resolved.cfg", std::ios::binary);
    cfg << render_scenario(s);
  }
  return rep.all_pass() ? 0 : 1;
}

int run_match(const fs::path& config, double min_drift, double max_drift, fs::path out_dir) {
  Scenario s = load_scenario(config);
  MatchResult r = match_lens(s, min_drift, max_drift);
  std::cout << "baseline drift   = " << format_g17(r.baseline_drift) << "\n"
            << "baseline excess  = " << format_g17(r.baseline_excess) << "\n"
            << "matched drift    = " << format_g17(r.best_drift) << "\n"
            << "matched excess   = " << format_g17(r.best_excess) << "\n"
            << "lens-2 b swing   = " << format_g17(r.b_amplitude) << "\n";
  if (!r.improved)
    std::cout << "warning: no improvement found inside the given bounds\n";
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    Scenario matched = s;
    // write the matched configuration back for direct reuse
    for (std::size_t i = 0, lens_seen = 0; i < matched.segments.size(); ++i) {
      if (matched.segments[i].kind == SegmentKind::solenoid) {
        if (++lens_seen == 1 && i + 1 < matched.segments.size())
          matched.segments[i + 1].duration = r.best_drift;
      }
    }
    std::ofstream f(out_dir / "matched.cfg", std::ios::binary);
    f << render_scenario(matched);
    std::cout << "wrote " << (out_dir / "matched.cfg").string() << "\n";
  }
  return 0;
}

int run_preset(const std::string& name, fs::path out_dir) {
  const Scenario s = preset_by_name(name);
  if (out_dir.empty()) out_dir = ".";
  fs::create_directories(out_dir);
  const fs::path file = out_dir / (name + ".cfg");
  std::ofstream f(file, std::ios::binary);
  if (!f) throw Error("cannot open " + file.string());
  f << render_scenario(s);
  std::cout << "wrote " << file.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twisted-state evolution in time-varying axial magnetic fields"};
  app.require_subcommand(1);

  std::string config, out, preset_name;
  double min_drift = 0.0, max_drift = 0.0;

  CLI::App* sim = app.add_subcommand("simulate", "run a scenario and write CSV series");
  sim->add_option("config", config, "scenario config file")->required();
  sim->add_option("--out", out, "output directory");

  CLI::App* val = app.add_subcommand("validate", "run the validation suites");
  val->add_option("config", config, "scenario config file")->required();
  val->add_option("--out", out, "output directory");

  CLI::App* match = app.add_subcommand("match-lens", "optimize the drift between the lenses");
  match->add_option("config", config, "scenario config file")->required();
  match->add_option("--min", min_drift, "smallest drift length")->required();
  match->add_option("--max", max_drift, "largest drift length")->required();
  match->add_option("--out", out, "output directory");

  CLI::App* pre = app.add_subcommand("preset", "write a built-in scenario config");
  pre->add_option("name", preset_name, "one of: fig2, stationary, damped, selfmap")->required();
  pre->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return run_simulate(config, out);
    if (val->parsed()) return run_validate(config, out);
    if (match->parsed()) return run_match(config, min_drift, max_drift, out);
    if (pre->parsed()) return run_preset(preset_name, out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
