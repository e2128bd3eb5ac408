#pragma once

// Scenario description, presets, and the file-producing runners behind the
// command-line tool.
//
// Config files are JSON. Schema (version 1):
//
//   {
//     "schema_version": 1,            optional
//     "preset": "fig2",               optional base; other keys override it
//     "name": "my-run",
//     "units": "recoil" | "si",
//     "model":    { "J", "K0", "alpha", "omega_D", "phi" }          recoil units
//     "physical": { "atomic_mass", "lattice_period", "lattice_depth_s",
//                   "trap_frequency", "drive_amplitude_alpha",
//                   "drive_frequency", "drive_phase_phi" }          SI units
//     "model_overrides": { "K0": ... }  applied after SI derivation
//     "initial":  { "n0", "k0", "sigma_n" }  or  "initial_state_file": "<csv>"
//     "integrator": { "dt", "t_end" | "t_end_bloch_periods",
//                     "sample_stride" | "samples_per_bloch_period",
//                     "snapshot_stride" | "snapshots_per_bloch_period",
//                     "k_snapshots", "edge_guard" }
//     "window": { "n_min", "n_max" }       optional, default_window() otherwise
//   }
//
// "omega_D" may be the string "omega_B" to lock the drive to 2 K0 |n0|.
// A run manifest (which embeds the resolved scenario under "scenario") is
// accepted wherever a config is.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cbho/errors.hpp"
#include "cbho/params.hpp"
#include "cbho/propagator.hpp"
#include "cbho/semiclassical.hpp"
#include "cbho/state.hpp"

namespace cbho {

using json = nlohmann::json;

inline constexpr int schema_version = 1;
inline constexpr int preset_version = 1;
inline constexpr double default_dt = 0.02;
inline constexpr long long default_samples_per_bloch_period = 200;

struct OutputSelection {
  bool series = true;
  bool site_snapshots = false;
  bool k_snapshots = false;
  bool final_state = true;
};

struct Scenario {
  std::string name;
  ModelParams model;
  InitialCondition ic;
  IntegratorConfig integrator;  // fully resolved: dt, t_end and strides in steps
  SiteWindow window;            // resolved
  std::string initial_state_file;  // warm restart source, empty for a Gaussian
  OutputSelection outputs;
  bool slow = false;

  double bloch_period() const;  // 2 pi / (2 K0 |n0|); throws when undefined
};

std::vector<std::string> preset_names();
json preset_config(const std::string& name);

// Builds a scenario from a config document (or manifest). Throws ConfigError.
Scenario scenario_from_json(const json& doc);
// Resolved document that reproduces the scenario exactly.
json scenario_to_json(const Scenario& s);

// Loads a preset name, config path, or manifest path.
json load_config(const std::string& preset_or_path);

struct CliOverrides {
  std::optional<double> dt;
  std::optional<std::string> t_end;  // number in hbar/E_R, or "<x>TB" in Bloch periods
  std::optional<double> phi;
  std::optional<double> alpha;
  std::optional<double> snapshots_per_bloch_period;
};
void apply_overrides(json& doc, const CliOverrides& o);

struct RunOutcome {
  RunResult result;
  std::filesystem::path out_dir;
  ExitCode code = ExitCode::ok;
  double wall_seconds = 0.0;
};

// Prepares the state, evolves, writes series.csv, snapshot matrices,
// final_state.csv and manifest.json into out_dir. Window overflow still
// writes the partial series and returns ExitCode::window_overflow.
RunOutcome run_scenario(const Scenario& s, const std::filesystem::path& out_dir);

struct SweepSpec {
  json base;  // config document
  std::string axis;  // short name (phi, alpha, omega_D, ...) or JSON pointer
  std::vector<double> values;
  int parallelism = 1;

  static SweepSpec from_json(const json& doc);
};

struct SweepPoint {
  double value = 0.0;
  std::string status;  // "ok", "window_overflow", "error: ..."
  double max_excursion = 0.0;
  double max_sigma_n = 0.0;
  std::optional<HarmonicFit> fit;
};

// Every point runs in out_dir/point_NNN with its own manifest; summary.csv
// collects one row per point. Point failures are recorded, not raised.
std::vector<SweepPoint> run_sweep(const SweepSpec& sw, const std::filesystem::path& out_dir);

struct CompareMetrics {
  HarmonicFit fit;
  bool fit_from_fallback = false;
  VelocityComparison eq7;
  VelocityComparison ode;
  // Largest distance between a zero crossing of the cycle-averaged quantum
  // velocity and the nearest crossing of the cycle-averaged closed-form curve, T_B units.
  std::optional<double> slow_crossing_offset;
};

// Fits the run in run_dir, evaluates the closed-form and ODE velocities on its
// time grid, writes compare.csv (t,v_quantum,v_eq7,v_ode) and compare.json.
CompareMetrics run_compare(const std::filesystem::path& run_dir,
                           const std::optional<HarmonicFit>& fallback = std::nullopt);

// Fits the harmonic model to run_dir/series.csv and writes fit.json.
HarmonicFit run_fit(const std::filesystem::path& run_dir);

// Integrates the local model for a scenario and writes trajectory.csv.
SemiclassicalTrajectory run_semiclassical(const Scenario& s, const std::filesystem::path& out_dir);

json fit_to_json(const HarmonicFit& f);

std::string version_string();

}  // namespace cbho
