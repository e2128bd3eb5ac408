// Command-line runner: presets, config runs, sweeps, fits and model comparison.

#include <cstdio>
#include <iostream>
#include <numbers>

#include "CLI11.hpp"

#include "cbho/errors.hpp"
#include "cbho/io.hpp"
#include "cbho/scenario.hpp"

namespace {

using namespace cbho;

void print_run(const RunOutcome& ro) {
  const auto& r = ro.result;
  std::printf("%s: %lld steps, %zu samples, %.2f s -> %s\n",
              r.status == RunStatus::completed ? "completed" : "window overflow", r.steps_taken,
              r.series.size(), ro.wall_seconds, ro.out_dir.string().c_str());
  if (!r.message.empty()) std::printf("  %s\n", r.message.c_str());
}

void print_fit(const HarmonicFit& f, double T_B) {
  std::printf("  delta_n     = %.6g sites\n", f.delta_n);
  std::printf("  delta_omega = %.6g E_R/hbar (period %.4g T_B)\n", f.delta_omega,
              2.0 * std::numbers::pi / f.delta_omega / T_B);
  std::printf("  gamma       = %.6g rad\n", f.gamma);
  std::printf("  delta_F     = %.6g E_R\n", f.delta_F);
  std::printf("  residual    = %.4g sites\n", f.residual_rms);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tight-binding wavepacket dynamics in a parametrically driven trap"};
  app.require_subcommand(1);

  CliOverrides ov;
  std::string out_dir = "out";
  bool seedless = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dt", ov.dt, "time step in hbar/E_R");
    sub->add_option("--t-end", ov.t_end, "horizon in hbar/E_R, or '<x>TB' in Bloch periods");
    sub->add_option("--phi", ov.phi, "drive phase (rad)");
    sub->add_option("--alpha", ov.alpha, "relative drive amplitude");
    sub->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    sub->add_option("--snapshots", ov.snapshots_per_bloch_period,
                    "density snapshots per Bloch period (0 disables)");
    sub->add_flag("--seedless", seedless, "no-op: every run is deterministic");
  };

  std::string source;
  auto* run = app.add_subcommand("run", "run a preset or config file");
  run->add_option("config", source, "preset name, config JSON or run manifest")->required();
  add_common(run);

  std::string sweep_spec;
  int parallelism = 0;
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  sweep->add_option("spec", sweep_spec, "sweep spec JSON")->required();
  sweep->add_option("-j,--jobs", parallelism, "worker count (overrides the spec)");
  add_common(sweep);

  std::string run_dir;
  std::optional<double> fb_dn, fb_dw, fb_gamma;
  auto* compare = app.add_subcommand("compare", "compare a run against the local model");
  compare->add_option("run_dir", run_dir, "directory of a completed run")->required();
  compare->add_option("--delta-n", fb_dn, "fallback slow amplitude (sites) if the fit fails");
  compare->add_option("--delta-omega", fb_dw, "fallback slow frequency (E_R/hbar)");
  compare->add_option("--gamma", fb_gamma, "fallback slow phase (rad)");

  auto* fit = app.add_subcommand("fit", "fit the slow harmonic transport of a run");
  fit->add_option("run_dir", run_dir, "directory of a completed run")->required();

  auto* semi = app.add_subcommand("semiclassical", "integrate the local acceleration model");
  semi->add_option("config", source, "preset name, config JSON or run manifest")->required();
  add_common(semi);

  auto* presets = app.add_subcommand("presets", "list the built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (*run) {
      json doc = load_config(source);
      apply_overrides(doc, ov);
      const Scenario s = scenario_from_json(doc);
      const RunOutcome ro = run_scenario(s, out_dir);
      print_run(ro);
      return static_cast<int>(ro.code);
    }
    if (*sweep) {
      json doc = json::parse(io::read_text(sweep_spec));
      SweepSpec sw = SweepSpec::from_json(doc);
      apply_overrides(sw.base, ov);
      if (parallelism > 0) sw.parallelism = parallelism;
      const auto points = run_sweep(sw, out_dir);
      for (const auto& p : points)
        std::printf("%s=%-12.6g %-16s excursion %.3g  max sigma %.3g  delta_n %s\n",
                    sw.axis.c_str(), p.value, p.status.c_str(), p.max_excursion, p.max_sigma_n,
                    p.fit ? io::fmt(p.fit->delta_n).c_str() : "-");
      std::printf("summary: %s/summary.csv\n", out_dir.c_str());
      return 0;
    }
    if (*compare) {
      std::optional<HarmonicFit> fallback;
      if (fb_dn && fb_dw) {
        HarmonicFit f;
        f.delta_n = *fb_dn;
        f.delta_omega = *fb_dw;
        f.gamma = fb_gamma.value_or(0.0);
        const json manifest = json::parse(io::read_text(std::filesystem::path(run_dir) / "manifest.json"));
        f.delta_F = 2.0 * scenario_from_json(manifest).model.K0 * f.delta_n;
        fallback = f;
      }
      const CompareMetrics m = run_compare(run_dir, fallback);
      std::printf("fit%s:\n", m.fit_from_fallback ? " (fallback)" : "");
      const json manifest = json::parse(io::read_text(std::filesystem::path(run_dir) / "manifest.json"));
      print_fit(m.fit, scenario_from_json(manifest).bloch_period());
      std::printf("closed form: rms %.4g  normalized %.4g\n", m.eq7.rms_error, m.eq7.normalized_rms);
      std::printf("local ODE:   rms %.4g  normalized %.4g\n", m.ode.rms_error, m.ode.normalized_rms);
      if (m.slow_crossing_offset)
        std::printf("slow zero-crossing offset: %.3g T_B\n", *m.slow_crossing_offset);
      return 0;
    }
    if (*fit) {
      const HarmonicFit f = run_fit(run_dir);
      const json manifest = json::parse(io::read_text(std::filesystem::path(run_dir) / "manifest.json"));
      print_fit(f, scenario_from_json(manifest).bloch_period());
      return 0;
    }
    if (*semi) {
      json doc = load_config(source);
      apply_overrides(doc, ov);
      const Scenario s = scenario_from_json(doc);
      const auto tr = run_semiclassical(s, out_dir);
      std::printf("local model: %zu samples -> %s/trajectory.csv\n", tr.times.size(), out_dir.c_str());
      return 0;
    }
    if (*presets) {
      for (const auto& name : preset_names()) std::printf("%s\n", name.c_str());
      return 0;
    }
  } catch (const cbho::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.exit_code());
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(ExitCode::config_invalid);
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(ExitCode::io_failure);
  }
  return 0;
}
