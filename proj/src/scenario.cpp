#include "cbho/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <thread>

#include "cbho/io.hpp"
#include "cbho/observables.hpp"

#ifndef CBHO_VERSION
#define CBHO_VERSION "unknown"
#endif

namespace cbho {

namespace fs = std::filesystem;

std::string version_string() { return CBHO_VERSION; }

double Scenario::bloch_period() const {
  const double wb = 2.0 * model.K0 * std::fabs(ic.n0);
  if (!(wb > 0.0)) throw ConfigError("Bloch period undefined (K0 = 0 or n0 = 0)");
  return 2.0 * std::numbers::pi / wb;
}

// ---------------------------------------------------------------------------
// presets

namespace {

json canonical_preset(const std::string& name, double phi, double alpha, double periods) {
  return json{
      {"schema_version", schema_version},
      {"preset_version", preset_version},
      {"name", name},
      {"units", "recoil"},
      {"model", {{"J", 0.024}, {"K0", 1.52e-5}, {"alpha", alpha}, {"omega_D", "omega_B"},
                 {"phi", phi}}},
      {"initial", {{"n0", 125.0}, {"k0", 0.0}, {"sigma_n", 3.16}}},
      {"integrator",
       {{"dt", default_dt},
        {"t_end_bloch_periods", periods},
        {"samples_per_bloch_period", default_samples_per_bloch_period},
        {"snapshots_per_bloch_period", 0},
        {"k_snapshots", false}}},
  };
}

json with_snapshots(json doc, int per_period) {
  doc["integrator"]["snapshots_per_bloch_period"] = per_period;
  doc["integrator"]["k_snapshots"] = true;
  return doc;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"bo-static", "fig2", "fig3", "fig3-long", "fig4a", "fig4c"};
}

json preset_config(const std::string& name) {
  constexpr double pi = std::numbers::pi;
  if (name == "bo-static") return canonical_preset(name, 0.0, 0.0, 3.0);
  if (name == "fig2") return with_snapshots(canonical_preset(name, 0.0, 1.0, 20.0), 20);
  if (name == "fig3") return canonical_preset(name, 0.0, 1.0, 40.0);
  if (name == "fig3-long") {
    json doc = canonical_preset(name, 0.0, 1.0, 730.0);
    doc["slow"] = true;
    return doc;
  }
  if (name == "fig4a") return with_snapshots(canonical_preset(name, -pi / 2, 1.0, 20.0), 20);
  if (name == "fig4c") return with_snapshots(canonical_preset(name, pi / 2, 1.0, 10.0), 20);
  throw ConfigError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

double number_at(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number_at(obj, key, where) : fallback;
}

json merge_preset(const json& doc) {
  if (!doc.contains("preset")) return doc;
  json base = preset_config(doc.at("preset").get<std::string>());
  json overlay = doc;
  overlay.erase("preset");
  base.merge_patch(overlay);
  return base;
}

const std::vector<std::string>& known_top_level_keys() {
  static const std::vector<std::string> keys{
      "schema_version", "preset_version", "preset", "name", "units", "model", "physical",
      "model_overrides", "initial", "initial_state_file", "integrator", "window", "outputs",
      "slow"};
  return keys;
}

}  // namespace

Scenario scenario_from_json(const json& input) {
  if (!input.is_object()) throw ConfigError("config must be a JSON object");
  const json doc = merge_preset(input.contains("scenario") ? input.at("scenario") : input);
  try {
    for (const auto& [key, _] : doc.items())
      if (std::find(known_top_level_keys().begin(), known_top_level_keys().end(), key) ==
          known_top_level_keys().end())
        throw ConfigError("unknown config key '" + key + "'");
    if (doc.value("schema_version", schema_version) != schema_version)
      throw ConfigError("unsupported schema_version");

    Scenario s;
    s.name = doc.value("name", std::string("run"));
    s.slow = doc.value("slow", false);
    const std::string units = doc.value("units", std::string("recoil"));

    // initial condition first: omega_D may refer to n0
    if (doc.contains("initial")) {
      const json& ini = doc.at("initial");
      s.ic.n0 = number_at(ini, "n0", "initial");
      s.ic.k0 = number_or(ini, "k0", 0.0, "initial");
      s.ic.sigma_n = number_at(ini, "sigma_n", "initial");
    }
    s.initial_state_file = doc.value("initial_state_file", std::string());
    if (!doc.contains("initial") && s.initial_state_file.empty())
      throw ConfigError("config needs 'initial' or 'initial_state_file'");

    json model_omega_D;
    if (units == "recoil") {
      if (!doc.contains("model")) throw ConfigError("recoil-unit config needs 'model'");
      const json& m = doc.at("model");
      s.model.J = number_at(m, "J", "model");
      s.model.K0 = number_at(m, "K0", "model");
      s.model.alpha = number_or(m, "alpha", 0.0, "model");
      s.model.phi = number_or(m, "phi", 0.0, "model");
      s.model.recoil_energy_joules = number_or(m, "recoil_energy_joules", 0.0, "model");
      model_omega_D = m.value("omega_D", json(0.0));
    } else if (units == "si") {
      if (!doc.contains("physical")) throw ConfigError("SI config needs 'physical'");
      const json& p = doc.at("physical");
      PhysicalParams pp;
      pp.atomic_mass = number_at(p, "atomic_mass", "physical");
      pp.lattice_period_d = number_at(p, "lattice_period", "physical");
      pp.lattice_depth_s = number_at(p, "lattice_depth_s", "physical");
      pp.trap_frequency = number_at(p, "trap_frequency", "physical");
      pp.drive_amplitude_alpha = number_or(p, "drive_amplitude_alpha", 0.0, "physical");
      pp.drive_phase_phi = number_or(p, "drive_phase_phi", 0.0, "physical");
      if (p.contains("drive_frequency") && p.at("drive_frequency").is_string()) {
        model_omega_D = p.at("drive_frequency");
      } else {
        pp.drive_frequency = number_or(p, "drive_frequency", 0.0, "physical");
      }
      s.model = derive_model(pp);
      if (!model_omega_D.is_string()) model_omega_D = s.model.omega_D;
      if (doc.contains("model_overrides")) {
        const json& o = doc.at("model_overrides");
        s.model.J = number_or(o, "J", s.model.J, "model_overrides");
        s.model.K0 = number_or(o, "K0", s.model.K0, "model_overrides");
      }
    } else {
      throw ConfigError("units must be 'recoil' or 'si'");
    }
    if (model_omega_D.is_string()) {
      if (model_omega_D.get<std::string>() != "omega_B")
        throw ConfigError("omega_D string value must be \"omega_B\"");
      if (s.initial_state_file.empty() == false && !doc.contains("initial"))
        throw ConfigError("omega_D = \"omega_B\" needs initial.n0");
      s.model.omega_D = 2.0 * s.model.K0 * std::fabs(s.ic.n0);
    } else if (model_omega_D.is_number()) {
      s.model.omega_D = model_omega_D.get<double>();
    } else {
      throw ConfigError("omega_D must be a number or \"omega_B\"");
    }
    s.model.validate();

    // integrator
    const json integ = doc.value("integrator", json::object());
    IntegratorConfig& ic = s.integrator;
    ic.dt = number_or(integ, "dt", default_dt, "integrator");
    if (!(ic.dt > 0.0)) throw ConfigError("integrator.dt must be positive");
    auto bloch = [&]() { return s.bloch_period(); };
    if (integ.contains("t_end")) {
      ic.t_end = number_at(integ, "t_end", "integrator");
    } else if (integ.contains("t_end_bloch_periods")) {
      ic.t_end = number_at(integ, "t_end_bloch_periods", "integrator") * bloch();
    } else {
      throw ConfigError("integrator needs 't_end' or 't_end_bloch_periods'");
    }
    auto per_period_stride = [&](double per_period) {
      if (per_period <= 0.0) return 0LL;
      return std::max(1LL, std::llround(bloch() / (ic.dt * per_period)));
    };
    if (integ.contains("sample_stride")) {
      ic.sample_stride = static_cast<long long>(number_at(integ, "sample_stride", "integrator"));
    } else {
      const double per = number_or(integ, "samples_per_bloch_period",
                                   static_cast<double>(default_samples_per_bloch_period),
                                   "integrator");
      ic.sample_stride = s.model.K0 > 0.0 && s.ic.n0 != 0.0 ? per_period_stride(per) : 100;
    }
    if (integ.contains("snapshot_stride")) {
      ic.snapshot_stride =
          static_cast<long long>(number_at(integ, "snapshot_stride", "integrator"));
    } else {
      const double per = number_or(integ, "snapshots_per_bloch_period", 0.0, "integrator");
      ic.snapshot_stride = per > 0.0 ? per_period_stride(per) : 0;
    }
    ic.k_snapshots = integ.value("k_snapshots", false);
    ic.edge_guard = number_or(integ, "edge_guard", default_edge_guard, "integrator");

    if (doc.contains("window")) {
      const json& w = doc.at("window");
      s.window = {static_cast<std::int64_t>(number_at(w, "n_min", "window")),
                  static_cast<std::int64_t>(number_at(w, "n_max", "window"))};
    } else if (doc.contains("initial")) {
      s.window = default_window(s.ic, s.model, ic.t_end);
    } else {
      std::ifstream is(s.initial_state_file);
      if (!is) throw IoError("cannot open initial state " + s.initial_state_file);
      s.window = read_state_csv(is).window();
    }
    s.window.validate();

    const json outs = doc.value("outputs", json::object());
    s.outputs.series = outs.value("series", true);
    s.outputs.final_state = outs.value("final_state", true);
    s.outputs.site_snapshots = ic.snapshot_stride > 0;
    s.outputs.k_snapshots = ic.snapshot_stride > 0 && ic.k_snapshots;
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json scenario_to_json(const Scenario& s) {
  json doc{
      {"schema_version", schema_version},
      {"name", s.name},
      {"units", "recoil"},
      {"model",
       {{"J", s.model.J},
        {"K0", s.model.K0},
        {"alpha", s.model.alpha},
        {"omega_D", s.model.omega_D},
        {"phi", s.model.phi},
        {"recoil_energy_joules", s.model.recoil_energy_joules}}},
      {"initial", {{"n0", s.ic.n0}, {"k0", s.ic.k0}, {"sigma_n", s.ic.sigma_n}}},
      {"integrator",
       {{"dt", s.integrator.dt},
        {"t_end", s.integrator.t_end},
        {"sample_stride", s.integrator.sample_stride},
        {"snapshot_stride", s.integrator.snapshot_stride},
        {"k_snapshots", s.integrator.k_snapshots},
        {"edge_guard", s.integrator.edge_guard}}},
      {"window", {{"n_min", s.window.n_min}, {"n_max", s.window.n_max}}},
      {"outputs", {{"series", s.outputs.series}, {"final_state", s.outputs.final_state}}},
      {"slow", s.slow},
  };
  if (!s.initial_state_file.empty()) doc["initial_state_file"] = s.initial_state_file;
  return doc;
}

json load_config(const std::string& preset_or_path) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), preset_or_path) != names.end())
    return preset_config(preset_or_path);
  const fs::path p(preset_or_path);
  if (!fs::exists(p)) throw ConfigError("no preset or file named '" + preset_or_path + "'");
  try {
    return json::parse(io::read_text(p));
  } catch (const json::parse_error& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

void apply_overrides(json& doc, const CliOverrides& o) {
  json& target = doc.contains("scenario") ? doc["scenario"] : doc;
  auto model_key = [&]() -> json& {
    if (target.value("units", std::string("recoil")) == "si") return target["physical"];
    return target["model"];
  };
  const bool si = target.value("units", std::string("recoil")) == "si";
  if (o.phi) model_key()[si ? "drive_phase_phi" : "phi"] = *o.phi;
  if (o.alpha) model_key()[si ? "drive_amplitude_alpha" : "alpha"] = *o.alpha;
  json& integ = target["integrator"];
  if (o.dt) integ["dt"] = *o.dt;
  if (o.t_end) {
    const std::string& v = *o.t_end;
    integ.erase("t_end");
    integ.erase("t_end_bloch_periods");
    try {
      if (v.size() > 2 && v.substr(v.size() - 2) == "TB")
        integ["t_end_bloch_periods"] = std::stod(v.substr(0, v.size() - 2));
      else
        integ["t_end"] = std::stod(v);
    } catch (const std::exception&) {
      throw ConfigError("--t-end expects a number or '<periods>TB'");
    }
  }
  if (o.snapshots_per_bloch_period) {
    integ.erase("snapshot_stride");
    integ["snapshots_per_bloch_period"] = *o.snapshots_per_bloch_period;
    integ["k_snapshots"] = *o.snapshots_per_bloch_period > 0;
  }
}

// ---------------------------------------------------------------------------
// runs

namespace {

const char* status_name(RunStatus st) {
  return st == RunStatus::completed ? "completed" : "window_overflow";
}

json derived_json(const Scenario& s) {
  json d = json::object();
  if (s.ic.n0 != 0.0) {
    const DerivedScales sc = derived_scales(s.model, s.ic.n0);
    d["omega_B"] = sc.omega_B;
    if (sc.n_c) d["n_c"] = *sc.n_c;
    if (sc.T_B) d["T_B"] = *sc.T_B;
    if (sc.T_HO) d["T_HO"] = *sc.T_HO;
  }
  d["steps"] = s.integrator.steps();
  d["K_D"] = s.model.K_D();
  d["dt_times_E_max"] =
      s.integrator.dt * IntegratorConfig::spectral_bound(s.model.J, DriveSchedule::from_model(s.model),
                                                         s.window);
  return d;
}

WavepacketState prepare(const Scenario& s) {
  if (!s.initial_state_file.empty()) {
    std::ifstream is(s.initial_state_file);
    if (!is) throw IoError("cannot open initial state " + s.initial_state_file);
    WavepacketState st = read_state_csv(is);
    if (!(st.window() == s.window))
      throw ConfigError("initial state window does not match the configured window");
    return st;
  }
  return init_gaussian(s.ic, s.window);
}

}  // namespace

RunOutcome run_scenario(const Scenario& s, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);

  RunOutcome out;
  out.out_dir = out_dir;
  out.result = evolve(prepare(s), DriveSchedule::from_model(s.model), s.model.J, s.integrator);
  out.code = out.result.status == RunStatus::completed ? ExitCode::ok : ExitCode::window_overflow;

  std::vector<std::string> files;
  if (s.outputs.series) {
    io::write_table(out_dir / "series.csv", io::series_table(out.result.series));
    files.emplace_back("series.csv");
  }
  if (s.outputs.site_snapshots) {
    std::vector<double> sites;
    for (auto n = s.window.n_min; n <= s.window.n_max; ++n) sites.push_back(static_cast<double>(n));
    io::write_snapshots(out_dir / "snapshots_n.csv", sites, out.result.site_snapshots);
    files.emplace_back("snapshots_n.csv");
  }
  if (s.outputs.k_snapshots) {
    const KGrid grid(static_cast<std::size_t>(s.window.length()));
    io::write_snapshots(out_dir / "snapshots_k.csv", grid.points(), out.result.k_snapshots);
    files.emplace_back("snapshots_k.csv");
  }
  if (s.outputs.final_state) {
    std::ofstream os(out_dir / "final_state.csv");
    if (!os) throw IoError("cannot write final_state.csv");
    write_state_csv(os, out.result.final_state);
    files.emplace_back("final_state.csv");
  }

  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest{
      {"schema_version", schema_version},
      {"kind", "run-manifest"},
      {"version", version_string()},
      {"seedless", true},
      {"scenario", scenario_to_json(s)},
      {"derived", derived_json(s)},
      {"status", status_name(out.result.status)},
      {"message", out.result.message},
      {"steps_taken", out.result.steps_taken},
      {"exit_code", static_cast<int>(out.code)},
      {"wall_clock_seconds", out.wall_seconds},
      {"files", files},
  };
  io::write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return out;
}

SweepSpec SweepSpec::from_json(const json& doc) {
  try {
    SweepSpec sw;
    if (!doc.contains("base")) throw ConfigError("sweep spec needs 'base'");
    sw.base = doc.at("base");
    if (sw.base.is_string()) sw.base = load_config(sw.base.get<std::string>());
    sw.axis = doc.at("axis").get<std::string>();
    sw.values = doc.at("values").get<std::vector<double>>();
    sw.parallelism = doc.value("parallelism", 1);
    if (sw.parallelism < 1) throw ConfigError("sweep parallelism must be at least 1");
    return sw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep spec: ") + e.what());
  }
}

namespace {

json::json_pointer axis_pointer(const std::string& axis, const json& base) {
  if (!axis.empty() && axis.front() == '/') return json::json_pointer(axis);
  const bool si = base.value("units", std::string("recoil")) == "si";
  if (axis == "phi") return json::json_pointer(si ? "/physical/drive_phase_phi" : "/model/phi");
  if (axis == "alpha")
    return json::json_pointer(si ? "/physical/drive_amplitude_alpha" : "/model/alpha");
  if (axis == "omega_D")
    return json::json_pointer(si ? "/physical/drive_frequency" : "/model/omega_D");
  if (axis == "J" || axis == "K0") return json::json_pointer("/model/" + axis);
  if (axis == "n0" || axis == "k0" || axis == "sigma_n")
    return json::json_pointer("/initial/" + axis);
  if (axis == "dt" || axis == "t_end" || axis == "t_end_bloch_periods")
    return json::json_pointer("/integrator/" + axis);
  throw ConfigError("unknown sweep axis '" + axis + "'");
}

SweepPoint run_point(const SweepSpec& sw, std::size_t i, const fs::path& dir) {
  SweepPoint pt;
  pt.value = sw.values[i];
  try {
    json doc = merge_preset(sw.base);
    doc[axis_pointer(sw.axis, doc)] = sw.values[i];
    if (sw.axis == "t_end") doc["integrator"].erase("t_end_bloch_periods");
    Scenario s = scenario_from_json(doc);
    s.name += "/" + sw.axis + "=" + io::fmt(sw.values[i]);
    const RunOutcome ro = run_scenario(s, dir);
    pt.status = ro.code == ExitCode::ok ? "ok" : "window_overflow";
    double lo = 0.0, hi = 0.0;
    std::vector<double> t, n;
    for (std::size_t k = 0; k < ro.result.series.size(); ++k) {
      const auto& r = ro.result.series[k];
      if (k == 0 || r.mean_n < lo) lo = r.mean_n;
      if (k == 0 || r.mean_n > hi) hi = r.mean_n;
      pt.max_sigma_n = std::max(pt.max_sigma_n, r.sigma_n);
      t.push_back(r.t);
      n.push_back(r.mean_n);
    }
    pt.max_excursion = hi - lo;
    try {
      pt.fit = fit_harmonic(t, n, s.bloch_period(), s.model.K0);
    } catch (const Error&) {
      pt.fit.reset();
    }
  } catch (const std::exception& e) {
    pt.status = std::string("error: ") + e.what();
  }
  return pt;
}

}  // namespace

std::vector<SweepPoint> run_sweep(const SweepSpec& sw, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<SweepPoint> points(sw.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      char name[32];
      std::snprintf(name, sizeof name, "point_%03zu", i);
      points[i] = run_point(sw, i, out_dir / name);
    }
  };
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(sw.parallelism), points.size());
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  if (n_workers > 0) worker();
  pool.clear();

  std::ofstream os(out_dir / "summary.csv");
  if (!os) throw IoError("cannot write sweep summary");
  os << "index," << sw.axis << ",status,max_excursion,max_sigma_n,delta_omega,delta_n\n";
  const std::string nan = "nan";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const SweepPoint& p = points[i];
    std::string status = p.status;
    std::replace(status.begin(), status.end(), ',', ';');
    os << i << ',' << io::fmt(p.value) << ',' << status << ',' << io::fmt(p.max_excursion) << ','
       << io::fmt(p.max_sigma_n) << ',' << (p.fit ? io::fmt(p.fit->delta_omega) : nan) << ','
       << (p.fit ? io::fmt(p.fit->delta_n) : nan) << '\n';
  }
  return points;
}

json fit_to_json(const HarmonicFit& f) {
  return json{{"delta_n", f.delta_n},         {"delta_omega", f.delta_omega},
              {"gamma", f.gamma},             {"delta_F", f.delta_F},
              {"offset", f.offset},           {"residual_rms", f.residual_rms}};
}

namespace {

struct LoadedRun {
  Scenario scenario;
  std::vector<double> t, mean_n, v_g;
};

LoadedRun load_run(const fs::path& run_dir) {
  LoadedRun r;
  const json manifest = json::parse(io::read_text(run_dir / "manifest.json"));
  r.scenario = scenario_from_json(manifest);
  const io::Table table = io::read_table(run_dir / "series.csv");
  r.t = table.values("t");
  r.mean_n = table.values("mean_n");
  r.v_g = table.values("v_g");
  return r;
}

}  // namespace

HarmonicFit run_fit(const fs::path& run_dir) {
  const LoadedRun run = load_run(run_dir);
  const double T_B = run.scenario.bloch_period();
  const HarmonicFit fit = fit_harmonic(run.t, run.mean_n, T_B, run.scenario.model.K0);
  json doc = fit_to_json(fit);
  doc["period_bloch_periods"] = 2.0 * std::numbers::pi / fit.delta_omega / T_B;
  doc["T_B"] = T_B;
  io::write_text(run_dir / "fit.json", doc.dump(2) + "\n");
  return fit;
}

CompareMetrics run_compare(const fs::path& run_dir, const std::optional<HarmonicFit>& fallback) {
  const LoadedRun run = load_run(run_dir);
  const Scenario& s = run.scenario;
  const double T_B = s.bloch_period();

  CompareMetrics m;
  try {
    m.fit = fit_harmonic(run.t, run.mean_n, T_B, s.model.K0);
  } catch (const FitError&) {
    if (!fallback) throw;
    m.fit = *fallback;
    m.fit_from_fallback = true;
  }

  const double k0v = to_velocity_k0(s.ic.k0);
  const Eq7Params p = Eq7Params::from_model(s.model, s.ic.n0, k0v, m.fit);
  const std::vector<double> v_eq7 = eval_eq7(p, run.t);

  // ODE on a step that divides the sample interval and stays below 1 hbar/E_R.
  const double h = run.t.size() > 1 ? run.t[1] - run.t[0] : s.integrator.dt;
  const long long sub = std::max(1LL, static_cast<long long>(std::ceil(h / 1.0)));
  const double t0 = run.t.empty() ? 0.0 : run.t.front();
  const SemiclassicalTrajectory tr = integrate_local_model(
      s.model, s.ic.n0, k0v, run.t.empty() ? 0.0 : run.t.back() - t0, h / static_cast<double>(sub), sub);
  std::vector<double> t_ode(tr.times.size()), v_ode(tr.times.size());
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    t_ode[i] = tr.times[i] + t0;
    v_ode[i] = tr.velocity(i, s.model.J);
  }

  m.eq7 = compare_velocities(run.t, run.v_g, run.t, v_eq7, s.model.J);
  m.ode = compare_velocities(run.t, run.v_g, t_ode, v_ode, s.model.J);

  std::vector<double> ta, tb;
  const auto vq_avg = cycle_average(run.t, run.v_g, T_B, ta);
  const auto ve_avg = cycle_average(run.t, v_eq7, T_B, tb);
  // Residual Bloch leakage can make the averaged curves graze zero several
  // times within one period; those count as one crossing.
  const auto zq = merge_crossings(zero_crossings(ta, vq_avg), T_B);
  const auto ze = merge_crossings(zero_crossings(tb, ve_avg), T_B);
  if (!zq.empty() && !ze.empty()) {
    double worst = 0.0;
    for (double z : zq) {
      double best = std::numeric_limits<double>::infinity();
      for (double y : ze) best = std::min(best, std::fabs(z - y));
      worst = std::max(worst, best);
    }
    m.slow_crossing_offset = worst / T_B;
  }

  io::Table table;
  table.header = {"t", "v_quantum", "v_eq7", "v_ode"};
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    const double vo = i < v_ode.size() ? v_ode[i] : std::numeric_limits<double>::quiet_NaN();
    table.rows.push_back({run.t[i], run.v_g[i], v_eq7[i], vo});
  }
  io::write_table(run_dir / "compare.csv", table);

  json doc{{"fit", fit_to_json(m.fit)},
           {"fit_from_fallback", m.fit_from_fallback},
           {"eq7", {{"rms_error", m.eq7.rms_error}, {"normalized_rms", m.eq7.normalized_rms}}},
           {"ode", {{"rms_error", m.ode.rms_error}, {"normalized_rms", m.ode.normalized_rms}}}};
  if (m.slow_crossing_offset) doc["slow_crossing_offset_bloch_periods"] = *m.slow_crossing_offset;
  io::write_text(run_dir / "compare.json", doc.dump(2) + "\n");
  return m;
}

SemiclassicalTrajectory run_semiclassical(const Scenario& s, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const double dt = std::min(1.0, s.integrator.dt * static_cast<double>(s.integrator.sample_stride));
  const SemiclassicalTrajectory tr =
      integrate_local_model(s.model, s.ic.n0, to_velocity_k0(s.ic.k0), s.integrator.t_end, dt);
  io::Table table;
  table.header = {"t", "k_tilde", "n", "v"};
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    table.rows.push_back({tr.times[i], tr.k_tilde[i], tr.n[i], tr.velocity(i, s.model.J)});
  io::write_table(out_dir / "trajectory.csv", table);
  json manifest{{"schema_version", schema_version},
                {"kind", "semiclassical-manifest"},
                {"version", version_string()},
                {"scenario", scenario_to_json(s)},
                {"dt", dt},
                {"files", {"trajectory.csv"}}};
  io::write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return tr;
}

}  // namespace cbho
