#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cbho/observables.hpp"
#include "cbho/params.hpp"
#include "cbho/state.hpp"

namespace cbho {

// K(t) = K0 + K_D sin(omega_D t + phi), evaluated in closed form at every
// requested time.
struct DriveSchedule {
  double K0 = 0.0;
  double K_D = 0.0;
  double omega_D = 0.0;
  double phi = 0.0;

  static DriveSchedule from_model(const ModelParams& mp) {
    return {mp.K0, mp.K_D(), mp.omega_D, mp.phi};
  }
  double K(double t) const;
  double K_max() const;
};

struct IntegratorConfig {
  double dt = 0.05;
  double t_end = 0.0;
  long long sample_stride = 1;    // steps per observable sample
  long long snapshot_stride = 0;  // steps per density snapshot, 0 = none
  bool k_snapshots = false;       // also record |c_k|^2 at snapshot times
  double edge_guard = default_edge_guard;

  // Largest |eigenvalue| bound used for the RK4 stability check.
  static double spectral_bound(double J, const DriveSchedule& sched, const SiteWindow& w);
  // dt > 0, strides >= 0, and dt * E_max < 2.5.
  void validate(double J, const DriveSchedule& sched, const SiteWindow& w) const;
  long long steps() const;
};

struct DensitySnapshot {
  double t = 0.0;
  std::vector<double> density;
};

enum class RunStatus { completed, window_overflow };

struct RunResult {
  std::vector<ObservableRecord> series;
  std::vector<DensitySnapshot> site_snapshots;
  std::vector<DensitySnapshot> k_snapshots;  // on KGrid(window length)
  WavepacketState final_state;
  RunStatus status = RunStatus::completed;
  std::string message;
  long long steps_taken = 0;
};

using Observer = std::function<void(const WavepacketState&, const ObservableRecord&)>;

// RK4 stepper over a raw amplitude buffer whose first entry sits at site
// n_min. Stage buffers are allocated once; not thread-safe per instance.
class Rk4Stepper {
 public:
  Rk4Stepper(std::int64_t n_min, std::size_t length, double J);

  // out = H(K) c
  void hamiltonian(const cplx* c, cplx* out, double K) const;
  // Advances c from t to t + dt.
  void step(std::vector<cplx>& c, const DriveSchedule& sched, double t, double dt);

 private:
  void deriv(const cplx* c, cplx* out, double K) const;

  double J_;
  std::vector<double> n2_;
  std::vector<cplx> k1_, k2_, k3_, k4_, tmp_;
};

// h_n = -(J/2)(c_{n+1} + c_{n-1}) + K n^2 c_n with hard walls at the window
// edges; n is the absolute site index.
std::vector<cplx> apply_hamiltonian(const WavepacketState& s, double J, double K_t);

// One classical RK4 step of dc/dt = -i H(t) c with K sampled at t, t+dt/2, t+dt.
WavepacketState rk4_step(const WavepacketState& s, const DriveSchedule& sched, double J,
                         double dt);

// Fixed-step evolution with observables every sample_stride steps (and at the
// final step). Stops early with RunStatus::window_overflow when the edge
// density exceeds the guard at a sample; throws BlowupError on non-finite
// amplitudes.
RunResult evolve(WavepacketState state, const DriveSchedule& sched, double J,
                 const IntegratorConfig& cfg, const Observer& observer = {});

}  // namespace cbho
