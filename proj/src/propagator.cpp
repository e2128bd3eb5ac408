#include "cbho/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cbho/errors.hpp"

namespace cbho {

double DriveSchedule::K(double t) const { return K0 + K_D * std::sin(omega_D * t + phi); }

double DriveSchedule::K_max() const { return std::fabs(K0) + std::fabs(K_D); }

double IntegratorConfig::spectral_bound(double J, const DriveSchedule& sched,
                                        const SiteWindow& w) {
  const double n_edge = static_cast<double>(std::max(std::llabs(w.n_min), std::llabs(w.n_max)));
  return J + sched.K_max() * n_edge * n_edge;
}

void IntegratorConfig::validate(double J, const DriveSchedule& sched, const SiteWindow& w) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be non-negative");
  if (sample_stride < 1) throw DomainError("sample_stride must be at least 1");
  if (snapshot_stride < 0) throw DomainError("snapshot_stride must be non-negative");
  const double bound = dt * spectral_bound(J, sched, w);
  if (!(bound < 2.5))
    throw DomainError("dt * E_max = " + std::to_string(bound) + " violates the RK4 bound 2.5");
}

long long IntegratorConfig::steps() const { return std::llround(t_end / dt); }

namespace {

bool all_finite(std::span<const cplx> c) {
  for (const cplx& z : c)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

std::vector<double> densities(std::span<const cplx> c) {
  std::vector<double> out(c.size());
  std::transform(c.begin(), c.end(), out.begin(), [](const cplx& z) { return std::norm(z); });
  return out;
}

}  // namespace

Rk4Stepper::Rk4Stepper(std::int64_t n_min, std::size_t length, double J)
    : J_(J), n2_(length), k1_(length), k2_(length), k3_(length), k4_(length), tmp_(length) {
  for (std::size_t i = 0; i < length; ++i) {
    const double n = static_cast<double>(n_min + static_cast<std::int64_t>(i));
    n2_[i] = n * n;
  }
}

void Rk4Stepper::hamiltonian(const cplx* c, cplx* out, double K) const {
  const std::size_t len = n2_.size();
  const double hj = 0.5 * J_;
  for (std::size_t i = 0; i < len; ++i) {
    const cplx left = i > 0 ? c[i - 1] : cplx{};
    const cplx right = i + 1 < len ? c[i + 1] : cplx{};
    out[i] = -hj * (left + right) + (K * n2_[i]) * c[i];
  }
}

void Rk4Stepper::deriv(const cplx* c, cplx* out, double K) const {
  hamiltonian(c, out, K);
  // times -i
  for (std::size_t i = 0; i < n2_.size(); ++i) out[i] = cplx(out[i].imag(), -out[i].real());
}

void Rk4Stepper::step(std::vector<cplx>& c, const DriveSchedule& sched, double t, double dt) {
  const std::size_t len = c.size();
  const double half = 0.5 * dt;
  const double K_a = sched.K(t);
  const double K_b = sched.K(t + half);
  const double K_c = sched.K(t + dt);

  deriv(c.data(), k1_.data(), K_a);
  for (std::size_t i = 0; i < len; ++i) tmp_[i] = c[i] + half * k1_[i];
  deriv(tmp_.data(), k2_.data(), K_b);
  for (std::size_t i = 0; i < len; ++i) tmp_[i] = c[i] + half * k2_[i];
  deriv(tmp_.data(), k3_.data(), K_b);
  for (std::size_t i = 0; i < len; ++i) tmp_[i] = c[i] + dt * k3_[i];
  deriv(tmp_.data(), k4_.data(), K_c);
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < len; ++i) c[i] += w * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
}

std::vector<cplx> apply_hamiltonian(const WavepacketState& s, double J, double K_t) {
  const Rk4Stepper kernel(s.window().n_min, s.amplitudes().size(), J);
  std::vector<cplx> out(s.amplitudes().size());
  kernel.hamiltonian(s.amplitudes().data(), out.data(), K_t);
  return out;
}

WavepacketState rk4_step(const WavepacketState& s, const DriveSchedule& sched, double J,
                         double dt) {
  Rk4Stepper kernel(s.window().n_min, s.amplitudes().size(), J);
  std::vector<cplx> c(s.amplitudes().begin(), s.amplitudes().end());
  kernel.step(c, sched, s.time(), dt);
  if (!all_finite(c)) throw BlowupError("non-finite amplitudes after a single RK4 step", 1);
  return WavepacketState(s.window(), std::move(c), s.time() + dt);
}

RunResult evolve(WavepacketState state, const DriveSchedule& sched, double J,
                 const IntegratorConfig& cfg, const Observer& observer) {
  cfg.validate(J, sched, state.window());
  const long long n_steps = cfg.steps();
  const double t0 = state.time();

  std::vector<cplx> c(state.amplitudes().begin(), state.amplitudes().end());
  Rk4Stepper kernel(state.window().n_min, c.size(), J);
  const KGrid grid(c.size());

  RunResult result;
  result.series.reserve(static_cast<std::size_t>(n_steps / cfg.sample_stride + 2));

  auto sample = [&](long long step) -> bool {
    WavepacketState view(state.window(), c, t0 + static_cast<double>(step) * cfg.dt);
    if (!all_finite(c))
      throw BlowupError("non-finite amplitudes at step " + std::to_string(step), step);
    const ObservableRecord rec = observe(view, J);
    result.series.push_back(rec);
    if (observer) observer(view, rec);
    if (view.edge_density() > cfg.edge_guard) {
      result.status = RunStatus::window_overflow;
      result.message = "edge density " + std::to_string(view.edge_density()) +
                       " exceeds guard at step " + std::to_string(step) +
                       " (t=" + std::to_string(view.time()) + ")";
      return false;
    }
    return true;
  };
  auto snapshot = [&](long long step) {
    const double t = t0 + static_cast<double>(step) * cfg.dt;
    result.site_snapshots.push_back({t, densities(c)});
    if (cfg.k_snapshots) {
      WavepacketState view(state.window(), c, t);
      result.k_snapshots.push_back({t, densities(bz_transform(view, grid))});
    }
  };

  bool ok = sample(0);
  if (cfg.snapshot_stride > 0) snapshot(0);
  long long step = 0;
  while (ok && step < n_steps) {
    kernel.step(c, sched, t0 + static_cast<double>(step) * cfg.dt, cfg.dt);
    ++step;
    const bool at_sample = step % cfg.sample_stride == 0 || step == n_steps;
    if (at_sample) ok = sample(step);
    if (cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0) snapshot(step);
  }
  if (!all_finite(c))
    throw BlowupError("non-finite amplitudes at step " + std::to_string(step), step);

  result.steps_taken = step;
  result.final_state = WavepacketState(state.window(), std::move(c),
                                       t0 + static_cast<double>(step) * cfg.dt);
  return result;
}

}  // namespace cbho
