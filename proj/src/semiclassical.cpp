#include "cbho/semiclassical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "cbho/errors.hpp"

namespace cbho {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}
}  // namespace

double SemiclassicalTrajectory::velocity(std::size_t i, double J) const {
  return J * std::sin(k_tilde.at(i));
}

Eq7Params Eq7Params::from_model(const ModelParams& mp, double n0, double k0_velocity,
                                const HarmonicFit& fit) {
  Eq7Params p;
  p.k0 = k0_velocity;
  p.F_n0 = 2.0 * mp.K0 * n0;
  p.alpha = mp.alpha;
  p.omega_D = mp.omega_D;
  p.phi = mp.phi;
  p.delta_F = fit.delta_F;
  p.delta_omega = fit.delta_omega;
  p.gamma = fit.gamma;
  p.J = mp.J;
  return p;
}

SemiclassicalTrajectory integrate_local_model(const ModelParams& mp, double n_init,
                                              double k_init, double t_end, double dt,
                                              long long sample_stride) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (!(t_end >= 0.0)) throw DomainError("t_end must be non-negative");
  if (sample_stride < 1) throw DomainError("sample_stride must be at least 1");

  const double K_D = mp.K_D();
  auto K = [&](double t) { return mp.K0 + K_D * std::sin(mp.omega_D * t + mp.phi); };
  // y = (k, n)
  auto rhs = [&](double t, const std::array<double, 2>& y) {
    return std::array<double, 2>{-2.0 * K(t) * y[1], mp.J * std::sin(y[0])};
  };

  const long long steps = std::llround(t_end / dt);
  SemiclassicalTrajectory tr;
  const std::size_t cap = static_cast<std::size_t>(steps / sample_stride + 2);
  tr.times.reserve(cap);
  tr.k_tilde.reserve(cap);
  tr.n.reserve(cap);

  std::array<double, 2> y{two_pi * k_init, n_init};
  auto store = [&](double t) {
    tr.times.push_back(t);
    tr.k_tilde.push_back(y[0]);
    tr.n.push_back(y[1]);
  };
  store(0.0);
  for (long long s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    const auto a = rhs(t, y);
    const auto b = rhs(t + 0.5 * dt, {y[0] + 0.5 * dt * a[0], y[1] + 0.5 * dt * a[1]});
    const auto c = rhs(t + 0.5 * dt, {y[0] + 0.5 * dt * b[0], y[1] + 0.5 * dt * b[1]});
    const auto d = rhs(t + dt, {y[0] + dt * c[0], y[1] + dt * c[1]});
    for (int i = 0; i < 2; ++i) y[i] += dt / 6.0 * (a[i] + 2.0 * (b[i] + c[i]) + d[i]);
    if (!std::isfinite(y[0]) || !std::isfinite(y[1]))
      throw BlowupError("local model diverged at step " + std::to_string(s + 1), s + 1);
    if ((s + 1) % sample_stride == 0 || s + 1 == steps) store(static_cast<double>(s + 1) * dt);
  }
  return tr;
}

double eval_eq7(const Eq7Params& p, double t) {
  auto ratio = [](double num, double den, const char* what) {
    if (num == 0.0) return 0.0;
    if (den == 0.0)
      throw ResonanceError(std::string("resonant denominator (") + what +
                           " = 0); integrate the local model instead");
    return num / den;
  };
  const double drive = ratio(p.F_n0 * p.alpha, p.omega_D, "omega_D");
  const double slow = ratio(p.delta_F, p.delta_omega, "delta_omega");

  double phase = two_pi * p.k0 - p.F_n0 * t;
  if (drive != 0.0) phase += drive * (std::cos(p.omega_D * t + p.phi) - std::cos(p.phi));
  if (slow != 0.0)
    phase += slow * (std::cos(p.delta_omega * t + p.gamma) - std::cos(p.gamma));
  for (const double s : {1.0, -1.0}) {
    const double w = p.omega_D + s * p.delta_omega;
    const double amp = ratio(p.delta_F * p.alpha, w, "omega_D +/- delta_omega");
    if (amp == 0.0) continue;
    const double ph = p.phi + s * p.gamma;
    phase += s * amp * (std::sin(w * t + ph) - std::sin(ph));
  }
  return p.J * std::sin(phase);
}

std::vector<double> eval_eq7(const Eq7Params& p, std::span<const double> times) {
  std::vector<double> out(times.size());
  std::transform(times.begin(), times.end(), out.begin(),
                 [&](double t) { return eval_eq7(p, t); });
  return out;
}

std::vector<double> cycle_average(std::span<const double> times, std::span<const double> x,
                                  double period, std::vector<double>& out_times) {
  out_times.clear();
  if (times.size() != x.size()) throw DomainError("cycle_average: length mismatch");
  if (times.size() < 3) return {};
  const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  const auto half = static_cast<std::size_t>(std::llround(0.5 * period / h));
  if (half == 0) throw DomainError("cycle_average: period shorter than the sample spacing");
  const std::size_t width = 2 * half;  // intervals per window
  std::vector<double> out;
  if (times.size() <= width) return out;

  // Running trapezoid sum over [i - half, i + half].
  double inner = 0.0;
  for (std::size_t j = 1; j < width; ++j) inner += x[j];
  for (std::size_t i = half; i + half < x.size(); ++i) {
    const std::size_t lo = i - half, hi = i + half;
    if (i > half) inner += x[hi - 1] - x[lo];
    const double trap = inner + 0.5 * (x[lo] + x[hi]);
    out.push_back(trap / static_cast<double>(width));
    out_times.push_back(times[i]);
  }
  return out;
}

namespace {

struct SineLsq {
  double offset, a, b, rss;
};

// Least squares for x = offset + a sin(w t) + b cos(w t).
SineLsq solve_sine(std::span<const double> t, std::span<const double> x, double w) {
  std::array<std::array<double, 3>, 3> m{};
  std::array<double, 3> r{};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::array<double, 3> f{1.0, std::sin(w * t[i]), std::cos(w * t[i])};
    for (int p = 0; p < 3; ++p) {
      r[p] += f[p] * x[i];
      for (int q = 0; q < 3; ++q) m[p][q] += f[p] * f[q];
    }
  }
  // Gaussian elimination with partial pivoting on the 3x3 normal equations.
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int row = col + 1; row < 3; ++row)
      if (std::fabs(m[row][col]) > std::fabs(m[piv][col])) piv = row;
    std::swap(m[col], m[piv]);
    std::swap(r[col], r[piv]);
    if (m[col][col] == 0.0) throw FitError("singular sine least-squares system");
    for (int row = col + 1; row < 3; ++row) {
      const double f = m[row][col] / m[col][col];
      for (int q = col; q < 3; ++q) m[row][q] -= f * m[col][q];
      r[row] -= f * r[col];
    }
  }
  std::array<double, 3> c{};
  for (int row = 2; row >= 0; --row) {
    double acc = r[row];
    for (int q = row + 1; q < 3; ++q) acc -= m[row][q] * c[q];
    c[row] = acc / m[row][row];
  }
  SineLsq out{c[0], c[1], c[2], 0.0};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = x[i] - (out.offset + out.a * std::sin(w * t[i]) + out.b * std::cos(w * t[i]));
    out.rss += e * e;
  }
  return out;
}

}  // namespace

HarmonicFit fit_harmonic(std::span<const double> times, std::span<const double> mean_n,
                         double T_B, double K0) {
  if (times.size() != mean_n.size()) throw DomainError("fit_harmonic: length mismatch");
  if (!(T_B > 0.0)) throw DomainError("fit_harmonic: T_B must be positive");

  std::vector<double> ta;
  const std::vector<double> xa = cycle_average(times, mean_n, T_B, ta);
  if (xa.size() < 16) throw FitError("series too short for a cycle-averaged fit");

  double mean = 0.0;
  for (double v : xa) mean += v;
  mean /= static_cast<double>(xa.size());

  // Periodogram on an oversampled grid from half the fundamental up to half
  // the Bloch frequency.
  const double span = ta.back() - ta.front();
  const double fundamental = two_pi / span;
  constexpr int oversample = 8;
  const double dw = fundamental / oversample;
  const double w_max = std::numbers::pi / T_B;
  double best_w = 0.0, best_p = -1.0;
  std::vector<double> powers;
  for (double w = 0.5 * fundamental; w <= w_max; w += dw) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < xa.size(); ++i) {
      re += (xa[i] - mean) * std::cos(w * ta[i]);
      im += (xa[i] - mean) * std::sin(w * ta[i]);
    }
    const double p = re * re + im * im;
    powers.push_back(p);
    if (p > best_p) {
      best_p = p;
      best_w = w;
    }
  }
  if (powers.size() < 3) throw FitError("frequency grid too small; series spans too few periods");
  std::vector<double> sorted = powers;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double amp = 2.0 * std::sqrt(best_p) / static_cast<double>(xa.size());
  if (!(amp > 1e-9) || !(best_p > 10.0 * median))
    throw FitError("no spectral peak above the noise floor");

  // Golden-section refinement of the frequency on the residual.
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best_w - dw, hi = best_w + dw;
  double c = hi - invphi * (hi - lo), d = lo + invphi * (hi - lo);
  double fc = solve_sine(ta, xa, c).rss, fd = solve_sine(ta, xa, d).rss;
  for (int it = 0; it < 60; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = solve_sine(ta, xa, c).rss;
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = solve_sine(ta, xa, d).rss;
    }
  }
  const double w = 0.5 * (lo + hi);
  const SineLsq sol = solve_sine(ta, xa, w);

  // Undo the moving average's gain at w. The trapezoid window is symmetric,
  // so the phase is untouched.
  const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  const auto half = static_cast<long long>(std::llround(0.5 * T_B / h));
  double gain = 1.0 + std::cos(w * h * static_cast<double>(half));
  for (long long j = 1; j < half; ++j) gain += 2.0 * std::cos(w * h * static_cast<double>(j));
  gain /= 2.0 * static_cast<double>(half);
  if (!(gain > 0.05)) throw FitError("slow frequency too close to a zero of the averaging window");

  HarmonicFit fit;
  fit.delta_omega = w;
  fit.delta_n = std::hypot(sol.a, sol.b) / gain;
  fit.gamma = wrap_angle(std::atan2(sol.b, sol.a));
  fit.offset = sol.offset;
  fit.delta_F = 2.0 * K0 * fit.delta_n;
  fit.residual_rms = std::sqrt(sol.rss / static_cast<double>(xa.size()));
  return fit;
}

VelocityComparison compare_velocities(std::span<const double> t_quantum,
                                      std::span<const double> v_quantum,
                                      std::span<const double> t_model,
                                      std::span<const double> v_model, double J) {
  if (t_quantum.size() != v_quantum.size() || t_model.size() != v_model.size())
    throw DomainError("compare_velocities: length mismatch");
  if (!(J > 0.0)) throw DomainError("compare_velocities: J must be positive");
  double sum = 0.0;
  std::size_t count = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < t_quantum.size(); ++i) {
    const double t = t_quantum[i];
    if (t_model.empty() || t < t_model.front() || t > t_model.back()) continue;
    while (j + 1 < t_model.size() && t_model[j + 1] < t) ++j;
    double vm = v_model[j];
    if (j + 1 < t_model.size() && t_model[j + 1] != t_model[j]) {
      const double f = (t - t_model[j]) / (t_model[j + 1] - t_model[j]);
      vm = (1.0 - f) * v_model[j] + f * v_model[j + 1];
    }
    const double e = v_quantum[i] - vm;
    sum += e * e;
    ++count;
  }
  VelocityComparison out;
  if (count == 0) return out;
  out.rms_error = std::sqrt(sum / static_cast<double>(count));
  out.normalized_rms = out.rms_error / J;
  return out;
}

std::vector<double> zero_crossings(std::span<const double> times, std::span<const double> x) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (x[i] == 0.0) {
      out.push_back(times[i]);
    } else if ((x[i] < 0.0) != (x[i + 1] < 0.0) && x[i + 1] != 0.0) {
      const double f = x[i] / (x[i] - x[i + 1]);
      out.push_back(times[i] + f * (times[i + 1] - times[i]));
    }
  }
  return out;
}

std::vector<double> merge_crossings(std::span<const double> crossings, double min_gap) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < crossings.size()) {
    std::size_t j = i + 1;
    double sum = crossings[i];
    while (j < crossings.size() && crossings[j] - crossings[j - 1] < min_gap) sum += crossings[j++];
    out.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  return out;
}

}  // namespace cbho
