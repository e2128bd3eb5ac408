#include "cbho/observables.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "cbho/errors.hpp"

namespace cbho {

KGrid::KGrid(std::size_t size) : points_(size) {
  if (size == 0) throw DomainError("k grid must be non-empty");
  const double step = 1.0 / static_cast<double>(size);
  for (std::size_t j = 0; j < size; ++j) points_[j] = -0.5 + static_cast<double>(j + 1) * step;
}

Moments moments(const WavepacketState& s) {
  const auto amps = s.amplitudes();
  double w = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double p = std::norm(amps[i]);
    const double n = static_cast<double>(s.site(i));
    w += p;
    m1 += n * p;
  }
  if (w < 1e-12) throw DomainError("degenerate state: norm below 1e-12");
  Moments out;
  out.norm = w;
  out.mean_n = m1 / w;
  // Second pass about the mean; <n^2> - <n>^2 cancels badly at |n| ~ 1e2.
  double var = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double dn = static_cast<double>(s.site(i)) - out.mean_n;
    var += dn * dn * std::norm(amps[i]);
  }
  out.sigma_n = std::sqrt(std::max(0.0, var / w));
  return out;
}

namespace {
cplx neighbour_coherence(const WavepacketState& s) {
  const auto amps = s.amplitudes();
  cplx sum{};
  for (std::size_t i = 0; i + 1 < amps.size(); ++i) sum += std::conj(amps[i]) * amps[i + 1];
  return sum;
}
}  // namespace

double ehrenfest_velocity(const WavepacketState& s, double J) {
  return J * neighbour_coherence(s).imag();
}

std::vector<cplx> bz_transform(const WavepacketState& s, const KGrid& grid) {
  const auto amps = s.amplitudes();
  if (grid.size() < amps.size()) throw DomainError("k grid smaller than the site window");
  const double scale = 1.0 / std::sqrt(static_cast<double>(grid.size()));
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<cplx> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double k = grid.points()[j];
    cplx acc{};
    for (std::size_t i = 0; i < amps.size(); ++i) {
      const double kn = k * static_cast<double>(s.site(i));
      acc += amps[i] * std::polar(1.0, two_pi * (kn - std::round(kn)));
    }
    out[j] = acc * scale;
  }
  return out;
}

std::optional<double> k_centroid(const WavepacketState& s) {
  const cplx c = std::conj(neighbour_coherence(s));
  if (std::abs(c) < 1e-12) return std::nullopt;
  double k = std::arg(c) / (2.0 * std::numbers::pi);
  if (k <= -0.5) k += 1.0;
  return k;
}

double k_argmax(const WavepacketState& s, const KGrid& grid) {
  const auto ck = bz_transform(s, grid);
  std::size_t best = 0;
  for (std::size_t j = 1; j < ck.size(); ++j)
    if (std::norm(ck[j]) > std::norm(ck[best])) best = j;
  return grid.points()[best];
}

ObservableRecord observe(const WavepacketState& s, double J) {
  const Moments m = moments(s);
  ObservableRecord r;
  r.t = s.time();
  r.norm = m.norm;
  r.mean_n = m.mean_n;
  r.sigma_n = m.sigma_n;
  r.v_g = ehrenfest_velocity(s, J);
  r.k_c = k_centroid(s).value_or(std::numeric_limits<double>::quiet_NaN());
  return r;
}

double energy_expectation(const WavepacketState& s, double J, double K) {
  const auto amps = s.amplitudes();
  double e = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double n = static_cast<double>(s.site(i));
    e += K * n * n * std::norm(amps[i]);
  }
  return e - J * neighbour_coherence(s).real();
}

}  // namespace cbho
