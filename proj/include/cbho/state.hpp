#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cbho/params.hpp"

namespace cbho {

using cplx = std::complex<double>;

// Inclusive range of absolute site indices kept in the simulation.
struct SiteWindow {
  std::int64_t n_min = 0;
  std::int64_t n_max = 0;

  static constexpr std::int64_t min_length = 16;

  std::int64_t length() const { return n_max - n_min + 1; }
  bool contains(double lo, double hi) const {
    return static_cast<double>(n_min) <= lo && hi <= static_cast<double>(n_max);
  }
  void validate() const;
  friend bool operator==(const SiteWindow&, const SiteWindow&) = default;
};

struct InitialCondition {
  double n0 = 0.0;       // sites
  double k0 = 0.0;       // units of k_B = 2 pi / d
  double sigma_n = 1.0;  // sites
};

class WavepacketState {
 public:
  WavepacketState() = default;
  WavepacketState(SiteWindow window, std::vector<cplx> amplitudes, double time = 0.0);

  const SiteWindow& window() const { return window_; }
  std::span<const cplx> amplitudes() const { return amps_; }
  std::span<cplx> amplitudes() { return amps_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  // Absolute site index of the i-th stored amplitude.
  std::int64_t site(std::size_t i) const { return window_.n_min + static_cast<std::int64_t>(i); }
  cplx at(std::int64_t n) const;

  double norm() const;
  void normalize();
  // |c_{n_min}|^2 + |c_{n_max}|^2
  double edge_density() const;

 private:
  SiteWindow window_;
  std::vector<cplx> amps_;
  double time_ = 0.0;
};

inline constexpr double default_edge_guard = 1e-8;
inline constexpr double default_window_margin = 64.0;

// Displaced Gaussian with per-site phase exp(-i 2 pi k0 n), renormalized to
// unit norm on the window.
WavepacketState init_gaussian(const InitialCondition& ic, const SiteWindow& w);

// Window centered on n0 with half-width 8 sigma_n + n_c + margin. The horizon
// is accepted for interface stability; trapped dynamics stay inside n_c.
SiteWindow default_window(const InitialCondition& ic, const ModelParams& mp, double horizon,
                          double margin = default_window_margin);

// CSV snapshot: "# time=<t>" line, header "n,re,im,abs2", one row per site,
// 17 significant digits so that reading back is exact.
void write_state_csv(std::ostream& os, const WavepacketState& s);
WavepacketState read_state_csv(std::istream& is);

}  // namespace cbho
