#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cbho/state.hpp"

namespace cbho {

struct Moments {
  double norm = 0.0;
  double mean_n = 0.0;
  double sigma_n = 0.0;
};

struct ObservableRecord {
  double t = 0.0;
  double norm = 0.0;
  double mean_n = 0.0;
  double sigma_n = 0.0;
  double v_g = 0.0;  // sites per hbar/E_R
  double k_c = 0.0;  // k_B units; NaN when the centroid is undefined
};

// Uniform quasi-momentum grid on (-1/2, 1/2] in units of k_B.
class KGrid {
 public:
  explicit KGrid(std::size_t size);
  std::size_t size() const { return points_.size(); }
  std::span<const double> points() const { return points_; }

 private:
  std::vector<double> points_;
};

Moments moments(const WavepacketState& s);

// Exact lattice current for hopping -J/2: J * sum_n Im(conj(c_n) c_{n+1}).
double ehrenfest_velocity(const WavepacketState& s, double J);

// c_k = M^{-1/2} sum_n c_n exp(i 2 pi k n). Unitary when the grid is at least
// as long as the window.
std::vector<cplx> bz_transform(const WavepacketState& s, const KGrid& grid);

// Circular mean of the quasi-momentum, arg(sum_n c_n conj(c_{n+1})) / 2pi,
// in the same convention as bz_transform. Empty when the nearest-neighbour
// coherence vanishes.
std::optional<double> k_centroid(const WavepacketState& s);

// Grid point of maximal |c_k|^2. Jumps across the zone edge during a Bloch
// sweep; k_centroid is the canonical estimator.
double k_argmax(const WavepacketState& s, const KGrid& grid);

ObservableRecord observe(const WavepacketState& s, double J);

// <H> for the instantaneous parabolicity K.
double energy_expectation(const WavepacketState& s, double J, double K);

}  // namespace cbho
