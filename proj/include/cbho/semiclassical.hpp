#pragma once

// Local acceleration model for the driven trap.
//
// Phase convention: k_tilde is the quasi-momentum phase k*d entering the group
// velocity v = J sin(k_tilde). A Gaussian prepared with exp(-i 2 pi k0 n) has
// k_tilde(0) = -2 pi k0; to_velocity_k0() performs that conversion.

#include <span>
#include <vector>

#include "cbho/params.hpp"
#include "cbho/state.hpp"

namespace cbho {

struct SemiclassicalTrajectory {
  std::vector<double> times;
  std::vector<double> k_tilde;  // unwrapped, radians
  std::vector<double> n;        // sites

  double velocity(std::size_t i, double J) const;
};

struct HarmonicFit {
  double delta_n = 0.0;      // sites
  double delta_omega = 0.0;  // E_R / hbar
  double gamma = 0.0;        // (-pi, pi]
  double delta_F = 0.0;      // E_R, i.e. force change times d
  double offset = 0.0;       // fitted center, sites
  double residual_rms = 0.0;  // sites, against the cycle-averaged series
};

struct Eq7Params {
  double k0 = 0.0;     // k_B units, velocity convention
  double F_n0 = 0.0;   // E_R, local force times d = 2 K0 n0
  double alpha = 0.0;
  double omega_D = 0.0;
  double phi = 0.0;
  double delta_F = 0.0;
  double delta_omega = 0.0;
  double gamma = 0.0;
  double J = 0.0;

  static Eq7Params from_model(const ModelParams& mp, double n0, double k0_velocity,
                              const HarmonicFit& fit);
};

struct VelocityComparison {
  double rms_error = 0.0;
  double normalized_rms = 0.0;  // rms / J
};

// k0 of a Gaussian prepared as exp(-i 2 pi k0 n), expressed in the velocity
// convention used by this module.
inline double to_velocity_k0(double k0_state) { return -k0_state; }

// RK4 for dk/dt = -2 K(t) n, dn/dt = J sin(k), storing every sample_stride-th
// step and the final one.
SemiclassicalTrajectory integrate_local_model(const ModelParams& mp, double n_init,
                                              double k_init, double t_end, double dt,
                                              long long sample_stride = 1);

// Perturbative group velocity with drive and slow-oscillation sidebands:
//   phase = 2 pi k0 - F t + (F alpha / wD) [cos(wD t + phi) - cos(phi)]
//         + (dF / dw) [cos(dw t + gamma) - cos(gamma)]
//         + sum_{s=+1,-1} s (dF alpha / (wD + s dw))
//             [sin((wD + s dw) t + phi + s gamma) - sin(phi + s gamma)]
//   V = J sin(phase)
// A term whose numerator is nonzero and whose denominator vanishes raises
// ResonanceError.
double eval_eq7(const Eq7Params& p, double t);
std::vector<double> eval_eq7(const Eq7Params& p, std::span<const double> times);

// One-period moving average with trapezoid end weights. Output covers the
// samples whose full window lies inside the series; out_times receives their
// times.
std::vector<double> cycle_average(std::span<const double> times, std::span<const double> x,
                                  double period, std::vector<double>& out_times);

// Fit n(t) = offset + dn sin(dw t + gamma) to the cycle-averaged centroid.
// Throws FitError when no spectral peak stands above the noise floor.
HarmonicFit fit_harmonic(std::span<const double> times, std::span<const double> mean_n,
                         double T_B, double K0);

// RMS of quantum - model on the quantum time grid; the model is linearly
// interpolated and only the overlapping time range is used.
VelocityComparison compare_velocities(std::span<const double> t_quantum,
                                      std::span<const double> v_quantum,
                                      std::span<const double> t_model,
                                      std::span<const double> v_model, double J);

// Times where x changes sign, linearly interpolated.
std::vector<double> zero_crossings(std::span<const double> times, std::span<const double> x);

// Replaces runs of crossings separated by less than min_gap with their mean.
std::vector<double> merge_crossings(std::span<const double> crossings, double min_gap);

}  // namespace cbho
