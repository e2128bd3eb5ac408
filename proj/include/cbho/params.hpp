#pragma once

// Unit system and model parameters.
//
// Internally everything is dimensionless: hbar = 1, energies in recoil units
// E_R = hbar^2 pi^2 / (2 m d^2), times in hbar/E_R, positions in lattice sites.
// PhysicalParams is the only SI-valued type.

#include <optional>

namespace cbho {

namespace si {
inline constexpr double hbar = 1.054571817e-34;  // J s
}

struct PhysicalParams {
  double atomic_mass = 0.0;       // kg
  double lattice_period_d = 0.0;  // m
  double lattice_depth_s = 0.0;   // V0 / E_R
  double trap_frequency = 0.0;    // rad/s
  double drive_amplitude_alpha = 0.0;
  double drive_frequency = 0.0;  // rad/s
  double drive_phase_phi = 0.0;  // rad

  void validate() const;
};

struct ModelParams {
  double J = 0.0;      // hopping, E_R
  double K0 = 0.0;     // static parabolicity, E_R
  double alpha = 0.0;  // relative drive amplitude, K_D = alpha * K0
  double omega_D = 0.0;  // E_R / hbar
  double phi = 0.0;
  double recoil_energy_joules = 0.0;  // 0 when the parameters never had an SI origin

  double K_D() const { return alpha * K0; }
  void validate() const;
};

struct DerivedScales {
  std::optional<double> n_c;   // sites
  double omega_B = 0.0;        // E_R / hbar, for the chosen n0
  std::optional<double> T_B;   // absent when omega_B == 0
  std::optional<double> T_HO;  // absent unless alpha > 0 and K0 > 0
};

double recoil_energy(double atomic_mass, double lattice_period);

// Tight-binding hopping from the scaled lattice depth s = V0/E_R, in E_R.
double hopping_from_depth(double s);

ModelParams derive_model(const PhysicalParams& p);

// Inverse of derive_model for the trap and drive entries. The lattice depth is
// not recovered from J; the caller supplies it.
PhysicalParams to_physical(const ModelParams& mp, double atomic_mass,
                           double lattice_period, double lattice_depth_s);

DerivedScales derived_scales(const ModelParams& mp, double n0);

// Canonical dimensionless set used by every preset.
ModelParams canonical_model(double phi = 0.0, double alpha = 1.0, double n0 = 125.0);

}  // namespace cbho
