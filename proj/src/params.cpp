#include "cbho/params.hpp"

#include <cmath>
#include <numbers>

#include "cbho/errors.hpp"

namespace cbho {

void PhysicalParams::validate() const {
  if (!(atomic_mass > 0.0)) throw DomainError("atomic_mass must be positive");
  if (!(lattice_period_d > 0.0)) throw DomainError("lattice_period_d must be positive");
  if (!(lattice_depth_s > 0.0)) throw DomainError("lattice_depth_s must be positive");
  if (!(trap_frequency >= 0.0)) throw DomainError("trap_frequency must be non-negative");
  if (!(drive_amplitude_alpha >= 0.0)) throw DomainError("drive_amplitude_alpha must be non-negative");
  if (!std::isfinite(drive_frequency) || !std::isfinite(drive_phase_phi))
    throw DomainError("drive frequency and phase must be finite");
}

void ModelParams::validate() const {
  if (!(J > 0.0) || !std::isfinite(J)) throw DomainError("J must be positive");
  if (!(K0 >= 0.0) || !std::isfinite(K0)) throw DomainError("K0 must be non-negative");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be non-negative");
  if (!std::isfinite(omega_D) || !std::isfinite(phi))
    throw DomainError("omega_D and phi must be finite");
}

double recoil_energy(double atomic_mass, double lattice_period) {
  const double pi = std::numbers::pi;
  return si::hbar * si::hbar * pi * pi / (2.0 * atomic_mass * lattice_period * lattice_period);
}

double hopping_from_depth(double s) {
  if (!(s > 0.0)) throw DomainError("lattice depth s must be positive");
  return 8.0 / std::sqrt(std::numbers::pi) * std::pow(s, 0.75) * std::exp(-2.0 * std::sqrt(s));
}

ModelParams derive_model(const PhysicalParams& p) {
  p.validate();
  const double er = recoil_energy(p.atomic_mass, p.lattice_period_d);
  const double d = p.lattice_period_d;
  ModelParams mp;
  mp.J = hopping_from_depth(p.lattice_depth_s);
  mp.K0 = 0.5 * p.atomic_mass * p.trap_frequency * p.trap_frequency * d * d / er;
  mp.alpha = p.drive_amplitude_alpha;
  mp.omega_D = p.drive_frequency * si::hbar / er;
  mp.phi = p.drive_phase_phi;
  mp.recoil_energy_joules = er;
  return mp;
}

PhysicalParams to_physical(const ModelParams& mp, double atomic_mass, double lattice_period,
                           double lattice_depth_s) {
  const double er = mp.recoil_energy_joules > 0.0 ? mp.recoil_energy_joules
                                                  : recoil_energy(atomic_mass, lattice_period);
  PhysicalParams p;
  p.atomic_mass = atomic_mass;
  p.lattice_period_d = lattice_period;
  p.lattice_depth_s = lattice_depth_s;
  p.trap_frequency =
      std::sqrt(2.0 * mp.K0 * er / (atomic_mass * lattice_period * lattice_period));
  p.drive_amplitude_alpha = mp.alpha;
  p.drive_frequency = mp.omega_D * er / si::hbar;
  p.drive_phase_phi = mp.phi;
  return p;
}

DerivedScales derived_scales(const ModelParams& mp, double n0) {
  if (n0 == 0.0) throw DomainError("n0 must be nonzero for a Bloch frequency");
  const double two_pi = 2.0 * std::numbers::pi;
  DerivedScales out;
  out.omega_B = 2.0 * mp.K0 * std::fabs(n0);
  if (out.omega_B > 0.0) out.T_B = two_pi / out.omega_B;
  if (mp.K0 > 0.0) {
    out.n_c = std::sqrt(2.0 * mp.J / mp.K0);
    if (mp.alpha > 0.0) out.T_HO = two_pi / std::sqrt(mp.J * mp.K0 * mp.alpha);
  }
  return out;
}

ModelParams canonical_model(double phi, double alpha, double n0) {
  ModelParams mp;
  mp.J = 0.024;
  mp.K0 = 1.52e-5;
  mp.alpha = alpha;
  mp.omega_D = 2.0 * mp.K0 * n0;
  mp.phi = phi;
  return mp;
}

}  // namespace cbho
