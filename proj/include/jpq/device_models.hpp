#pragma once

// Flux-tunability models of the two parametric devices:
//  * JPC resonator loaded by a Josephson ring modulator (JRM),
//  * JPA quarter-wave resonator terminated by a dc-SQUID.

#include <cmath>
#include <numbers>
#include <sstream>

#include "jpq/error.hpp"
#include "jpq/resonator.hpp"
#include "jpq/units.hpp"

namespace jpq {

/// Linear map from a coil control value (current, voltage, ...) to flux.
struct FluxCalibration {
  double control_offset = 0.0;  // control value at zero flux
  double control_period = 1.0;  // control change per flux quantum

  void validate() const {
    require(std::isfinite(control_offset), "FluxCalibration: offset must be finite");
    require(std::isfinite(control_period) && control_period != 0.0,
            "FluxCalibration: period must be finite and non-zero");
  }
};

/// External flux in Wb for a given control value.
inline double flux_from_control(double control, const FluxCalibration& cal) {
  cal.validate();
  return (control - cal.control_offset) / cal.control_period * PhysConstants::Phi0;
}

inline double control_from_flux(double flux, const FluxCalibration& cal) {
  cal.validate();
  return cal.control_offset + flux / PhysConstants::Phi0 * cal.control_period;
}

struct JpcModelParams {
  double omega_r_A = 0.0;  // bare resonator angular frequency
  double Z0 = 50.0;        // characteristic impedance, Ohm
  double E_J = 0.0;        // Josephson energy per junction, J
  double E_L = 0.0;        // shunt inductive energy phi0^2 / L, J
  FluxCalibration flux_cal{};

  /// Lumped equivalent inductance of the half-wave resonator.
  double lumped_inductance() const { return 2.0 * Z0 / (std::numbers::pi * omega_r_A); }
  double shunt_inductance() const { return PhysConstants::phi0 * PhysConstants::phi0 / E_L; }

  void validate() const {
    require(std::isfinite(omega_r_A) && omega_r_A > 0.0, "JpcModelParams: omega_r_A must be positive");
    require(std::isfinite(Z0) && Z0 > 0.0, "JpcModelParams: Z0 must be positive");
    require(std::isfinite(E_J) && E_J > 0.0, "JpcModelParams: E_J must be positive");
    require(std::isfinite(E_L) && E_L > 0.0, "JpcModelParams: E_L must be positive");
    flux_cal.validate();
  }
};

struct JpaModelParams {
  double omega_r = 0.0;  // bare angular frequency
  double L_r = 0.0;      // resonator inductance, H
  double L_loop = 0.0;   // SQUID loop geometric inductance, H
  double I_c = 0.0;      // single-junction critical current, A
  FluxCalibration flux_cal{};

  void validate() const {
    require(std::isfinite(omega_r) && omega_r > 0.0, "JpaModelParams: omega_r must be positive");
    require(std::isfinite(L_r) && L_r > 0.0, "JpaModelParams: L_r must be positive");
    require(std::isfinite(L_loop) && L_loop > 0.0, "JpaModelParams: L_loop must be positive");
    require(std::isfinite(I_c) && I_c > 0.0, "JpaModelParams: I_c must be positive");
    flux_cal.validate();
  }
};

/// Normalized flux per JRM subloop for a total external flux (equal split
/// over the four loops).
inline double jrm_loop_phase(double flux) {
  return 0.25 * (two_pi * flux / PhysConstants::Phi0);
}

/// True when `phi_ext` lies in the validity domain E_L/4 + E_J cos(phi) > 0.
/// Note the inductance itself carries E_L/2; both are kept as given by the
/// model so the domain is slightly narrower than positivity of L_A.
inline bool jrm_valid(double phi_ext, double E_J, double E_L) {
  return E_L / 4.0 + E_J * std::cos(phi_ext) > 0.0;
}

/// JRM inductance L_A = phi0^2 / (E_L/2 + E_J cos phi_ext).
inline double jrm_inductance(double phi_ext, double E_J, double E_L) {
  if (!std::isfinite(phi_ext)) throw DomainError("jrm_inductance: non-finite flux", phi_ext);
  if (!jrm_valid(phi_ext, E_J, E_L)) {
    std::ostringstream os;
    os << "jrm_inductance: phi_ext = " << phi_ext << " outside E_L/4 + E_J cos(phi_ext) > 0";
    throw DomainError(os.str(), phi_ext);
  }
  constexpr double phi0_sq = PhysConstants::phi0 * PhysConstants::phi0;
  return phi0_sq / (E_L / 2.0 + E_J * std::cos(phi_ext));
}

/// Resonance of JPC resonator A at external flux `flux` (Wb).
inline double jpc_frequency(double flux, const JpcModelParams& p) {
  const double loaded = std::numbers::pi * std::numbers::pi * p.lumped_inductance() / 2.0;
  const double L_A = jrm_inductance(jrm_loop_phase(flux), p.E_J, p.E_L);
  return p.omega_r_A * loaded / (loaded + L_A);
}

inline constexpr double default_singular_guard = 1e-6;

/// dc-SQUID inductance L_S = Phi0 / (4 pi I_c |cos(pi flux / Phi0)|).
inline double squid_inductance(double flux, double I_c,
                               double singular_guard = default_singular_guard) {
  require(std::isfinite(I_c) && I_c > 0.0, "squid_inductance: I_c must be positive");
  const double c = std::abs(std::cos(std::numbers::pi * flux / PhysConstants::Phi0));
  if (!(c > singular_guard)) {
    std::ostringstream os;
    os << "squid_inductance: flux " << flux / PhysConstants::Phi0
       << " Phi0 too close to the half-flux-quantum singularity";
    throw DomainError(os.str(), flux);
  }
  return PhysConstants::Phi0 / (4.0 * std::numbers::pi * I_c * c);
}

/// JPA resonance omega_r / (1 + (L_S + L_loop/4) / L_r).
inline double jpa_frequency(double flux, const JpaModelParams& p,
                            double singular_guard = default_singular_guard) {
  const double L_S = squid_inductance(flux, p.I_c, singular_guard);
  return p.omega_r / (1.0 + (L_S + p.L_loop / 4.0) / p.L_r);
}

}  // namespace jpq
