#pragma once

// Physical constants, unit conversions and thermal helpers.
//
// Convention: every loss rate and resonance frequency inside the library is
// an angular frequency (rad/s). Linear Hz only appears at I/O boundaries.

#include <cmath>
#include <numbers>

#include "jpq/error.hpp"

namespace jpq {

struct PhysConstants {
  static constexpr double h = 6.62607015e-34;            // J s
  static constexpr double hbar = h / (2.0 * std::numbers::pi);
  static constexpr double k_B = 1.380649e-23;            // J/K
  static constexpr double Phi0 = 2.067833848e-15;        // Wb, h/2e
  static constexpr double phi0 = Phi0 / (2.0 * std::numbers::pi);
};

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double hz_to_angular(double f_hz) { return two_pi * f_hz; }
constexpr double angular_to_hz(double omega) { return omega / two_pi; }

/// Power on a decibel-milliwatt scale.
struct PowerDbm {
  double value = 0.0;
};

inline double dbm_to_watts(PowerDbm p) {
  require(std::isfinite(p.value), "dbm_to_watts: power must be finite");
  return std::pow(10.0, (p.value - 30.0) / 10.0);
}

inline PowerDbm watts_to_dbm(double watts) {
  require(std::isfinite(watts) && watts > 0.0, "watts_to_dbm: power must be positive");
  return PowerDbm{10.0 * std::log10(watts) + 30.0};
}

/// Bose-Einstein occupation of a mode at `frequency_hz` (linear Hz) and
/// temperature `temperature_k`. Exactly zero at T = 0.
inline double planck_occupation(double frequency_hz, double temperature_k) {
  if (!std::isfinite(frequency_hz) || !std::isfinite(temperature_k))
    throw Error(ErrorKind::invalid_argument, "planck_occupation: non-finite input");
  require(frequency_hz > 0.0, "planck_occupation: frequency must be positive");
  require(temperature_k >= 0.0, "planck_occupation: temperature must be non-negative");
  if (temperature_k == 0.0) return 0.0;
  const double x = PhysConstants::hbar * hz_to_angular(frequency_hz) /
                   (PhysConstants::k_B * temperature_k);
  return 1.0 / std::expm1(x);
}

}  // namespace jpq
