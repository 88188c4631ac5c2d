#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "jpq/error.hpp"
#include "jpq/units.hpp"

namespace jpq {

/// Single-port resonator described by its resonance and loss rates, all in
/// rad/s. Quality factors are derived, so Q_l^-1 = Q_ext^-1 + Q_int^-1 holds
/// by construction.
struct ResonatorParams {
  double omega0 = 0.0;
  double kappa_ext = 0.0;
  double kappa_int = 0.0;

  double kappa() const { return kappa_ext + kappa_int; }
  double q_ext() const { return omega0 / kappa_ext; }
  /// +inf for a lossless resonator.
  double q_int() const {
    return kappa_int > 0.0 ? omega0 / kappa_int : std::numeric_limits<double>::infinity();
  }
  double q_loaded() const { return omega0 / kappa(); }

  void validate() const {
    if (!(std::isfinite(omega0) && omega0 > 0.0))
      throw Error(ErrorKind::invalid_argument, "ResonatorParams: omega0 must be positive");
    if (!(std::isfinite(kappa_ext) && kappa_ext > 0.0))
      throw Error(ErrorKind::invalid_argument, "ResonatorParams: kappa_ext must be positive");
    if (!(std::isfinite(kappa_int) && kappa_int >= 0.0))
      throw Error(ErrorKind::invalid_argument, "ResonatorParams: kappa_int must be non-negative");
  }

  static ResonatorParams from_rates(double omega0, double kappa_ext, double kappa_int) {
    ResonatorParams p{omega0, kappa_ext, kappa_int};
    p.validate();
    return p;
  }
};

/// Build rates from quality factors. `q_int` may be +inf for a lossless
/// internal channel.
inline ResonatorParams resonator_rates(double q_ext, double q_int, double omega0) {
  require(std::isfinite(q_ext) && q_ext > 0.0, "resonator_rates: q_ext must be positive");
  require(!std::isnan(q_int) && q_int > 0.0, "resonator_rates: q_int must be positive");
  require(std::isfinite(omega0) && omega0 > 0.0, "resonator_rates: omega0 must be positive");
  const double kappa_int = std::isinf(q_int) ? 0.0 : omega0 / q_int;
  return ResonatorParams::from_rates(omega0, omega0 / q_ext, kappa_int);
}

/// Reflection off a single-port resonator seen through an ideal circulator,
/// S = 1 + kappa_ext / (i delta - kappa/2), with delta = omega - omega0.
inline std::complex<double> ideal_reflection(double delta, const ResonatorParams& p) {
  using namespace std::complex_literals;
  return 1.0 + p.kappa_ext / (1i * delta - 0.5 * p.kappa());
}

/// Closed-form locus of ideal_reflection: centre on the real axis at
/// 1 - kappa_ext/kappa, radius kappa_ext/kappa.
inline std::complex<double> ideal_circle_center(const ResonatorParams& p) {
  return {1.0 - p.kappa_ext / p.kappa(), 0.0};
}
inline double ideal_circle_radius(const ResonatorParams& p) { return p.kappa_ext / p.kappa(); }

/// Mean intracavity photon number of a coherently driven resonator,
/// <n> = kappa_ext P / (hbar omega0 ((kappa/2)^2 + delta^2)).
inline double photon_number_from_power(double p_in_watts, const ResonatorParams& p,
                                       double delta) {
  require(std::isfinite(p_in_watts) && p_in_watts >= 0.0,
          "photon_number_from_power: power must be non-negative");
  p.validate();
  const double half = 0.5 * p.kappa();
  return p.kappa_ext * p_in_watts / (PhysConstants::hbar * p.omega0 * (half * half + delta * delta));
}

/// Inverse of photon_number_from_power in the drive power.
inline double power_for_photon_number(double n, const ResonatorParams& p, double delta) {
  require(std::isfinite(n) && n >= 0.0, "power_for_photon_number: n must be non-negative");
  p.validate();
  const double half = 0.5 * p.kappa();
  return n * PhysConstants::hbar * p.omega0 * (half * half + delta * delta) / p.kappa_ext;
}

}  // namespace jpq
