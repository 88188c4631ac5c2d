#pragma once

// Fits of resonance-frequency-vs-coil-control maps to the JPA (dc-SQUID) and
// JPC (JRM) tunability models. The flux calibration (offset and period of
// the coil control) is always co-fitted.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jpq/device_models.hpp"
#include "jpq/error.hpp"
#include "jpq/optim.hpp"
#include "jpq/units.hpp"

namespace jpq {

struct FluxMapPoint {
  double control = 0.0;
  double f0 = 0.0;  // Hz
  std::optional<double> f0_err;  // Hz

  bool operator==(const FluxMapPoint&) const = default;
};

struct JunctionDerived {
  double I_c = 0.0;   // A
  double E_J = 0.0;   // J
  double L_J0 = 0.0;  // H
};

/// E_J = phi0 I_c and L_J0 = phi0 / I_c (so that E_J = phi0^2 / L_J0).
inline JunctionDerived junction_derived(double I_c) {
  require(std::isfinite(I_c) && I_c > 0.0, "junction_derived: I_c must be positive");
  return {I_c, PhysConstants::phi0 * I_c, PhysConstants::phi0 / I_c};
}

struct FluxFitOptions {
  double singular_guard = default_singular_guard;
  Tolerances tol{};
};

struct JpaFluxFit {
  JpaModelParams params;
  /// params = [omega_r (rad/s), I_c (A), control_offset, control_period];
  /// residual_rms in Hz (or in units of f0_err when errors are supplied).
  FitResult fit;
  JunctionDerived junction;
  double zero_flux_hz = 0.0;
  double tunability_hz = 0.0;  // max - min of the model over the fitted control span
  std::size_t excluded = 0;
  std::vector<std::string> warnings;
};

struct JpcFluxFit {
  JpcModelParams params;
  /// params = [omega_r_A (rad/s), E_J (J), E_L (J), control_offset, control_period].
  FitResult fit;
  JunctionDerived junction;
  double shunt_inductance = 0.0;  // phi0^2 / E_L
  double zero_flux_hz = 0.0;
  double tunability_hz = 0.0;
  std::size_t excluded = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline void check_flux_points(const std::vector<FluxMapPoint>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    if (!std::isfinite(p.control) || !std::isfinite(p.f0) || !(p.f0 > 0.0))
      throw Error(ErrorKind::invalid_argument,
                  "flux map: point " + std::to_string(i) + " has non-finite or non-positive values");
    if (p.f0_err && !(std::isfinite(*p.f0_err) && *p.f0_err > 0.0))
      throw Error(ErrorKind::invalid_argument,
                  "flux map: point " + std::to_string(i) + " has a non-positive uncertainty");
  }
}

inline bool all_have_errors(const std::vector<FluxMapPoint>& pts) {
  return !pts.empty() &&
         std::all_of(pts.begin(), pts.end(), [](const FluxMapPoint& p) { return p.f0_err.has_value(); });
}

inline void require_span(const std::vector<FluxMapPoint>& pts, const FluxCalibration& cal) {
  if (pts.size() < 6)
    throw Error(ErrorKind::invalid_argument, "flux fit: need at least 6 usable points");
  const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(), [](auto& a, auto& b) {
    return a.control < b.control;
  });
  if ((hi->control - lo->control) / std::abs(cal.control_period) < 0.5)
    throw Error(ErrorKind::invalid_argument, "flux fit: points span less than half a flux period");
}

// Control value of the highest resonance, used as the zero-flux seed.
inline double sweet_spot_control(const std::vector<FluxMapPoint>& pts) {
  return std::max_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.f0 < b.f0; })->control;
}

template <class Model>
double model_tunability_hz(Model&& model_hz, double c_lo, double c_hi) {
  double mn = std::numeric_limits<double>::infinity(), mx = -mn;
  constexpr int samples = 2001;
  for (int k = 0; k < samples; ++k) {
    const double c = c_lo + (c_hi - c_lo) * k / (samples - 1);
    try {
      const double v = model_hz(c);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    } catch (const DomainError&) {
    }
  }
  return mx >= mn ? mx - mn : 0.0;
}

inline void to_physical(FitResult& r, const Vector& scale, const Vector& shift) {
  r.params = r.params.cwiseProduct(scale) + shift;
  if (r.covariance) *r.covariance = scale.asDiagonal() * (*r.covariance) * scale.asDiagonal();
}

}  // namespace detail

/// Fit of a JPA map with omega_r, I_c and the flux calibration free; L_r
/// and L_loop are taken from `init`.
inline JpaFluxFit fit_jpa_flux(const std::vector<FluxMapPoint>& points, const JpaModelParams& init,
                               const FluxFitOptions& opt = {}) {
  init.validate();
  detail::check_flux_points(points);
  JpaFluxFit out;

  FluxCalibration cal = init.flux_cal;
  if (!points.empty()) cal.control_offset = detail::sweet_spot_control(points);

  std::vector<FluxMapPoint> pts;
  for (const auto& p : points) {
    const double c = std::abs(std::cos(std::numbers::pi * flux_from_control(p.control, cal) / PhysConstants::Phi0));
    if (c > opt.singular_guard) pts.push_back(p);
    else ++out.excluded;
  }
  if (out.excluded)
    out.warnings.push_back(std::to_string(out.excluded) +
                           " point(s) inside the SQUID singularity guard were excluded");
  detail::require_span(pts, cal);

  // Seeds: omega_r 1% above the highest resonance; I_c from the spread
  // between the highest and lowest resonance with omega_r fixed.
  const auto [pmin, pmax] = std::minmax_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.f0 < b.f0; });
  const double wr_seed = hz_to_angular(1.01 * pmax->f0);
  double ic_seed = init.I_c;
  {
    auto cosabs = [&](double control) {
      return std::abs(std::cos(std::numbers::pi * flux_from_control(control, cal) / PhysConstants::Phi0));
    };
    const double ca = cosabs(pmax->control), cb = cosabs(pmin->control);
    const double lhs = wr_seed / hz_to_angular(pmin->f0) - wr_seed / hz_to_angular(pmax->f0);
    const double ic = PhysConstants::Phi0 * (1.0 / cb - 1.0 / ca) / (4.0 * std::numbers::pi * init.L_r * lhs);
    if (std::isfinite(ic) && ic > 0.0) ic_seed = ic;
  }

  // x = [omega_r / 2pi GHz, I_c uA, (offset - off0)/|P0|, period/P0]
  const double p0 = cal.control_period, off0 = cal.control_offset;
  Vector scale(4), shift(4);
  scale << two_pi * 1e9, 1e-6, std::abs(p0), p0;
  shift << 0.0, 0.0, off0, 0.0;

  const bool weighted = detail::all_have_errors(pts);
  const double guard = opt.singular_guard;
  auto make_params = [&](const Vector& x) {
    JpaModelParams m = init;
    m.omega_r = x[0] * scale[0];
    m.I_c = x[1] * scale[1];
    m.flux_cal = {off0 + x[2] * scale[2], x[3] * scale[3]};
    return m;
  };
  auto residuals = [&](const Vector& x) {
    Vector r(static_cast<Eigen::Index>(pts.size()));
    const JpaModelParams m = make_params(x);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double flux = flux_from_control(pts[i].control, m.flux_cal);
      double v = std::numeric_limits<double>::quiet_NaN();
      if (std::abs(std::cos(std::numbers::pi * flux / PhysConstants::Phi0)) > guard)
        v = angular_to_hz(jpa_frequency(flux, m, guard)) - pts[i].f0;
      r[static_cast<Eigen::Index>(i)] = weighted ? v / *pts[i].f0_err : v / 1e6;
    }
    return r;
  };

  Vector x0(4);
  x0 << wr_seed / scale[0], ic_seed / scale[1], 0.0, 1.0;
  Bounds b = Bounds::unbounded(4);
  b.lower[0] = 1e-6;
  b.lower[1] = 1e-9;
  b.lower[3] = 1e-3;
  LsqOptions lo;
  lo.tol = opt.tol;
  FitResult r = least_squares(residuals, x0, b, lo);
  if (!weighted) r.residual_rms *= 1e6;

  out.params = make_params(r.params);
  detail::to_physical(r, scale, shift);
  out.fit = r;
  out.junction = junction_derived(out.params.I_c);
  out.zero_flux_hz = angular_to_hz(jpa_frequency(0.0, out.params, guard));
  const auto [cmin, cmax] = std::minmax_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.control < b.control; });
  out.tunability_hz = detail::model_tunability_hz(
      [&](double c) { return angular_to_hz(jpa_frequency(flux_from_control(c, out.params.flux_cal), out.params, guard)); },
      cmin->control, cmax->control);
  return out;
}

/// Fit of a JPC map with omega_r_A, E_J, E_L and the flux calibration free;
/// Z0 is taken from `init`.
inline JpcFluxFit fit_jpc_flux(const std::vector<FluxMapPoint>& points, const JpcModelParams& init,
                               const FluxFitOptions& opt = {}) {
  init.validate();
  detail::check_flux_points(points);
  JpcFluxFit out;

  FluxCalibration cal = init.flux_cal;
  if (!points.empty()) cal.control_offset = detail::sweet_spot_control(points);

  std::vector<FluxMapPoint> pts;
  for (const auto& p : points) {
    if (jrm_valid(jrm_loop_phase(flux_from_control(p.control, cal)), init.E_J, init.E_L)) pts.push_back(p);
    else ++out.excluded;
  }
  if (out.excluded)
    out.warnings.push_back(std::to_string(out.excluded) +
                           " point(s) outside the JRM validity domain were excluded");
  detail::require_span(pts, cal);

  // Seed omega_r_A so that the model passes through the highest resonance
  // with the initial junction energies: 1/omega = 1/omega_r + L_A/(pi Z0).
  double wr_seed = init.omega_r_A;
  {
    const auto pmax = std::max_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.f0 < b.f0; });
    const double L_A = jrm_inductance(jrm_loop_phase(flux_from_control(pmax->control, cal)), init.E_J, init.E_L);
    const double inv = 1.0 / hz_to_angular(pmax->f0) - L_A / (std::numbers::pi * init.Z0);
    if (inv > 0.0) wr_seed = 1.0 / inv;
  }

  // x = [omega_r_A / 2pi GHz, E_J/h (100 GHz), E_L/h (100 GHz), offset, period]
  const double p0 = cal.control_period, off0 = cal.control_offset;
  const double e_unit = PhysConstants::h * 1e11;
  Vector scale(5), shift(5);
  scale << two_pi * 1e9, e_unit, e_unit, std::abs(p0), p0;
  shift << 0.0, 0.0, 0.0, off0, 0.0;

  const bool weighted = detail::all_have_errors(pts);
  auto make_params = [&](const Vector& x) {
    JpcModelParams m = init;
    m.omega_r_A = x[0] * scale[0];
    m.E_J = x[1] * scale[1];
    m.E_L = x[2] * scale[2];
    m.flux_cal = {off0 + x[3] * scale[3], x[4] * scale[4]};
    return m;
  };
  auto residuals = [&](const Vector& x) {
    Vector r(static_cast<Eigen::Index>(pts.size()));
    const JpcModelParams m = make_params(x);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double flux = flux_from_control(pts[i].control, m.flux_cal);
      double v = std::numeric_limits<double>::quiet_NaN();
      if (jrm_valid(jrm_loop_phase(flux), m.E_J, m.E_L))
        v = angular_to_hz(jpc_frequency(flux, m)) - pts[i].f0;
      r[static_cast<Eigen::Index>(i)] = weighted ? v / *pts[i].f0_err : v / 1e6;
    }
    return r;
  };

  Vector x0(5);
  x0 << wr_seed / scale[0], init.E_J / scale[1], init.E_L / scale[2], 0.0, 1.0;
  Bounds b = Bounds::unbounded(5);
  b.lower[0] = 1e-6;
  b.lower[1] = 1e-9;
  b.lower[2] = 1e-9;
  b.lower[4] = 1e-3;
  LsqOptions lo;
  lo.tol = opt.tol;
  FitResult r = least_squares(residuals, x0, b, lo);
  if (!weighted) r.residual_rms *= 1e6;

  out.params = make_params(r.params);
  detail::to_physical(r, scale, shift);
  out.fit = r;
  out.junction = junction_derived(out.params.E_J / PhysConstants::phi0);
  out.shunt_inductance = out.params.shunt_inductance();
  out.zero_flux_hz = angular_to_hz(jpc_frequency(0.0, out.params));
  const auto [cmin, cmax] = std::minmax_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.control < b.control; });
  out.tunability_hz = detail::model_tunability_hz(
      [&](double c) { return angular_to_hz(jpc_frequency(flux_from_control(c, out.params.flux_cal), out.params)); },
      cmin->control, cmax->control);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic maps

/// JPA map at the given control values with N(0, noise_hz^2) frequency
/// noise. Controls inside the singularity guard are skipped, mirroring the
/// resonance leaving the measurement band.
inline std::vector<FluxMapPoint> synth_jpa_flux_map(const JpaModelParams& p, const std::vector<double>& controls,
                                                    double noise_hz, std::uint64_t seed,
                                                    double singular_guard = default_singular_guard) {
  p.validate();
  require(std::isfinite(noise_hz) && noise_hz >= 0.0, "synth_jpa_flux_map: noise must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<FluxMapPoint> out;
  for (double c : controls) {
    const double flux = flux_from_control(c, p.flux_cal);
    if (!(std::abs(std::cos(std::numbers::pi * flux / PhysConstants::Phi0)) > singular_guard)) continue;
    const double f = angular_to_hz(jpa_frequency(flux, p, singular_guard));
    out.push_back({c, f + noise_hz * gauss(rng), std::nullopt});
  }
  return out;
}

/// JPC map; controls outside the JRM validity domain are skipped.
inline std::vector<FluxMapPoint> synth_jpc_flux_map(const JpcModelParams& p, const std::vector<double>& controls,
                                                    double noise_hz, std::uint64_t seed) {
  p.validate();
  require(std::isfinite(noise_hz) && noise_hz >= 0.0, "synth_jpc_flux_map: noise must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<FluxMapPoint> out;
  for (double c : controls) {
    const double flux = flux_from_control(c, p.flux_cal);
    if (!jrm_valid(jrm_loop_phase(flux), p.E_J, p.E_L)) continue;
    const double f = angular_to_hz(jpc_frequency(flux, p));
    out.push_back({c, f + noise_hz * gauss(rng), std::nullopt});
  }
  return out;
}

}  // namespace jpq
