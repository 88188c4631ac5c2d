#pragma once

// Synthetic VNA measurements: non-equidistant sweep grids, the instrument
// background (attenuation/gain, electrical delay, impedance-mismatch tilt,
// Fano displacement) and additive circular Gaussian noise.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "jpq/error.hpp"
#include "jpq/resonator.hpp"
#include "jpq/trace.hpp"
#include "jpq/units.hpp"

namespace jpq {

struct SweepGrid {
  double center = 0.0;         // Hz
  double span = 0.0;           // Hz
  std::size_t count = 0;
  double concentration = 0.0;  // 0 = uniform, larger = denser near center

  void validate() const {
    require(std::isfinite(center), "SweepGrid: center must be finite");
    require(std::isfinite(span) && span > 0.0, "SweepGrid: span must be positive");
    require(count >= 3, "SweepGrid: count must be at least 3");
    require(std::isfinite(concentration) && concentration >= 0.0,
            "SweepGrid: concentration must be non-negative");
  }
};

/// Warp parameter c in (0, pi/2) used by synth_grid. The grid places point
/// u in [-1, 1] at tan(c u) / tan(c), so the spacing at the center is
/// cos^2(c) times the spacing at the edges.
inline double grid_warp_parameter(double concentration) {
  return 0.5 * std::numbers::pi * concentration / (1.0 + concentration);
}

inline double grid_warp(double u, double c) {
  if (c == 0.0) return u;
  return std::tan(c * u) / std::tan(c);
}

inline std::vector<double> synth_grid(const SweepGrid& g) {
  g.validate();
  const double c = grid_warp_parameter(g.concentration);
  const double half = 0.5 * g.span;
  const auto n1 = static_cast<double>(g.count - 1);
  std::vector<double> f(g.count);
  for (std::size_t k = 0; k < g.count; ++k) {
    // Integer numerator keeps u exactly antisymmetric about the midpoint.
    const double u = (2.0 * static_cast<double>(k) - n1) / n1;
    f[k] = g.center + grid_warp(u, c) * half;
  }
  f.front() = g.center - half;
  f.back() = g.center + half;
  return f;
}

/// Noise-free reflection trace of `p` on the given frequency grid (Hz).
inline ComplexTrace synth_ideal_trace(const std::vector<double>& freqs, const ResonatorParams& p) {
  p.validate();
  ComplexTrace t;
  t.frequencies = freqs;
  t.samples.reserve(freqs.size());
  for (double f : freqs) t.samples.push_back(ideal_reflection(hz_to_angular(f) - p.omega0, p));
  t.validate();
  return t;
}

struct DistortionParams {
  double amplitude = 1.0;    // linear scale a
  double phase_offset = 0.0; // alpha, rad
  double delay = 0.0;        // tau, s
  double tilt = 0.0;         // rotation about (1, 0), rad
  Complex fano_offset{0.0, 0.0};
  double noise_sigma = 0.0;  // per-quadrature std

  void validate() const {
    require(std::isfinite(amplitude) && amplitude > 0.0, "DistortionParams: amplitude must be positive");
    require(std::isfinite(phase_offset) && std::isfinite(delay) && std::isfinite(tilt),
            "DistortionParams: non-finite phase parameter");
    require(std::isfinite(fano_offset.real()) && std::isfinite(fano_offset.imag()),
            "DistortionParams: non-finite Fano offset");
    require(std::isfinite(noise_sigma) && noise_sigma >= 0.0,
            "DistortionParams: noise_sigma must be non-negative");
  }
};

/// Complex background factor a exp(i(alpha - 2 pi f tau)) at frequency f (Hz).
inline Complex background_factor(double f, const DistortionParams& d) {
  return std::polar(d.amplitude, d.phase_offset - two_pi * f * d.delay);
}

/// Deterministic part of the instrument response:
///   a e^{i(alpha - 2 pi f tau)} [fano + 1 + (S - 1) e^{i tilt}].
/// Noise is not added here; see add_noise.
inline ComplexTrace apply_distortion(const ComplexTrace& ideal, const DistortionParams& d) {
  ideal.validate();
  d.validate();
  ComplexTrace out = ideal;
  const bool has_tilt = d.tilt != 0.0;
  const bool has_fano = d.fano_offset != Complex{};
  const bool has_factor = d.amplitude != 1.0 || d.phase_offset != 0.0 || d.delay != 0.0;
  const Complex rot = std::polar(1.0, d.tilt);
  for (std::size_t k = 0; k < out.size(); ++k) {
    Complex z = out.samples[k];
    if (has_tilt) z = 1.0 + (z - 1.0) * rot;
    if (has_fano) z += d.fano_offset;
    if (has_factor) z *= background_factor(out.frequencies[k], d);
    out.samples[k] = z;
  }
  return out;
}

/// Adds independent N(0, sigma^2) noise to both quadratures. Same seed, same
/// output.
inline ComplexTrace add_noise(const ComplexTrace& trace, double sigma, std::uint64_t seed) {
  require(std::isfinite(sigma) && sigma >= 0.0, "add_noise: sigma must be non-negative");
  ComplexTrace out = trace;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (auto& z : out.samples) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    z += Complex{re, im};
  }
  return out;
}

/// Background trace of the setup without a resonance in band (the detuned
/// device), i.e. the distortion applied to a unit trace.
inline ComplexTrace synth_background(const std::vector<double>& freqs, const DistortionParams& d) {
  ComplexTrace unit;
  unit.frequencies = freqs;
  unit.samples.assign(freqs.size(), Complex{1.0, 0.0});
  return apply_distortion(unit, d);
}

/// Convenience: ideal trace, distortion and noise in one call.
inline ComplexTrace synth_measurement(const std::vector<double>& freqs, const ResonatorParams& p,
                                      const DistortionParams& d, std::uint64_t seed) {
  return add_noise(apply_distortion(synth_ideal_trace(freqs, p), d), d.noise_sigma, seed);
}

}  // namespace jpq
