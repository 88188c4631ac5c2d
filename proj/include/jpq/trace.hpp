#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "jpq/error.hpp"

namespace jpq {

using Complex = std::complex<double>;

struct TraceMeta {
  std::optional<double> probe_power_dbm;
  std::optional<double> flux_control;
  std::string label;

  bool operator==(const TraceMeta&) const = default;
};

/// A swept reflection measurement: strictly increasing frequencies (Hz) and
/// one complex sample per frequency.
struct ComplexTrace {
  std::vector<double> frequencies;
  std::vector<Complex> samples;
  TraceMeta meta;

  std::size_t size() const { return frequencies.size(); }

  void validate() const {
    if (frequencies.size() != samples.size())
      throw Error(ErrorKind::invalid_argument, "ComplexTrace: frequency/sample length mismatch");
    if (frequencies.size() < 3)
      throw Error(ErrorKind::invalid_argument, "ComplexTrace: need at least 3 points");
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
      if (!std::isfinite(frequencies[i]) || !std::isfinite(samples[i].real()) ||
          !std::isfinite(samples[i].imag()))
        throw Error(ErrorKind::invalid_argument,
                    "ComplexTrace: non-finite value at index " + std::to_string(i));
      if (i > 0 && !(frequencies[i] > frequencies[i - 1]))
        throw Error(ErrorKind::invalid_argument,
                    "ComplexTrace: frequencies not strictly increasing at index " +
                        std::to_string(i));
    }
  }

  bool operator==(const ComplexTrace&) const = default;
};

inline ComplexTrace make_trace(std::vector<double> f, std::vector<Complex> s, TraceMeta meta = {}) {
  ComplexTrace t{std::move(f), std::move(s), std::move(meta)};
  t.validate();
  return t;
}

/// Sequential phase unwrapping: adds multiples of 2 pi whenever consecutive
/// raw phases jump by more than pi.
inline std::vector<double> unwrap_phase(const std::vector<Complex>& z) {
  std::vector<double> out(z.size());
  if (z.empty()) return out;
  constexpr double pi = std::numbers::pi;
  out[0] = std::arg(z[0]);
  double offset = 0.0;
  double prev = out[0];
  for (std::size_t i = 1; i < z.size(); ++i) {
    const double raw = std::arg(z[i]);
    const double jump = raw - prev;
    if (std::abs(jump) > pi) offset -= 2.0 * pi * std::round(jump / (2.0 * pi));
    prev = raw;
    out[i] = raw + offset;
  }
  return out;
}

}  // namespace jpq
