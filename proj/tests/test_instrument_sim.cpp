#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "jpq/instrument_sim.hpp"
#include "jpq/units.hpp"

using namespace jpq;

namespace {
const double f0 = 5.17e9;
ResonatorParams ac1() { return resonator_rates(4e4, 1.2e5, hz_to_angular(f0)); }
std::vector<double> grid(std::size_t n = 801, double conc = 2.0) {
  const double kappa_hz = angular_to_hz(ac1().kappa());
  return synth_grid({f0, 20.0 * kappa_hz, n, conc});
}
}  // namespace

TEST(SynthGrid, UniformSpacing) {
  const auto f = synth_grid({1e9, 100.0, 101, 0.0});
  ASSERT_EQ(f.size(), 101u);
  EXPECT_EQ(f.front(), 1e9 - 50.0);
  EXPECT_EQ(f.back(), 1e9 + 50.0);
  for (std::size_t k = 1; k < f.size(); ++k) EXPECT_NEAR(f[k] - f[k - 1], 1.0, 1e-6);
}

TEST(SynthGrid, ConcentratedGridCenterToEdgeSpacingRatio) {
  const double conc = 3.0;
  const auto f = synth_grid({1e9, 1e6, 2001, conc});
  const double c = grid_warp_parameter(conc);
  EXPECT_GT(c, 0.0);
  EXPECT_LT(c, std::numbers::pi / 2);
  const double center = f[1001] - f[1000];
  const double edge = f[1] - f[0];
  EXPECT_NEAR(center / edge, std::pow(std::cos(c), 2), 1e-2 * std::pow(std::cos(c), 2));
  for (std::size_t k = 1; k < f.size(); ++k) EXPECT_GT(f[k], f[k - 1]);
  EXPECT_EQ(f.front(), 1e9 - 5e5);
  EXPECT_EQ(f.back(), 1e9 + 5e5);
}

TEST(SynthGrid, RejectsBadGrid) {
  EXPECT_THROW(synth_grid({1e9, 0.0, 10, 0.0}), Error);
  EXPECT_THROW(synth_grid({1e9, 1.0, 2, 0.0}), Error);
  EXPECT_THROW(synth_grid({1e9, 1.0, 10, -1.0}), Error);
}

TEST(ApplyDistortion, IdentityIsExact) {
  const auto ideal = synth_ideal_trace(grid(), ac1());
  const auto out = apply_distortion(ideal, DistortionParams{});
  EXPECT_EQ(out, ideal);
}

TEST(ApplyDistortion, DelayOnlyRotatesByFrequency) {
  const auto ideal = synth_ideal_trace(grid(), ac1());
  DistortionParams d;
  d.delay = 40e-9;
  const auto out = apply_distortion(ideal, d);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const Complex expect = ideal.samples[k] * std::polar(1.0, -2.0 * std::numbers::pi * out.frequencies[k] * 40e-9);
    EXPECT_LT(std::abs(out.samples[k] - expect), 1e-12);
    EXPECT_NEAR(std::abs(out.samples[k]), std::abs(ideal.samples[k]), 1e-12);
  }
}

TEST(AddNoise, DeterministicPerSeedWithExpectedStd) {
  const auto ideal = synth_ideal_trace(grid(20001, 0.0), ac1());
  const auto a = add_noise(ideal, 0.01, 42);
  const auto b = add_noise(ideal, 0.01, 42);
  const auto c = add_noise(ideal, 0.01, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  double sr = 0.0, si = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Complex e = a.samples[k] - ideal.samples[k];
    sr += e.real() * e.real();
    si += e.imag() * e.imag();
  }
  const double n = static_cast<double>(a.size());
  EXPECT_NEAR(std::sqrt(sr / n), 0.01, 0.02 * 0.01);
  EXPECT_NEAR(std::sqrt(si / n), 0.01, 0.02 * 0.01);
  EXPECT_EQ(add_noise(ideal, 0.0, 1), ideal);
  EXPECT_THROW(add_noise(ideal, -1.0, 1), Error);
}

TEST(Background, IdentityAndSpiral) {
  const auto f = grid();
  const auto unit = synth_background(f, DistortionParams{});
  for (const auto& z : unit.samples) EXPECT_EQ(z, Complex(1.0, 0.0));
  DistortionParams d;
  d.amplitude = 0.3;
  d.phase_offset = 1.1;
  d.delay = 35e-9;
  const auto bg = synth_background(f, d);
  for (std::size_t k = 0; k < f.size(); ++k) {
    EXPECT_NEAR(std::abs(bg.samples[k]), 0.3, 1e-14);
    EXPECT_LT(std::abs(bg.samples[k] - background_factor(f[k], d)), 1e-15);
  }
}

TEST(Background, DivisionRecoversIdeal) {
  const auto f = grid();
  DistortionParams d;
  d.amplitude = 0.02;
  d.phase_offset = -2.0;
  d.delay = 52e-9;
  const auto ideal = synth_ideal_trace(f, ac1());
  const auto meas = synth_measurement(f, ac1(), d, 7);
  const auto bg = synth_background(f, d);
  for (std::size_t k = 0; k < f.size(); ++k)
    EXPECT_LT(std::abs(meas.samples[k] / bg.samples[k] - ideal.samples[k]), 1e-12);
}

TEST(ApplyDistortion, TiltAndFanoAreInvertible) {
  const auto ideal = synth_ideal_trace(grid(), ac1());
  DistortionParams d;
  d.amplitude = 0.5;
  d.phase_offset = 0.4;
  d.delay = 20e-9;
  d.tilt = 0.2;
  d.fano_offset = {0.01, -0.02};
  const auto out = apply_distortion(ideal, d);
  for (std::size_t k = 0; k < out.size(); ++k) {
    Complex z = out.samples[k] / background_factor(out.frequencies[k], d) - d.fano_offset;
    z = 1.0 + (z - 1.0) * std::polar(1.0, -d.tilt);
    EXPECT_LT(std::abs(z - ideal.samples[k]), 1e-12);
  }
}

TEST(AddNoise, IsotropicQuadratures) {
  const auto ideal = synth_ideal_trace(grid(20001, 0.0), ac1());
  const auto a = add_noise(ideal, 0.05, 3);
  double cross = 0.0, var = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Complex e = a.samples[k] - ideal.samples[k];
    cross += e.real() * e.imag();
    var += 0.5 * std::norm(e);
  }
  EXPECT_LT(std::abs(cross / var), 0.05);
}

TEST(ApplyDistortion, DelayOpensArcGapThatGrowsWithTau) {
  // Delay rotates the sweep ends apart on the circle.
  const auto ideal = synth_ideal_trace(grid(), ac1());
  auto gap = [&](double tau) {
    DistortionParams d;
    d.delay = tau;
    const auto t = apply_distortion(ideal, d);
    return std::abs(t.samples.back() - t.samples.front());
  };
  const double g0 = gap(0.0), g1 = gap(10e-9), g2 = gap(40e-9), g3 = gap(80e-9);
  EXPECT_LT(g0, g1);
  EXPECT_LT(g1, g2);
  EXPECT_LT(g2, g3);
}
