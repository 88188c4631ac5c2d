#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "jpq/resonator.hpp"
#include "jpq/units.hpp"

using namespace jpq;

namespace {
constexpr long double h_ld = 6.62607015e-34L;
constexpr long double kB_ld = 1.380649e-23L;
constexpr long double pi_ld = 3.141592653589793238462643383279502884L;

long double planck_oracle(long double f, long double T) { return 1.0L / (expl(h_ld * f / (kB_ld * T)) - 1.0L); }
}  // namespace

TEST(PhysConstants, ValuesAndReducedFluxQuantum) {
  EXPECT_EQ(PhysConstants::h, 6.62607015e-34);
  EXPECT_EQ(PhysConstants::k_B, 1.380649e-23);
  EXPECT_EQ(PhysConstants::Phi0, 2.067833848e-15);
  EXPECT_NEAR(PhysConstants::phi0, PhysConstants::Phi0 / (2.0 * std::numbers::pi), 1e-16 * PhysConstants::phi0);
  EXPECT_NEAR(PhysConstants::hbar * 2.0 * std::numbers::pi, PhysConstants::h, 1e-15 * PhysConstants::h);
  for (double c : {PhysConstants::h, PhysConstants::hbar, PhysConstants::k_B, PhysConstants::Phi0, PhysConstants::phi0})
    EXPECT_GT(c, 0.0);
}

TEST(Planck, ZeroTemperatureIsExactlyZero) {
  EXPECT_EQ(planck_occupation(5e9, 0.0), 0.0);
  EXPECT_EQ(planck_occupation(1.0, 0.0), 0.0);
}

TEST(Planck, ReferenceOperatingPoint) {
  const double n = planck_occupation(5.54e9, 0.031);
  EXPECT_NEAR(n, static_cast<double>(planck_oracle(5.54e9L, 0.031L)), 1e-12 * n);
  EXPECT_NEAR(n, 1.9e-4, 0.05 * 1.9e-4);
}

TEST(Planck, LnTwoGivesExactlyOne) {
  const double f = 6e9;
  const double T = PhysConstants::hbar * hz_to_angular(f) / (PhysConstants::k_B * std::log(2.0));
  EXPECT_NEAR(planck_occupation(f, T), 1.0, 1e-12);
}

TEST(Planck, Monotonicity) {
  double prev = 0.0;
  for (double T = 0.005; T < 1.0; T *= 1.3) {
    const double n = planck_occupation(5e9, T);
    EXPECT_GT(n, prev);
    prev = n;
  }
  prev = std::numeric_limits<double>::infinity();
  for (double f = 1e8; f < 1e11; f *= 1.5) {
    const double n = planck_occupation(f, 0.05);
    EXPECT_LT(n, prev);
    prev = n;
  }
}

TEST(Planck, RejectsBadInput) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(planck_occupation(nan, 0.01), Error);
  EXPECT_THROW(planck_occupation(5e9, inf), Error);
  EXPECT_THROW(planck_occupation(5e9, -0.01), Error);
  EXPECT_THROW(planck_occupation(0.0, 0.01), Error);
}

TEST(Dbm, Definitions) {
  EXPECT_NEAR(dbm_to_watts({0.0}), 1e-3, 1e-18);
  EXPECT_NEAR(dbm_to_watts({30.0}), 1.0, 1e-15);
  EXPECT_NEAR(dbm_to_watts({-110.0}), 1e-14, 1e-26);
  EXPECT_THROW(dbm_to_watts({std::numeric_limits<double>::infinity()}), Error);
}

TEST(Dbm, RoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-150.0, 40.0);
  for (int i = 0; i < 1000; ++i) {
    const double w = dbm_to_watts({u(rng)});
    EXPECT_NEAR(dbm_to_watts(watts_to_dbm(w)), w, 1e-12 * w);
  }
  EXPECT_THROW(watts_to_dbm(0.0), Error);
}

TEST(PhotonNumber, NoDriveAndFarDetuning) {
  const ResonatorParams p = resonator_rates(4e4, 1.2e5, hz_to_angular(5.17e9));
  EXPECT_EQ(photon_number_from_power(0.0, p, 0.0), 0.0);
  const double on = photon_number_from_power(1e-15, p, 0.0);
  const double far = photon_number_from_power(1e-15, p, 1e6 * p.kappa());
  EXPECT_LT(far, 1e-11 * on);
}

TEST(PhotonNumber, MaximalOnResonanceAndLinearInPower) {
  const ResonatorParams p = resonator_rates(4e4, 1.2e5, hz_to_angular(5.17e9));
  const double on = photon_number_from_power(1e-15, p, 0.0);
  for (double d : {-2.0, -0.5, -0.01, 0.01, 0.5, 2.0}) EXPECT_LT(photon_number_from_power(1e-15, p, d * p.kappa()), on);
  for (double k : {0.5, 3.0, 17.0}) EXPECT_NEAR(photon_number_from_power(k * 1e-15, p, 0.3 * p.kappa()),
                                                k * photon_number_from_power(1e-15, p, 0.3 * p.kappa()), 1e-14 * k * on);
}

TEST(PhotonNumber, PowerForOnePhotonByHand) {
  // <n> = 1 at resonance: P = hbar w0 (kappa/2)^2 / kappa_ext.
  const long double w0 = 2.0L * pi_ld * 5.17e9L;
  const long double ke = w0 / 4e4L, ki = w0 / 1.2e5L;
  const long double hbar = h_ld / (2.0L * pi_ld);
  const long double P = hbar * w0 * (0.25L * (ke + ki) * (ke + ki)) / ke;
  const ResonatorParams p = resonator_rates(4e4, 1.2e5, hz_to_angular(5.17e9));
  const double P_lib = power_for_photon_number(1.0, p, 0.0);
  EXPECT_NEAR(P_lib, static_cast<double>(P), 1e-12 * static_cast<double>(P));
  EXPECT_NEAR(photon_number_from_power(P_lib, p, 0.0), 1.0, 1e-12);
}

TEST(PhotonNumber, ZeroKappaRejected) {
  const ResonatorParams bad{hz_to_angular(5e9), 0.0, 0.0};
  EXPECT_THROW(photon_number_from_power(1e-15, bad, 0.0), Error);
}
