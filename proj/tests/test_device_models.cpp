#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "jpq/device_models.hpp"

using namespace jpq;

namespace {

constexpr long double pi_ld = 3.141592653589793238462643383279502884L;
constexpr long double h_ld = 6.62607015e-34L;
constexpr long double Phi0_ld = 2.067833848e-15L;
constexpr long double phi0_ld = Phi0_ld / (2.0L * pi_ld);

long double jrm_oracle(long double phi, long double EJ, long double EL) {
  return phi0_ld * phi0_ld / (EL / 2.0L + EJ * cosl(phi));
}

long double jpc_oracle(long double flux, long double wr, long double Z0, long double EJ, long double EL) {
  const long double L = 2.0L * Z0 / (pi_ld * wr);
  const long double a = pi_ld * pi_ld * L / 2.0L;
  const long double LA = jrm_oracle(0.25L * 2.0L * pi_ld * flux / Phi0_ld, EJ, EL);
  return wr * a / (a + LA);
}

long double jpa_oracle(long double flux, long double wr, long double Lr, long double Lloop, long double Ic) {
  const long double LS = Phi0_ld / (4.0L * pi_ld * Ic * fabsl(cosl(pi_ld * flux / Phi0_ld)));
  return wr / (1.0L + (LS + Lloop / 4.0L) / Lr);
}

// Reference JPC: E_J/h = 144 GHz, shunt L = 61.8 nH.
JpcModelParams reference_jpc(double f_zero_flux_hz) {
  JpcModelParams p;
  p.Z0 = 50.0;
  p.E_J = PhysConstants::h * 144e9;
  p.E_L = PhysConstants::phi0 * PhysConstants::phi0 / 61.8e-9;
  // Exact inversion of the model at zero flux: 1/w = 1/w_r + L_A/(pi Z0).
  const double LA = jrm_inductance(0.0, p.E_J, p.E_L);
  p.omega_r_A = 1.0 / (1.0 / hz_to_angular(f_zero_flux_hz) - LA / (std::numbers::pi * p.Z0));
  return p;
}

JpaModelParams reference_jpa() {
  return {hz_to_angular(6.1e9), 1.774e-9, 7.9e-12, 1.38e-6, {}};
}

JpcModelParams test_jpc() {
  return {hz_to_angular(6e9), 50.0, PhysConstants::h * 144e9, PhysConstants::phi0 * PhysConstants::phi0 / 2e-9, {}};
}

}  // namespace

TEST(FluxCalibration, LinearMap) {
  const FluxCalibration cal{0.3, 1.7};
  EXPECT_EQ(flux_from_control(0.3, cal), 0.0);
  EXPECT_NEAR(flux_from_control(0.3 + 1.7, cal), PhysConstants::Phi0, 1e-15 * PhysConstants::Phi0);
  EXPECT_NEAR(flux_from_control(0.3 + 0.85, cal), 0.5 * PhysConstants::Phi0, 1e-15 * PhysConstants::Phi0);
  EXPECT_NEAR(control_from_flux(flux_from_control(0.77, cal), cal), 0.77, 1e-15);
  EXPECT_THROW(flux_from_control(1.0, FluxCalibration{0.0, 0.0}), Error);
}

TEST(JrmInductance, Examples) {
  const double EJ = PhysConstants::h * 144e9, EL = PhysConstants::phi0 * PhysConstants::phi0 / 61.8e-9;
  const double phi2 = PhysConstants::phi0 * PhysConstants::phi0;
  EXPECT_NEAR(jrm_inductance(0.0, EJ, EL), phi2 / (EL / 2 + EJ), 1e-14 * phi2 / EJ);
  EXPECT_NEAR(jrm_inductance(std::numbers::pi / 2, EJ, 2 * EJ), phi2 / EJ, 1e-12 * phi2 / EJ);
  const long double EJl = h_ld * 144e9L, ELl = phi0_ld * phi0_ld / 61.8e-9L;
  const double oracle = static_cast<double>(jrm_oracle(pi_ld / 8, EJl, ELl));
  EXPECT_NEAR(jrm_inductance(std::numbers::pi / 8, EJ, EL), oracle, 1e-12 * oracle);
}

TEST(JrmInductance, DomainErrorCarriesPhi) {
  const double EJ = PhysConstants::h * 144e9, EL = PhysConstants::h * 10e9;
  try {
    jrm_inductance(2.0, EJ, EL);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
    EXPECT_EQ(e.value(), 2.0);
  }
  // Printed condition uses E_L/4: the band where E_L/4 + E_J cos <= 0 < E_L/2 + E_J cos is rejected.
  const double phi = std::acos(-0.3 * EL / EJ);  // E_J cos = -0.3 E_L
  EXPECT_FALSE(jrm_valid(phi, EJ, EL));
  EXPECT_THROW(jrm_inductance(phi, EJ, EL), DomainError);
}

TEST(JpcFrequency, ZeroFluxMatchesReferenceWhenTuned) {
  const JpcModelParams p = reference_jpc(5.17e9);
  EXPECT_NEAR(angular_to_hz(jpc_frequency(0.0, p)), 5.17e9, 1.0);
}

TEST(JpcFrequency, BareLimitAndOracle) {
  JpcModelParams p = test_jpc();
  p.E_J = PhysConstants::h * 1e22;  // L_A -> 0
  EXPECT_NEAR(jpc_frequency(0.0, p) / p.omega_r_A, 1.0, 1e-9);
  p = test_jpc();
  const double flux = 0.3 * PhysConstants::Phi0;
  const double oracle = static_cast<double>(jpc_oracle(0.3L * Phi0_ld, p.omega_r_A, 50.0L, h_ld * 144e9L,
                                                       phi0_ld * phi0_ld / 2e-9L));
  EXPECT_NEAR(jpc_frequency(flux, p), oracle, 1e-12 * oracle);
  EXPECT_LT(jpc_frequency(flux, p), p.omega_r_A);
}

TEST(JpcFrequency, EvenAndPeriodicInFourFluxQuanta) {
  const JpcModelParams p = test_jpc();
  const double Phi0 = PhysConstants::Phi0;
  for (double x : {0.1, 0.3, 0.7, 1.0}) {
    const double w = jpc_frequency(x * Phi0, p);
    EXPECT_NEAR(jpc_frequency(-x * Phi0, p), w, 1e-12 * w);
    EXPECT_NEAR(jpc_frequency((x + 4.0) * Phi0, p), w, 1e-9 * w);
    EXPECT_NEAR(jpc_frequency((x - 8.0) * Phi0, p), w, 1e-9 * w);
  }
  EXPECT_THROW(jpc_frequency(2.0 * Phi0, p), DomainError);
}

TEST(SquidInductance, Examples) {
  const double Ic = 1.38e-6;
  const double L0 = squid_inductance(0.0, Ic);
  EXPECT_NEAR(L0, 119.2e-12, 0.05e-12);
  EXPECT_NEAR(squid_inductance(PhysConstants::Phi0, Ic), L0, 1e-12 * L0);
  EXPECT_NEAR(squid_inductance(PhysConstants::Phi0 / 3.0, Ic), 2.0 * L0, 1e-12 * L0);
  EXPECT_GE(squid_inductance(0.37 * PhysConstants::Phi0, Ic), L0);
}

TEST(SquidInductance, SingularityGuard) {
  EXPECT_THROW(squid_inductance(0.5 * PhysConstants::Phi0, 1e-6), DomainError);
  // |cos| ~ 3e-6: accepted by the default guard, rejected by a stricter one.
  const double flux = (0.5 - 1e-6) * PhysConstants::Phi0;
  EXPECT_NO_THROW(squid_inductance(flux, 1e-6));
  EXPECT_THROW(squid_inductance(flux, 1e-6, 1e-5), DomainError);
}

TEST(JpaFrequency, ZeroFluxMatchesReference) {
  EXPECT_NEAR(angular_to_hz(jpa_frequency(0.0, reference_jpa())), 5.71e9, 0.005e9);
}

TEST(JpaFrequency, BareLimitAndOracle) {
  JpaModelParams p = reference_jpa();
  p.I_c = 1e3;
  p.L_loop = 1e-30;
  EXPECT_NEAR(jpa_frequency(0.0, p) / p.omega_r, 1.0, 1e-9);
  p = reference_jpa();
  const double oracle = static_cast<double>(jpa_oracle(0.4L * Phi0_ld, p.omega_r, 1.774e-9L, 7.9e-12L, 1.38e-6L));
  EXPECT_NEAR(jpa_frequency(0.4 * PhysConstants::Phi0, p), oracle, 1e-12 * oracle);
}

TEST(JpaFrequency, EvenPeriodicMonotoneSweetSpot) {
  const JpaModelParams p = reference_jpa();
  const double Phi0 = PhysConstants::Phi0;
  double prev = jpa_frequency(0.0, p);
  EXPECT_LT(prev, p.omega_r);
  for (int k = 1; k < 50; ++k) {
    const double x = 0.499 * k / 49.0;
    const double w = jpa_frequency(x * Phi0, p);
    EXPECT_LT(w, prev);
    EXPECT_NEAR(jpa_frequency(-x * Phi0, p), w, 1e-12 * w);
    EXPECT_NEAR(jpa_frequency((x + 1.0) * Phi0, p), w, 1e-9 * w);
    prev = w;
  }
  const double h = 1e-4 * Phi0;
  const double d = (jpa_frequency(h, p) - jpa_frequency(-h, p)) / (2 * h);
  const double scale = (jpa_frequency(0.0, p) - jpa_frequency(0.1 * Phi0, p)) / (0.1 * Phi0);
  EXPECT_LT(std::abs(d), 1e-6 * scale);
}

TEST(ModelParams, Validation) {
  JpaModelParams a = reference_jpa();
  a.L_loop = 0.0;
  EXPECT_THROW(a.validate(), Error);
  JpcModelParams c = test_jpc();
  c.E_L = -1.0;
  EXPECT_THROW(c.validate(), Error);
  c = test_jpc();
  EXPECT_GT(c.lumped_inductance(), 0.0);
  EXPECT_NEAR(c.shunt_inductance(), 2e-9, 1e-21);
}
