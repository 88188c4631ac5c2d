#pragma once

// Squeezed-vacuum generation by a degenerate parametric amplifier with
// internal loss, thermal input baths and pump-induced excess noise.
//
// Bath b couples through the external port and sits at T_att (last
// attenuator); bath c couples through the internal loss channel and sits at
// the mixing-chamber temperature T_mxc.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jpq/error.hpp"
#include "jpq/optim.hpp"
#include "jpq/units.hpp"

namespace jpq {

struct SqueezingParams {
  double omega_jpa = 0.0;     // rad/s
  double kappa_ext = 0.0;     // rad/s
  double kappa_int = 0.0;     // rad/s
  double chi2 = 0.0;          // rad/s per unit pump amplitude
  double nJ_prefactor = 0.0;  // n_J'
  double delta_exp = 0.0;     // delta
  double T_att = 0.0;         // K
  double T_mxc = 0.0;         // K
  double pump_coupling = 0.0; // pump amplitude per sqrt(W)

  double kappa() const { return kappa_ext + kappa_int; }
  double q_int() const {
    return kappa_int > 0.0 ? omega_jpa / kappa_int : std::numeric_limits<double>::infinity();
  }

  void validate() const {
    require(std::isfinite(omega_jpa) && omega_jpa > 0.0, "SqueezingParams: omega_jpa must be positive");
    require(std::isfinite(kappa_ext) && kappa_ext > 0.0, "SqueezingParams: kappa_ext must be positive");
    require(std::isfinite(kappa_int) && kappa_int >= 0.0, "SqueezingParams: kappa_int must be non-negative");
    require(std::isfinite(chi2) && chi2 >= 0.0, "SqueezingParams: chi2 must be non-negative");
    require(std::isfinite(nJ_prefactor) && nJ_prefactor >= 0.0,
            "SqueezingParams: nJ_prefactor must be non-negative");
    require(std::isfinite(delta_exp) && delta_exp >= 0.0, "SqueezingParams: delta_exp must be non-negative");
    require(std::isfinite(T_att) && T_att >= 0.0, "SqueezingParams: T_att must be non-negative");
    require(std::isfinite(T_mxc) && T_mxc >= 0.0, "SqueezingParams: T_mxc must be non-negative");
    require(std::isfinite(pump_coupling) && pump_coupling >= 0.0,
            "SqueezingParams: pump_coupling must be non-negative");
  }
};

struct QuadratureVariances {
  double p2 = 0.0;  // squeezed quadrature
  double q2 = 0.0;  // anti-squeezed quadrature
};

struct SqueezedStateMetrics {
  double S = 0.0;   // dB, positive below vacuum
  double A = 0.0;   // dB
  double mu = 1.0;
  double sigma_s2 = 0.25;
  double sigma_as2 = 0.25;
};

inline constexpr double vacuum_variance = 0.25;

namespace detail {

inline void check_below_threshold(double chi, double kappa, const char* who) {
  if (!std::isfinite(chi) || chi < 0.0)
    throw DomainError(std::string(who) + ": chi must be finite and non-negative", chi,
                      ErrorKind::invalid_argument);
  if (!(chi < 0.5 * kappa)) {
    std::ostringstream os;
    os << who << ": chi = " << chi << " rad/s is at or above the oscillation threshold kappa/2 = "
       << 0.5 * kappa << " rad/s";
    throw DomainError(os.str(), chi, ErrorKind::threshold);
  }
}

}  // namespace detail

/// Output variances of both quadratures for pump strength chi (rad/s).
inline QuadratureVariances output_variances(double chi, const SqueezingParams& p) {
  p.validate();
  const double ke = p.kappa_ext, ki = p.kappa_int, k = p.kappa();
  detail::check_below_threshold(chi, k, "output_variances");
  const double f_hz = angular_to_hz(p.omega_jpa);
  const double vb = (1.0 + 2.0 * planck_occupation(f_hz, p.T_att)) / 4.0;
  const double vc = (1.0 + 2.0 * planck_occupation(f_hz, p.T_mxc)) / 4.0;
  const double cross = 4.0 * ke * ki * vc;
  const double a = 2.0 * chi - ke + ki;
  const double b = 2.0 * chi + ke - ki;
  return {(a * a * vb + cross) / ((2.0 * chi + k) * (2.0 * chi + k)),
          (b * b * vb + cross) / ((2.0 * chi - k) * (2.0 * chi - k))};
}

/// Degenerate gain ((2 chi + kappa) / (kappa - 2 chi))^2.
inline double gain_from_chi(double chi, double kappa) {
  require(std::isfinite(kappa) && kappa > 0.0, "gain_from_chi: kappa must be positive");
  detail::check_below_threshold(chi, kappa, "gain_from_chi");
  const double r = (2.0 * chi + kappa) / (kappa - 2.0 * chi);
  return r * r;
}

/// Pump-induced noise photons n_J' (G - 1)^delta; zero at unit gain.
inline double pump_noise(double G, const SqueezingParams& p) {
  require(std::isfinite(G) && G >= 1.0, "pump_noise: gain must be >= 1");
  if (G == 1.0 || p.nJ_prefactor == 0.0) return 0.0;
  return p.nJ_prefactor * std::pow(G - 1.0, p.delta_exp);
}

inline SqueezedStateMetrics metrics(double sigma_s2, double sigma_as2) {
  if (!(std::isfinite(sigma_s2) && sigma_s2 > 0.0 && std::isfinite(sigma_as2) && sigma_as2 > 0.0))
    throw Error(ErrorKind::invalid_argument, "metrics: variances must be finite and positive");
  const double prod = sigma_s2 * sigma_as2;
  if (prod < 1.0 / 16.0 - 1e-12) {
    std::ostringstream os;
    os << "metrics: variance product " << prod << " violates the uncertainty bound 1/16";
    throw DomainError(os.str(), prod, ErrorKind::unphysical);
  }
  SqueezedStateMetrics m;
  m.sigma_s2 = sigma_s2;
  m.sigma_as2 = sigma_as2;
  m.S = -10.0 * std::log10(sigma_s2 / vacuum_variance);
  m.A = 10.0 * std::log10(sigma_as2 / vacuum_variance);
  m.mu = 1.0 / (4.0 * std::sqrt(prod));
  return m;
}

/// Full state at a given chi: output variances plus evenly split pump noise.
inline SqueezedStateMetrics state_at_chi(double chi, const SqueezingParams& p) {
  const QuadratureVariances v = output_variances(chi, p);
  const double nJ = pump_noise(gain_from_chi(chi, p.kappa()), p);
  return metrics(v.p2 + 0.5 * nJ, v.q2 + 0.5 * nJ);
}

inline double chi_from_power(PowerDbm power, const SqueezingParams& p) {
  return p.pump_coupling * std::sqrt(dbm_to_watts(power)) * p.chi2;
}

inline std::vector<SqueezedStateMetrics> model_curve(const SqueezingParams& p,
                                                     const std::vector<PowerDbm>& powers) {
  p.validate();
  std::vector<SqueezedStateMetrics> out;
  out.reserve(powers.size());
  for (const PowerDbm& pw : powers) {
    const double chi = chi_from_power(pw, p);
    if (!(chi < 0.5 * p.kappa())) {
      std::ostringstream os;
      os << "model_curve: pump power " << pw.value << " dBm drives chi = " << chi
         << " rad/s past the oscillation threshold " << 0.5 * p.kappa() << " rad/s";
      throw DomainError(os.str(), pw.value, ErrorKind::threshold);
    }
    out.push_back(state_at_chi(chi, p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Joint fit of squeezing and purity vs pump power

struct SqueezingPoint {
  double pump_power_dbm = 0.0;
  double squeezing_db = 0.0;
  double purity = 0.0;

  bool operator==(const SqueezingPoint&) const = default;
};

/// Order of the free parameters in SqueezingFit::fit.params.
enum SqueezingFreeParam { sq_kappa_int, sq_chi2, sq_nJ_prefactor, sq_delta_exp, sq_T_att, sq_T_mxc };
inline constexpr int squeezing_free_count = 6;
inline const char* squeezing_free_names[squeezing_free_count] = {"kappa_int", "chi2", "nJ_prefactor",
                                                                 "delta_exp", "T_att", "T_mxc"};

struct SqueezingFitOptions {
  double purity_weight = 100.0;
  double T_min = 0.010;  // K
  double T_max = 0.050;  // K
  /// Optional extra bounds on the free parameters in physical units (order
  /// of SqueezingFreeParam); intersected with the temperature window.
  std::optional<Bounds> bounds;
  Tolerances tol{};
};

struct SqueezingFit {
  SqueezingParams params;
  /// params in physical units, order of SqueezingFreeParam.
  FitResult fit;
  double q_int = 0.0;
  std::vector<std::string> warnings;
};

/// Fits kappa_int, chi2, n_J', delta, T_att and T_mxc with kappa_ext,
/// omega_jpa and pump_coupling held at their `init` values. Trial points
/// driving any data point past threshold are rejected by the optimizer.
inline SqueezingFit fit_squeezing(const std::vector<SqueezingPoint>& data, const SqueezingParams& init,
                                  const SqueezingFitOptions& opt = {}) {
  init.validate();
  require(data.size() >= 6, "fit_squeezing: need at least 6 data points");
  require(std::isfinite(opt.purity_weight) && opt.purity_weight > 0.0,
          "fit_squeezing: purity weight must be positive");
  require(0.0 <= opt.T_min && opt.T_min <= opt.T_max, "fit_squeezing: invalid temperature window");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& d = data[i];
    if (!std::isfinite(d.pump_power_dbm) || !std::isfinite(d.squeezing_db) || !std::isfinite(d.purity))
      throw Error(ErrorKind::invalid_argument,
                  "fit_squeezing: non-finite value in data point " + std::to_string(i));
  }
  require(init.pump_coupling > 0.0, "fit_squeezing: pump_coupling must be positive");

  SqueezingFit out;
  Vector scale(squeezing_free_count);
  scale << 1e-3 * init.kappa_ext, two_pi * 1e8, 1e-2, 1e-1, 1e-2, 1e-2;

  Bounds b;
  b.lower = Vector::Zero(squeezing_free_count);
  b.upper = Vector::Constant(squeezing_free_count, std::numeric_limits<double>::infinity());
  b.lower[sq_T_att] = b.lower[sq_T_mxc] = opt.T_min;
  b.upper[sq_T_att] = b.upper[sq_T_mxc] = opt.T_max;
  if (opt.bounds) {
    opt.bounds->validate(squeezing_free_count);
    b.lower = b.lower.cwiseMax(opt.bounds->lower);
    b.upper = b.upper.cwiseMin(opt.bounds->upper);
    b.validate(squeezing_free_count);
  }

  auto unpack = [&](const Vector& x) {
    SqueezingParams q = init;
    q.kappa_int = x[sq_kappa_int] * scale[sq_kappa_int];
    q.chi2 = x[sq_chi2] * scale[sq_chi2];
    q.nJ_prefactor = x[sq_nJ_prefactor] * scale[sq_nJ_prefactor];
    q.delta_exp = x[sq_delta_exp] * scale[sq_delta_exp];
    q.T_att = x[sq_T_att] * scale[sq_T_att];
    q.T_mxc = x[sq_T_mxc] * scale[sq_T_mxc];
    return q;
  };

  Vector phys(squeezing_free_count);
  phys << init.kappa_int, init.chi2, init.nJ_prefactor, init.delta_exp, init.T_att, init.T_mxc;
  const Vector projected = b.project(phys);
  if (projected != phys)
    out.warnings.push_back("initial parameters outside the fit bounds were projected onto them");
  Bounds xb{b.lower.cwiseQuotient(scale), b.upper.cwiseQuotient(scale)};
  const Vector x0 = projected.cwiseQuotient(scale);

  const auto m = static_cast<Eigen::Index>(data.size());
  auto residuals = [&](const Vector& x) {
    Vector r(2 * m);
    const SqueezingParams q = unpack(x);
    const double half_kappa = 0.5 * q.kappa();
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& d = data[static_cast<std::size_t>(i)];
      const double chi = chi_from_power(PowerDbm{d.pump_power_dbm}, q);
      if (!(chi < half_kappa)) {
        r[i] = r[m + i] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const SqueezedStateMetrics s = state_at_chi(chi, q);
      r[i] = s.S - d.squeezing_db;
      r[m + i] = opt.purity_weight * (s.mu - d.purity);
    }
    return r;
  };

  if (!residuals(x0).allFinite())
    throw Error(ErrorKind::threshold,
                "fit_squeezing: initial parameters drive at least one pump power past threshold");

  // T_att trades off against kappa_int, leaving shallow boundary basins; a
  // few starts across the temperature window pick the deepest one.
  LsqOptions lo;
  lo.tol = opt.tol;
  FitResult r = least_squares(residuals, x0, xb, lo);
  for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    Vector xs = x0;
    xs[sq_T_att] = (b.lower[sq_T_att] + frac * (b.upper[sq_T_att] - b.lower[sq_T_att])) / scale[sq_T_att];
    if (!residuals(xs).allFinite()) continue;
    FitResult alt = least_squares(residuals, xs, xb, lo);
    if (alt.objective < r.objective) r = std::move(alt);
  }
  out.params = unpack(r.params);
  r.params = r.params.cwiseProduct(scale);
  if (r.covariance) *r.covariance = scale.asDiagonal() * (*r.covariance) * scale.asDiagonal();
  out.fit = r;
  out.q_int = out.params.q_int();
  for (int j = 0; j < squeezing_free_count; ++j)
    if (r.params[j] <= b.lower[j] || r.params[j] >= b.upper[j])
      out.warnings.push_back(std::string(squeezing_free_names[j]) + " finished on a bound");
  return out;
}

/// Synthetic (power, S, mu) data from the model with Gaussian noise of
/// sigma_S dB on squeezing and sigma_mu (absolute) on purity.
inline std::vector<SqueezingPoint> synth_squeezing_data(const SqueezingParams& p,
                                                        const std::vector<PowerDbm>& powers, double sigma_S,
                                                        double sigma_mu, std::uint64_t seed) {
  require(std::isfinite(sigma_S) && sigma_S >= 0.0 && std::isfinite(sigma_mu) && sigma_mu >= 0.0,
          "synth_squeezing_data: noise levels must be non-negative");
  const auto curve = model_curve(p, powers);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<SqueezingPoint> out;
  out.reserve(powers.size());
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const double nS = gauss(rng);
    const double nm = gauss(rng);
    out.push_back({powers[i].value, curve[i].S + sigma_S * nS, curve[i].mu + sigma_mu * nm});
  }
  return out;
}

}  // namespace jpq
