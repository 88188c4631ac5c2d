#pragma once

// Quality-factor extraction from a measured reflection trace.
//
// Delay path (no background available):
//   estimate_delay -> refine_delay -> fit_circle -> normalize_offres
// Background path:
//   background_divide
// then, for both:
//   fit_circle -> shift to origin -> fit_phase -> extract_kappa_ext

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "jpq/error.hpp"
#include "jpq/optim.hpp"
#include "jpq/resonator.hpp"
#include "jpq/trace.hpp"
#include "jpq/units.hpp"

namespace jpq {

struct CircleGeom {
  Complex center{};
  double radius = 0.0;
  double rms_residual = 0.0;
};

// ---------------------------------------------------------------------------
// Algebraic (Kasa) circle fit

/// Least-squares algebraic circle through `points`: minimizes
/// sum (|z|^2 + D x + E y + F)^2. Exact for points on a circle. The data are
/// centred and scaled before solving the 3x3 normal equations.
inline CircleGeom fit_circle(std::span<const Complex> points) {
  const auto n = points.size();
  if (n < 3) throw Error(ErrorKind::invalid_argument, "fit_circle: need at least 3 points");

  Complex mean{};
  for (const auto& z : points) mean += z;
  mean /= static_cast<double>(n);
  double scale = 0.0;
  for (const auto& z : points) scale += std::norm(z - mean);
  scale = std::sqrt(scale / static_cast<double>(n));
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw Error(ErrorKind::invalid_argument, "fit_circle: degenerate (coincident) points");

  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (const auto& z : points) {
    const Complex u = (z - mean) / scale;
    const double x = u.real(), y = u.imag(), w = x * x + y * y;
    cov(0, 0) += x * x;
    cov(0, 1) += x * y;
    cov(1, 1) += y * y;
    const Eigen::Vector3d row(x, y, 1.0);
    A += row * row.transpose();
    b -= row * w;
  }
  cov(1, 0) = cov(0, 1);
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cov).eigenvalues();
  if (ev[0] <= 1e-12 * ev[1])
    throw Error(ErrorKind::invalid_argument, "fit_circle: points are collinear");

  const Eigen::Vector3d sol = A.ldlt().solve(b);
  const double D = sol[0], E = sol[1], F = sol[2];
  const double r2 = 0.25 * (D * D + E * E) - F;
  if (!std::isfinite(r2) || r2 <= 0.0)
    throw Error(ErrorKind::invalid_argument, "fit_circle: degenerate circle");

  CircleGeom g;
  g.center = mean + scale * Complex{-0.5 * D, -0.5 * E};
  g.radius = scale * std::sqrt(r2);
  double ss = 0.0;
  for (const auto& z : points) {
    const double d = std::abs(z - g.center) - g.radius;
    ss += d * d;
  }
  g.rms_residual = std::sqrt(ss / static_cast<double>(n));
  return g;
}

inline CircleGeom fit_circle(const ComplexTrace& t) { return fit_circle(std::span<const Complex>(t.samples)); }

// ---------------------------------------------------------------------------
// Electrical delay

struct DelayEstimate {
  double tau = 0.0;         // s
  bool degenerate = false;  // phase carries no slope information
};

/// Linear fit of the unwrapped phase against frequency, tau = -slope / 2 pi.
/// The slope is shared by the two edge windows (outer 10% of the points on
/// each side) while each window gets its own intercept, so the 2 pi winding
/// of the resonance between the windows does not enter the estimate. The
/// remaining bias comes from the resonance's phase slope inside the windows.
inline DelayEstimate estimate_delay(const ComplexTrace& trace) {
  trace.validate();
  const std::size_t n = trace.size();
  if (n < 8) throw Error(ErrorKind::invalid_argument, "estimate_delay: need at least 8 points");
  const std::vector<double> phase = unwrap_phase(trace.samples);

  const auto [pmin, pmax] = std::minmax_element(phase.begin(), phase.end());
  if (*pmax - *pmin < 1e-12) return {0.0, true};

  const std::size_t w = std::max<std::size_t>(4, n / 10);
  std::vector<std::pair<std::size_t, std::size_t>> windows;
  if (2 * w >= n) windows = {{0, n}};
  else windows = {{0, w}, {n - w, n}};

  double sxy = 0.0, sxx = 0.0;
  for (auto [lo, hi] : windows) {
    double fm = 0.0, pm = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      fm += trace.frequencies[i];
      pm += phase[i];
    }
    fm /= static_cast<double>(hi - lo);
    pm /= static_cast<double>(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      const double df = trace.frequencies[i] - fm;
      sxy += df * (phase[i] - pm);
      sxx += df * df;
    }
  }
  const double slope = sxy / sxx;
  if (std::abs(slope) * (trace.frequencies.back() - trace.frequencies.front()) < 1e-12)
    return {0.0, true};
  return {-slope / two_pi, false};
}

/// Multiplies every sample by e^{+i 2 pi f tau}, removing a delay tau.
inline ComplexTrace remove_delay(const ComplexTrace& trace, double tau) {
  ComplexTrace out = trace;
  if (tau == 0.0) return out;
  for (std::size_t k = 0; k < out.size(); ++k)
    out.samples[k] *= std::polar(1.0, two_pi * out.frequencies[k] * tau);
  return out;
}

struct DelayRefinement {
  double tau = 0.0;
  double residual = 0.0;          // circle residual objective at tau
  double residual_at_seed = 0.0;  // same objective at the seed
  int iterations = 0;
};

/// Circle-fit residual of the delay-corrected trace, normalized by the mean
/// squared magnitude (which the delay correction leaves unchanged).
inline double delay_objective(const ComplexTrace& trace, double tau) {
  const ComplexTrace z = remove_delay(trace, tau);
  double norm = 0.0;
  for (const auto& s : z.samples) norm += std::norm(s);
  norm /= static_cast<double>(z.size());
  const CircleGeom g = fit_circle(z);
  return g.rms_residual * g.rms_residual / norm;
}

/// Minimizes delay_objective over tau, starting at tau0.
inline DelayRefinement refine_delay(const ComplexTrace& trace, double tau0) {
  trace.validate();
  require(std::isfinite(tau0), "refine_delay: seed must be finite");
  const double span = trace.frequencies.back() - trace.frequencies.front();
  // One optimizer unit = one radian of phase accumulated across the span.
  const double unit = 1.0 / (two_pi * span);
  auto objective = [&](const Vector& x) { return delay_objective(trace, tau0 + x[0] * unit); };

  SimplexOptions opt;
  opt.initial_step = Vector::Constant(1, 0.1);
  const FitResult r = minimize_simplex(objective, Vector::Zero(1), opt);
  if (!r.converged) {
    std::ostringstream os;
    os << "refine_delay: simplex did not converge after " << r.iterations << " iterations ("
       << r.message << ")";
    throw Error(ErrorKind::not_converged, os.str());
  }
  // Near the optimum the circle residual grows only as (tau error)^2, so the
  // simplex stalls on the rounding floor of the objective. A symmetric
  // three-point parabola on sqrt(objective), sampled far enough out to sit
  // well above that floor, locates the vertex more precisely.
  double x = r.params[0];
  double best = r.objective;
  for (const double h : {1e-3, 2e-5}) {
    auto g = [&](double xi) { return std::sqrt(objective(Vector::Constant(1, xi))); };
    const double gm = g(x - h), g0 = g(x), gp = g(x + h);
    const double curv = gm - 2.0 * g0 + gp;
    if (!(curv > 0.0)) continue;
    const double xv = x + std::clamp(0.5 * h * (gm - gp) / curv, -h, h);
    const double fv = objective(Vector::Constant(1, xv));
    // Accept unless clearly worse than the rounding floor of the objective.
    if (std::sqrt(fv) <= std::sqrt(best) + 1e-14) {
      x = xv;
      best = fv;
    }
  }

  DelayRefinement out;
  out.residual_at_seed = delay_objective(trace, tau0);
  if (best > out.residual_at_seed) {
    x = 0.0;
    best = out.residual_at_seed;
  }
  out.tau = tau0 + x * unit;
  out.residual = best;
  out.iterations = r.iterations;
  return out;
}

// ---------------------------------------------------------------------------
// Phase fit

struct PhaseFit {
  double kappa = 0.0;   // rad/s
  double omega0 = 0.0;  // rad/s
  double theta0 = 0.0;  // rad, wrapped to (-pi, pi]
  /// -1 when the phase falls with frequency, theta = theta0 + 2 atan(-2 delta/kappa);
  /// +1 for the mirrored convention, theta = theta0 + 2 atan(+2 delta/kappa).
  int direction = -1;
  double rms = 0.0;     // rad
  bool converged = false;
};

inline double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  a = std::remainder(a, 2.0 * pi);
  return a <= -pi ? a + 2.0 * pi : a;
}

namespace detail {

// First frequency at which `phase` (assumed overall decreasing) crosses
// `level`, by linear interpolation.
inline std::optional<double> crossing(const std::vector<double>& f, const std::vector<double>& phase,
                                      double level) {
  for (std::size_t i = 1; i < phase.size(); ++i) {
    const double a = phase[i - 1] - level, b = phase[i] - level;
    if (a == 0.0) return f[i - 1];
    if ((a > 0.0) != (b > 0.0)) return f[i - 1] + (f[i] - f[i - 1]) * a / (a - b);
  }
  return std::nullopt;
}

}  // namespace detail

/// Fits theta(delta) = theta0 + 2 atan(-2 delta / kappa) to the unwrapped
/// phase of a trace whose resonance circle is centred at the origin. The
/// reflection model 1 + kappa_ext/(i delta - kappa/2) winds the other way
/// (phase rising with frequency); the winding direction is detected and the
/// mirrored form theta0 + 2 atan(2 delta / kappa) is fitted in that case.
inline PhaseFit fit_phase(const ComplexTrace& centered) {
  centered.validate();
  const auto& f = centered.frequencies;
  std::vector<double> phase = unwrap_phase(centered.samples);
  const double winding = phase.back() - phase.front();
  if (std::abs(winding) < std::numbers::pi)
    throw Error(ErrorKind::invalid_argument,
                "fit_phase: phase winds by less than pi across the span (insufficient span)");
  const int direction = winding > 0.0 ? 1 : -1;
  // Work with a falling phase; flip back at the end.
  if (direction > 0)
    for (auto& p : phase) p = -p;

  const double f_ref = 0.5 * (f.front() + f.back());
  const double span = f.back() - f.front();
  const double mid = 0.5 * (phase.front() + phase.back());
  const double f0_guess = detail::crossing(f, phase, mid).value_or(f_ref);
  const auto f_lo = detail::crossing(f, phase, mid + 0.5 * std::numbers::pi);
  const auto f_hi = detail::crossing(f, phase, mid - 0.5 * std::numbers::pi);
  const double kappa_guess = (f_lo && f_hi && *f_hi > *f_lo) ? (*f_hi - *f_lo) : 0.1 * span;

  // x = [theta0, (f0 - f_ref)/span, kappa_hz/span]
  auto residuals = [&](const Vector& x) {
    Vector r(static_cast<Eigen::Index>(f.size()));
    const double f0 = f_ref + x[1] * span;
    const double kh = x[2] * span;
    for (std::size_t i = 0; i < f.size(); ++i)
      r[static_cast<Eigen::Index>(i)] = x[0] + 2.0 * std::atan(-2.0 * (f[i] - f0) / kh) - phase[i];
    return r;
  };
  Vector x0(3);
  x0 << mid, (f0_guess - f_ref) / span, std::max(kappa_guess / span, 1e-9);
  Bounds b = Bounds::unbounded(3);
  b.lower[1] = -0.5;
  b.upper[1] = 0.5;
  b.lower[2] = 1e-12;
  const FitResult r = least_squares(residuals, x0, b);

  PhaseFit out;
  out.direction = direction;
  out.theta0 = wrap_angle(direction > 0 ? -r.params[0] : r.params[0]);
  out.omega0 = hz_to_angular(f_ref + r.params[1] * span);
  out.kappa = hz_to_angular(r.params[2] * span);
  out.rms = r.residual_rms;
  out.converged = r.converged;
  return out;
}

inline ComplexTrace shift_to_origin(const ComplexTrace& t, Complex center) {
  ComplexTrace out = t;
  for (auto& z : out.samples) z -= center;
  return out;
}

// ---------------------------------------------------------------------------
// Normalization

/// Scales and rotates a delay-corrected trace so that the off-resonant
/// point maps to 1 + 0i and the circle centre lies on the real axis.
///
/// The off-resonant point is taken on the fitted circle, opposite to the
/// resonance point: centre + r e^{i(theta0 + pi)}, with theta0 from a phase
/// fit of the centred data. The remaining rotation about 1 + 0i (impedance
/// mismatch tilt) is removed by aligning the centre with the real axis.
inline ComplexTrace normalize_offres(const ComplexTrace& trace, double tau, const CircleGeom& circle) {
  const ComplexTrace z = remove_delay(trace, tau);
  const PhaseFit pf = fit_phase(shift_to_origin(z, circle.center));
  const double span = hz_to_angular(z.frequencies.back() - z.frequencies.front());
  if (span < 5.0 * pf.kappa) {
    std::ostringstream os;
    os << "normalize_offres: span " << span / pf.kappa
       << " kappa is below 5 kappa; off-resonant point indeterminate";
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  const Complex off = circle.center + std::polar(circle.radius, pf.theta0 + std::numbers::pi);
  const Complex c = circle.center / off;
  const Complex derotate = std::polar(1.0, -std::arg(1.0 - c));
  ComplexTrace out = z;
  for (auto& s : out.samples) s = 1.0 + (s / off - 1.0) * derotate;
  return out;
}

/// Elementwise S_M / S_B. The background is linearly interpolated (real and
/// imaginary parts separately) when the grids differ.
inline ComplexTrace background_divide(const ComplexTrace& trace, const ComplexTrace& background) {
  trace.validate();
  background.validate();
  const auto& f = trace.frequencies;
  const auto& fb = background.frequencies;

  bool same_grid = f.size() == fb.size();
  for (std::size_t i = 0; same_grid && i < f.size(); ++i)
    same_grid = std::abs(f[i] - fb[i]) <= 1e-9 * std::max(std::abs(f[i]), 1.0);

  std::vector<Complex> bg(f.size());
  if (same_grid) {
    bg = background.samples;
  } else {
    if (f.front() < fb.front() || f.back() > fb.back())
      throw Error(ErrorKind::invalid_argument,
                  "background_divide: background grid does not cover the trace grid");
    std::size_t j = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      while (j + 2 < fb.size() && fb[j + 1] < f[i]) ++j;
      const double t = (f[i] - fb[j]) / (fb[j + 1] - fb[j]);
      bg[i] = background.samples[j] + t * (background.samples[j + 1] - background.samples[j]);
    }
  }
  ComplexTrace out = trace;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (std::abs(bg[i]) <= 1e-6)
      throw Error(ErrorKind::invalid_argument,
                  "background_divide: background magnitude below 1e-6 at index " + std::to_string(i));
    out.samples[i] /= bg[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// External coupling

/// Interval on Q_int^-1 = Q_l^-1 - Q_ext^-1.
struct QintInvConstraint {
  double lower = 0.0;
  double upper = 0.0;
};

struct KappaExtOptions {
  std::optional<QintInvConstraint> constraint;
  /// Let omega0 and kappa float within +-1% of the phase-fit values.
  bool float_center_and_width = false;
  /// Q_int/Q_ext above which the extracted Q_int is flagged ill-conditioned.
  double ill_condition_threshold = 100.0;
};

struct KappaExtFit {
  ResonatorParams resonator;
  double rms = 0.0;
  bool converged = false;
  /// Q_int / Q_ext = kappa_ext / kappa_int: amplification of a relative
  /// error in kappa into the relative error of Q_int.
  double qint_condition = 0.0;
  bool ill_conditioned = false;
  bool constrained = false;
  std::vector<std::string> warnings;
};

/// Least-squares fit of the real and imaginary parts of S21^MC to the ideal
/// reflection with kappa_ext as the only free parameter (kappa and omega0
/// from the phase fit).
inline KappaExtFit extract_kappa_ext(const ComplexTrace& s21mc, double kappa, double omega0,
                                     const KappaExtOptions& opt = {}) {
  s21mc.validate();
  require(std::isfinite(kappa) && kappa > 0.0, "extract_kappa_ext: kappa must be positive");
  require(std::isfinite(omega0) && omega0 > 0.0, "extract_kappa_ext: omega0 must be positive");

  const auto& f = s21mc.frequencies;
  const auto m = static_cast<Eigen::Index>(f.size());

  // x = [kappa_ext/kappa, (omega0' - omega0)/kappa, kappa'/kappa]
  auto residuals = [&](const Vector& x) {
    Vector r(2 * m);
    const double ke = x[0] * kappa;
    const double w0 = omega0 + x[1] * kappa;
    const double k = x[2] * kappa;
    const ResonatorParams p{w0, ke, k - ke};
    for (Eigen::Index i = 0; i < m; ++i) {
      const Complex s = 1.0 + p.kappa_ext / (Complex{0.0, hz_to_angular(f[static_cast<std::size_t>(i)]) - w0} - 0.5 * k);
      const Complex d = s - s21mc.samples[static_cast<std::size_t>(i)];
      r[2 * i] = d.real();
      r[2 * i + 1] = d.imag();
    }
    return r;
  };

  Bounds b = Bounds::unbounded(3);
  b.lower[0] = 1e-9;
  b.upper[0] = 2.0;
  b.lower[1] = b.upper[1] = 0.0;
  b.lower[2] = b.upper[2] = 1.0;
  if (opt.float_center_and_width) {
    b.lower[1] = -0.01 * omega0 / kappa;
    b.upper[1] = 0.01 * omega0 / kappa;
    b.lower[2] = 0.99;
    b.upper[2] = 1.01;
  }
  if (opt.constraint) {
    const auto& c = *opt.constraint;
    require(std::isfinite(c.lower) && std::isfinite(c.upper) && c.lower >= 0.0 && c.lower <= c.upper,
            "extract_kappa_ext: constraint interval must satisfy 0 <= lower <= upper");
    // kappa_int/omega0 in [lo, hi]  <=>  kappa_ext/kappa in [1 - hi w0/k, 1 - lo w0/k]
    b.lower[0] = std::max(1e-9, 1.0 - c.upper * omega0 / kappa);
    b.upper[0] = 1.0 - c.lower * omega0 / kappa;
    if (!(b.upper[0] > 0.0))
      throw Error(ErrorKind::invalid_argument,
                  "extract_kappa_ext: constraint interval incompatible with the fitted kappa");
  }

  // Start from the circle diameter, which equals 2 kappa_ext / kappa.
  const CircleGeom g = fit_circle(s21mc);
  Vector x0(3);
  x0 << std::clamp(g.radius, b.lower[0], b.upper[0]), 0.0, 1.0;

  const FitResult r = least_squares(residuals, x0, b);

  KappaExtFit out;
  out.converged = r.converged;
  out.rms = r.residual_rms;
  out.constrained = opt.constraint.has_value();
  const double w0 = omega0 + r.params[1] * kappa;
  const double k = r.params[2] * kappa;
  double ke = r.params[0] * kappa;
  if (ke > k) {
    if (ke > k * (1.0 + 1e-6)) {
      std::ostringstream os;
      os << "extract_kappa_ext: kappa_ext/kappa = " << ke / k
         << " exceeds 1 at the optimum (unphysical, negative internal loss)";
      throw Error(ErrorKind::unphysical, os.str());
    }
    out.warnings.push_back("kappa_ext exceeded kappa within 1e-6 and was clamped (kappa_int = 0)");
    ke = k;
  }
  out.resonator = ResonatorParams::from_rates(w0, ke, k - ke);
  out.qint_condition = out.resonator.kappa_int > 0.0 ? ke / out.resonator.kappa_int
                                                     : std::numeric_limits<double>::infinity();
  out.ill_conditioned = out.qint_condition > opt.ill_condition_threshold;
  if (out.ill_conditioned) {
    std::ostringstream os;
    os << "Q_int/Q_ext = " << out.qint_condition << " above " << opt.ill_condition_threshold
       << ": Q_int is ill-conditioned"
       << (out.constrained ? " and determined by the supplied constraint"
                           : "; consider a Q_int^-1 constraint");
    out.warnings.push_back(os.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full pipeline

enum class NormalizationMode { offres_normalize, background_divide };

inline const char* to_string(NormalizationMode m) {
  return m == NormalizationMode::offres_normalize ? "off-resonant-normalize" : "background-divide";
}

struct ReflectionFitOptions {
  std::optional<ComplexTrace> background;
  KappaExtOptions kappa_ext{};
};

struct ReflectionQuality {
  double delay_residual = 0.0;  // circle objective after delay refinement
  double circle_rms = 0.0;      // circle fit of S21^MC
  double phase_rms = 0.0;       // rad
  double kappa_ext_rms = 0.0;   // kappa_ext fit of the normalized trace
  /// Distance of the S21^MC circle from an ideal circle through 1 + 0i:
  /// |center - (1 - radius)|.
  double displacement = 0.0;
};

struct ReflectionFitReport {
  ResonatorParams resonator;
  double delay = 0.0;
  double delay_seed = 0.0;
  bool delay_degenerate = false;
  CircleGeom circle;  // of S21^MC
  double theta0 = 0.0;
  NormalizationMode method = NormalizationMode::offres_normalize;
  ReflectionQuality quality;
  double qint_condition = 0.0;
  bool ill_conditioned = false;
  bool constrained = false;
  bool converged = false;
  std::vector<std::string> warnings;
  ComplexTrace corrected;  // S21^MC
};

namespace detail {

template <class F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage(stage);
    throw;
  }
}

}  // namespace detail

inline ReflectionFitReport fit_reflection(const ComplexTrace& trace, const ReflectionFitOptions& opt = {}) {
  detail::run_stage("validate", [&] { trace.validate(); return 0; });
  ReflectionFitReport rep;

  if (opt.background) {
    rep.method = NormalizationMode::background_divide;
    rep.corrected = detail::run_stage("background_divide",
                                      [&] { return background_divide(trace, *opt.background); });
  } else {
    rep.method = NormalizationMode::offres_normalize;
    const DelayEstimate est = detail::run_stage("estimate_delay", [&] { return estimate_delay(trace); });
    rep.delay_seed = est.tau;
    rep.delay_degenerate = est.degenerate;
    if (est.degenerate) rep.warnings.push_back("delay estimate degenerate (constant phase); seeded with 0");
    const DelayRefinement ref =
        detail::run_stage("refine_delay", [&] { return refine_delay(trace, est.tau); });
    rep.delay = ref.tau;
    rep.quality.delay_residual = ref.residual;
    const CircleGeom raw = detail::run_stage(
        "fit_circle", [&] { return fit_circle(remove_delay(trace, rep.delay)); });
    rep.corrected =
        detail::run_stage("normalize_offres", [&] { return normalize_offres(trace, rep.delay, raw); });
  }

  rep.circle = detail::run_stage("fit_circle", [&] { return fit_circle(rep.corrected); });
  rep.quality.circle_rms = rep.circle.rms_residual;
  const PhaseFit pf = detail::run_stage(
      "fit_phase", [&] { return fit_phase(shift_to_origin(rep.corrected, rep.circle.center)); });
  rep.theta0 = pf.theta0;
  rep.quality.phase_rms = pf.rms;

  const KappaExtFit kf = detail::run_stage("extract_kappa_ext", [&] {
    return extract_kappa_ext(rep.corrected, pf.kappa, pf.omega0, opt.kappa_ext);
  });
  rep.resonator = kf.resonator;
  rep.quality.kappa_ext_rms = kf.rms;
  rep.qint_condition = kf.qint_condition;
  rep.ill_conditioned = kf.ill_conditioned;
  rep.constrained = kf.constrained;
  rep.converged = pf.converged && kf.converged;
  rep.warnings.insert(rep.warnings.end(), kf.warnings.begin(), kf.warnings.end());

  rep.quality.displacement = std::abs(rep.circle.center - (1.0 - rep.circle.radius));
  const double tol = 1e-3 + 3.0 * rep.circle.rms_residual;
  if (rep.quality.displacement > tol) {
    std::ostringstream os;
    os << "corrected circle displaced by " << rep.quality.displacement
       << " from an ideal circle through (1,0) (possible Fano interference)";
    rep.warnings.push_back(os.str());
  }
  return rep;
}

}  // namespace jpq
