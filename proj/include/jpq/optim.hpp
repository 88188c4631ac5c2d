#pragma once

// Small dense optimizers for trace fitting (at most a handful of
// parameters): Nelder-Mead simplex and damped Gauss-Newton
// (Levenberg-Marquardt) with box bounds and a finite-difference Jacobian.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jpq/error.hpp"

namespace jpq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Tolerances {
  double x_rel = 1e-10;  // relative parameter change
  double f_abs = 1e-12;  // objective change / spread
  int max_iter = 500;
};

struct Bounds {
  Vector lower;
  Vector upper;

  static Bounds unbounded(Eigen::Index n) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {Vector::Constant(n, -inf), Vector::Constant(n, inf)};
  }

  Eigen::Index size() const { return lower.size(); }

  void validate(Eigen::Index n) const {
    require(lower.size() == n && upper.size() == n, "Bounds: dimension mismatch");
    for (Eigen::Index i = 0; i < n; ++i)
      require(!std::isnan(lower[i]) && !std::isnan(upper[i]) && lower[i] <= upper[i],
              "Bounds: lower must not exceed upper");
  }

  bool contains(const Vector& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
  }

  Vector project(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
};

struct FitResult {
  Vector params;
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
  std::optional<Matrix> covariance;
  /// Final objective: 0.5 |r|^2 for least squares, f(x) for the simplex.
  double objective = 0.0;
  /// Ratio of extreme eigenvalues of J^T J at the solution (least squares).
  double normal_condition = 0.0;
  std::string message;
};

// ---------------------------------------------------------------------------
// Nelder-Mead

struct SimplexOptions {
  Tolerances tol{};
  /// Per-coordinate initial simplex step; empty selects 5% of |x0| (or
  /// 2.5e-4 for zero coordinates).
  Vector initial_step;
};

template <class Objective>
FitResult minimize_simplex(Objective&& objective, const Vector& x0, const SimplexOptions& opt = {}) {
  const Eigen::Index n = x0.size();
  require(n > 0, "minimize_simplex: empty parameter vector");

  auto eval = [&](const Vector& x) {
    const double v = objective(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "minimize_simplex: objective not finite at x = [" << x.transpose() << "]";
      throw Error(ErrorKind::not_converged, os.str());
    }
    return v;
  };

  std::vector<Vector> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> vals(pts.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    double step = opt.initial_step.size() == n ? opt.initial_step[i]
                                               : (x0[i] != 0.0 ? 0.05 * x0[i] : 2.5e-4);
    pts[static_cast<std::size_t>(i + 1)][i] += step;
  }
  vals[0] = eval(pts[0]);
  const double f0 = vals[0];
  for (std::size_t i = 1; i < pts.size(); ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(pts.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<Vector> p2;
    std::vector<double> v2;
    p2.reserve(pts.size());
    v2.reserve(pts.size());
    for (auto k : order) {
      p2.push_back(pts[k]);
      v2.push_back(vals[k]);
    }
    pts.swap(p2);
    vals.swap(v2);
  };

  FitResult res;
  int iter = 0;
  bool converged = false;
  for (; iter < opt.tol.max_iter; ++iter) {
    sort_simplex();
    double diameter = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      diameter = std::max(diameter, (pts[i] - pts[0]).cwiseAbs().maxCoeff());
    const double scale = std::max(1.0, pts[0].cwiseAbs().maxCoeff());
    const double spread = vals.back() - vals.front();
    if (diameter <= opt.tol.x_rel * scale && spread <= opt.tol.f_abs * (1.0 + std::abs(vals[0]))) {
      converged = true;
      break;
    }

    Vector centroid = Vector::Zero(n);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
    centroid /= static_cast<double>(n);
    const Vector& worst = pts.back();

    const Vector xr = centroid + (centroid - worst);
    const double fr = eval(xr);
    if (fr < vals[0]) {
      const Vector xe = centroid + 2.0 * (centroid - worst);
      const double fe = eval(xe);
      if (fe < fr) {
        pts.back() = xe;
        vals.back() = fe;
      } else {
        pts.back() = xr;
        vals.back() = fr;
      }
      continue;
    }
    if (fr < vals[vals.size() - 2]) {
      pts.back() = xr;
      vals.back() = fr;
      continue;
    }
    // Contraction (outside if the reflected point beat the worst vertex).
    const bool outside = fr < vals.back();
    const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                              : Vector(centroid + 0.5 * (worst - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals.back())) {
      pts.back() = xc;
      vals.back() = fc;
      continue;
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
      pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
      vals[i] = eval(pts[i]);
    }
  }
  sort_simplex();

  res.params = pts[0];
  res.objective = vals[0];
  // Guard the monotonicity contract against a start vertex that was never
  // improved upon (the simplex only ever replaces vertices by better ones).
  if (f0 < res.objective) {
    res.params = x0;
    res.objective = f0;
  }
  res.residual_rms = std::sqrt(std::max(0.0, res.objective));
  res.iterations = iter;
  res.converged = converged;
  res.message = converged ? "simplex converged" : "simplex reached max_iter";
  return res;
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt with box bounds

struct LsqOptions {
  Tolerances tol{};
  /// Relative finite-difference step: h_j = fd_step * max(|p_j|, 1).
  double fd_step = 1e-6;
  /// Called with every accepted iterate (including the start point).
  std::function<void(const Vector&)> on_accept;
};

/// Finite-difference Jacobian of `residuals` at `p`. Central differences
/// unless a bound forces a one-sided step.
template <class Residuals>
Matrix numeric_jacobian(Residuals&& residuals, const Vector& p, const Vector& r0, const Bounds& b,
                        double fd_step) {
  const Eigen::Index n = p.size();
  Matrix J(r0.size(), n);
  Vector x = p;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = fd_step * std::max(std::abs(p[j]), 1.0);
    const bool up_ok = p[j] + h <= b.upper[j];
    const bool down_ok = p[j] - h >= b.lower[j];
    Vector col;
    if (up_ok && down_ok) {
      x[j] = p[j] + h;
      const Vector rp = residuals(x);
      x[j] = p[j] - h;
      const Vector rm = residuals(x);
      col = (rp - rm) / (2.0 * h);
    } else if (up_ok) {
      x[j] = p[j] + h;
      col = (residuals(x) - r0) / h;
    } else {
      x[j] = p[j] - h;
      col = (r0 - residuals(x)) / h;
    }
    x[j] = p[j];
    if (!col.allFinite()) col.setZero();
    J.col(j) = col;
  }
  return J;
}

template <class Residuals>
FitResult least_squares(Residuals&& residuals, const Vector& p0, const Bounds& bounds,
                        const LsqOptions& opt = {}) {
  const Eigen::Index n = p0.size();
  require(n > 0, "least_squares: empty parameter vector");
  bounds.validate(n);
  require(bounds.contains(p0), "least_squares: start point outside bounds");

  Vector p = p0;
  Vector r = residuals(p);
  require(r.size() > 0 && r.allFinite(), "least_squares: residuals not finite at start point");
  const Eigen::Index m = r.size();
  double cost = 0.5 * r.squaredNorm();
  if (opt.on_accept) opt.on_accept(p);

  double lambda = 1e-3;
  int iter = 0;
  bool converged = false;
  std::string message = "max_iter reached";

  for (; iter < opt.tol.max_iter && !converged; ++iter) {
    if (cost == 0.0) {
      converged = true;
      message = "zero residual";
      break;
    }
    const Matrix J = numeric_jacobian(residuals, p, r, bounds, opt.fd_step);
    const Matrix A = J.transpose() * J;
    const Vector g = J.transpose() * r;

    // Coordinates pinned on a bound with the gradient pushing outward are
    // frozen for this iteration; degenerate intervals are always frozen.
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (bounds.lower[j] == bounds.upper[j]) continue;
      const bool at_lo = p[j] <= bounds.lower[j] && g[j] > 0.0;
      const bool at_hi = p[j] >= bounds.upper[j] && g[j] < 0.0;
      if (!at_lo && !at_hi) free.push_back(j);
    }
    if (free.empty()) {
      converged = true;
      message = "all parameters pinned on bounds";
      break;
    }
    const auto nf = static_cast<Eigen::Index>(free.size());
    Matrix Af(nf, nf);
    Vector gf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      gf[a] = g[free[a]];
      for (Eigen::Index c = 0; c < nf; ++c) Af(a, c) = A(free[a], free[c]);
    }
    const double dmax = Af.diagonal().cwiseAbs().maxCoeff();
    if (gf.cwiseAbs().maxCoeff() == 0.0) {
      converged = true;
      message = "zero gradient";
      break;
    }

    // Convergence is judged on the undamped Gauss-Newton step so that a
    // large damping factor cannot masquerade as a stationary point.
    {
      Matrix M = Af;
      for (Eigen::Index a = 0; a < nf; ++a) M(a, a) += 1e-14 * std::max(dmax, 1e-300);
      const Vector gn = M.ldlt().solve(-gf);
      if (gn.allFinite()) {
        Vector pn = p;
        for (Eigen::Index a = 0; a < nf; ++a) pn[free[a]] += gn[a];
        const double dx_gn = (bounds.project(pn) - p).norm();
        const double predicted = -0.5 * gf.dot(gn);
        if (dx_gn <= opt.tol.x_rel * (p.norm() + opt.tol.x_rel)) {
          converged = true;
          message = "parameter step below tolerance";
          break;
        }
        if (predicted <= opt.tol.f_abs * cost) {
          converged = true;
          message = "predicted decrease below tolerance";
          break;
        }
      }
    }

    bool accepted = false;
    while (lambda < 1e20) {
      Matrix M = Af;
      for (Eigen::Index a = 0; a < nf; ++a)
        M(a, a) += lambda * std::max(Af(a, a), 1e-12 * std::max(dmax, 1e-300));
      const Vector step = M.ldlt().solve(-gf);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      Vector trial = p;
      for (Eigen::Index a = 0; a < nf; ++a) trial[free[a]] += step[a];
      trial = bounds.project(trial);
      const Vector r_trial = residuals(trial);
      const double cost_trial = r_trial.allFinite() ? 0.5 * r_trial.squaredNorm()
                                                    : std::numeric_limits<double>::infinity();
      if (cost_trial < cost) {
        p = trial;
        r = r_trial;
        cost = cost_trial;
        if (opt.on_accept) opt.on_accept(p);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted && !converged) {
      // Damping exhausted without a decrease: numerically at a minimum.
      converged = true;
      message = "no further decrease possible";
    }
  }

  FitResult res;
  res.params = p;
  res.objective = cost;
  res.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(m));
  res.iterations = iter;
  res.converged = converged;
  res.message = message;

  const Matrix J = numeric_jacobian(residuals, p, r, bounds, opt.fd_step);
  const Matrix A = J.transpose() * J;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  const Vector ev = eig.eigenvalues();
  const double ev_max = ev.cwiseAbs().maxCoeff();
  const double ev_min = ev.cwiseAbs().minCoeff();
  res.normal_condition = ev_min > 0.0 ? ev_max / ev_min : std::numeric_limits<double>::infinity();
  if (converged && m > n) {
    const double s2 = r.squaredNorm() / static_cast<double>(m - n);
    Vector inv = Vector::Zero(n);
    const double cutoff = ev_max * 1e-14;
    for (Eigen::Index i = 0; i < n; ++i)
      if (ev[i] > cutoff) inv[i] = 1.0 / ev[i];
    Matrix cov = s2 * eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    res.covariance = 0.5 * (cov + cov.transpose());
  }
  return res;
}

}  // namespace jpq
