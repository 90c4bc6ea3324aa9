#pragma once

// Large-deviations profile ODEs: the minus-root curve phi, its critical
// constant Theta (terminal-value and bisection routes), and the convex
// plus-root extension Phi.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fkpp/fit.hpp"
#include "fkpp/model.hpp"
#include "fkpp/ode.hpp"

namespace fkpp {

enum class BranchLabel { MinusRoot, PlusRoot };

struct ProfileCurve {
  std::vector<double> y;
  std::vector<double> value;
  std::vector<double> derivative;
  std::vector<BranchLabel> branch;
  double theta = std::numeric_limits<double>::quiet_NaN();
};

enum class ThetaMethod { Terminal, Bisection };

struct ThetaResult {
  double theta = 0.0;
  double theta_r = 0.0;  // Theta / A^gamma
  ThetaMethod method = ThetaMethod::Terminal;
  double residual = std::numeric_limits<double>::quiet_NaN();  // cross-method
  double ybar = 0.0;
};

namespace detail {

// Endpoint series near y = 0:
//   phi(y) = theta - (2 sqrt(A)/(3-r)) y^{(3-r)/2}
//          + (beta theta / (sqrt(A)(r+1))) y^{(r+1)/2} + h.o.t.
// The second term follows from expanding the square root in the ODE; the
// candidate y^2 contributions cancel identically.
inline double endpoint_c1(const ModelParams& p) {
  return 2.0 * std::sqrt(p.A) / (3.0 - p.r);
}
inline double endpoint_c2(const ModelParams& p, double theta) {
  return p.beta * theta / (std::sqrt(p.A) * (p.r + 1.0));
}
inline double endpoint_series(const ModelParams& p, double theta, double y) {
  return theta - endpoint_c1(p) * std::pow(y, 0.5 * (3.0 - p.r)) +
         endpoint_c2(p, theta) * std::pow(y, 0.5 * (p.r + 1.0));
}
inline double endpoint_series_deriv(const ModelParams& p, double theta, double y) {
  return -std::sqrt(p.A) * std::pow(y, 0.5 * (1.0 - p.r)) +
         0.5 * (p.r + 1.0) * endpoint_c2(p, theta) * std::pow(y, 0.5 * (p.r - 1.0));
}

// Tangency series at y_bar: Gamma - phi ~ m^2 (y_bar - y)^2 with
// 2 m^2 + sign * sqrt(beta) m - c = 0, c = Gamma''(y_bar) - gamma/2,
// sign = +1 on the minus-root side (y < y_bar), -1 on the plus-root side.
inline double tangency_c(const ModelParams& p) {
  double c = gamma_curve_second(p.y_bar, p) - 0.5 * p.gamma;
  if (!(c > 0.0))
    throw std::runtime_error("profile: invalid tangency (Gamma'' - gamma/2 <= 0)");
  return c;
}
inline double tangency_m(const ModelParams& p, int root_sign) {
  double c = tangency_c(p);
  double sb = std::sqrt(p.beta);
  // positive root of 2 m^2 + root_sign*sqrt(beta) m - c = 0
  return (-double(root_sign) * sb + std::sqrt(sb * sb + 8.0 * c)) / 4.0;
}

struct PhiRhs {
  const ModelParams& p;
  int root_sign;  // -1: minus root, +1: plus root
  bool operator()(double y, const std::array<double, 1>& v,
                  std::array<double, 1>& d) const {
    if (!(y > 0.0)) return false;
    double G = gamma_curve(y, p);
    double rad = p.beta * (G - v[0]);
    if (rad < 0.0) {
      if (rad < -1e-13 * p.beta * (1.0 + std::abs(G))) return false;
      rad = 0.0;
    }
    d[0] = 0.5 * p.gamma * y + double(root_sign) * std::sqrt(rad);
    return std::isfinite(d[0]);
  }
};

inline double default_delta0(const ModelParams& p) {
  return std::min(1e-5, p.y_bar / 100.0);
}

inline void require_theta_range(const ModelParams& p, const char* who) {
  if (!(p.r > 1.0 && p.r < 3.0))
    throw std::invalid_argument(std::string(who) + ": requires 1 < r < 3");
}

}  // namespace detail

// Terminal-value route: integrate backward from the tangency at y_bar and
// extrapolate phi to y = 0.
inline std::pair<ProfileCurve, ThetaResult> solve_phi_terminal(
    const ModelParams& p, double y_floor = 1e-5, double tol = 1e-12) {
  detail::require_theta_range(p, "solve_phi_terminal");
  if (!(y_floor > 0.0 && y_floor < p.y_bar / 50.0))
    throw std::invalid_argument("solve_phi_terminal: require 0 < y_floor << y_bar");

  const double ybar = p.y_bar;
  const double dt = 1e-4 * ybar;
  const double m = detail::tangency_m(p, -1);
  const double ys = ybar - dt;
  std::array<double, 1> v{gamma_curve(ys, p) - m * m * dt * dt};

  std::vector<double> yy, vv, dd;
  detail::PhiRhs rhs{p, -1};
  yy.push_back(ybar);
  vv.push_back(gamma_curve(ybar, p));
  dd.push_back(0.5 * p.gamma * ybar);
  auto record = [&](double y, const std::array<double, 1>& s) {
    std::array<double, 1> d;
    rhs(y, s, d);
    yy.push_back(y);
    vv.push_back(s[0]);
    dd.push_back(d[0]);
    return true;
  };
  record(ys, v);

  OdeOptions opt;
  opt.abs_tol = opt.rel_tol = tol;
  opt.first_step = dt / 8.0;
  double x = ys;
  auto st = integrate_dp45<1>(rhs, v, x, y_floor, opt,
                              [](double y) { return std::max(std::abs(y) / 5.0, 1e-9); },
                              record);
  if (st != OdeStatus::ReachedEnd)
    throw std::runtime_error("solve_phi_terminal: branch violation (Gamma - phi < 0)");

  // Extrapolate Theta over the last decade before y_floor: fit
  // phi + c1 y^{(3-r)/2} against y^{(r+1)/2}; the intercept is Theta.
  const double c1 = detail::endpoint_c1(p);
  std::vector<double> xs, gs;
  for (std::size_t i = 0; i < yy.size(); ++i) {
    if (yy[i] > 10.0 * y_floor) continue;
    xs.push_back(std::pow(yy[i], 0.5 * (p.r + 1.0)));
    gs.push_back(vv[i] + c1 * std::pow(yy[i], 0.5 * (3.0 - p.r)));
  }
  FitResult ft = linfit(xs, gs, 0.0, std::numeric_limits<double>::infinity());

  ThetaResult tr;
  tr.theta = ft.intercept;
  tr.theta_r = tr.theta / std::pow(p.A, p.gamma);
  tr.method = ThetaMethod::Terminal;
  tr.ybar = ybar;

  ProfileCurve curve;
  curve.theta = tr.theta;
  // samples were generated in decreasing y; store ascending
  for (std::size_t i = yy.size(); i-- > 0;) {
    curve.y.push_back(yy[i]);
    curve.value.push_back(vv[i]);
    curve.derivative.push_back(dd[i]);
    curve.branch.push_back(BranchLabel::MinusRoot);
  }
  return {curve, tr};
}

enum class PhiIvpStatus { Completed, Touched, Crossed };

struct PhiIvpResult {
  PhiIvpStatus status = PhiIvpStatus::Completed;
  double y_event = std::numeric_limits<double>::quiet_NaN();  // touch/cross location
  double min_margin = std::numeric_limits<double>::infinity();  // min of Gamma - phi
  ProfileCurve curve;
};

// Forward initial-value route from the endpoint series at theta.
inline PhiIvpResult solve_phi_ivp(double theta, const ModelParams& p,
                                  double y_max, double tol = 1e-12,
                                  bool keep_curve = true) {
  detail::require_theta_range(p, "solve_phi_ivp");
  if (!(y_max >= p.y_bar))
    throw std::invalid_argument("solve_phi_ivp: y_max must be >= y_bar");

  const double d0 = detail::default_delta0(p);
  std::array<double, 1> v{detail::endpoint_series(p, theta, d0)};
  double x = d0;

  PhiIvpResult res;
  res.curve.theta = theta;
  detail::PhiRhs rhs{p, -1};
  const double touch_tol = 1e-8 * gamma_curve(p.y_bar, p);

  auto record = [&](double y, const std::array<double, 1>& s) {
    double margin = gamma_curve(y, p) - s[0];
    if (margin < res.min_margin) {
      res.min_margin = margin;
      res.y_event = y;
    }
    if (keep_curve) {
      std::array<double, 1> d;
      rhs(y, s, d);
      res.curve.y.push_back(y);
      res.curve.value.push_back(s[0]);
      res.curve.derivative.push_back(d[0]);
      res.curve.branch.push_back(BranchLabel::MinusRoot);
    }
    return std::isfinite(s[0]);
  };
  record(x, v);

  OdeOptions opt;
  opt.abs_tol = opt.rel_tol = tol;
  opt.first_step = d0 / 8.0;
  auto st = integrate_dp45<1>(
      rhs, v, x, y_max, opt,
      [&](double y) { return std::max(std::min(std::abs(y) / 5.0, 0.05 * p.y_bar), 1e-10); },
      record);

  if (st == OdeStatus::FailedStep) {
    res.status = PhiIvpStatus::Crossed;
    res.y_event = x;
  } else if (st == OdeStatus::StoppedByObserver || !std::isfinite(v[0])) {
    throw std::runtime_error("solve_phi_ivp: non-finite state");
  } else {
    res.status = (res.min_margin <= touch_tol) ? PhiIvpStatus::Touched
                                               : PhiIvpStatus::Completed;
  }
  return res;
}

// Bisection route for Theta: the predicate is "phi_theta crosses Gamma".
inline ThetaResult compute_theta_bisection(const ModelParams& p,
                                           double tol = 1e-10,
                                           double ivp_tol = 1e-12) {
  detail::require_theta_range(p, "compute_theta_bisection");
  if (!(tol >= 1e-12))
    throw std::invalid_argument("compute_theta_bisection: tol too small");
  const double y_max = 3.0 * p.y_bar;

  auto crosses = [&](double theta) {
    return solve_phi_ivp(theta, p, y_max, ivp_tol, /*keep_curve=*/false).status ==
           PhiIvpStatus::Crossed;
  };

  double lo = 0.0;  // theta = 0 always yields a global solution
  double hi = 1.0;
  int grow = 0;
  while (!crosses(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 60)
      throw std::runtime_error("compute_theta_bisection: no crossing found");
  }
  while (hi - lo > tol * (1.0 + hi)) {
    double mid = 0.5 * (lo + hi);
    (crosses(mid) ? hi : lo) = mid;
  }
  ThetaResult tr;
  tr.theta = 0.5 * (lo + hi);
  tr.theta_r = tr.theta / std::pow(p.A, p.gamma);
  tr.method = ThetaMethod::Bisection;
  tr.ybar = p.y_bar;
  return tr;
}

// Plus-root continuation of the critical curve beyond the tangency point.
// Returns the global curve: the input minus-root samples up to y_bar, the
// tangency point, then the plus-root branch to y_max.
inline ProfileCurve extend_Phi(const ModelParams& p,
                               const ProfileCurve& critical_curve,
                               double y_max, double tol = 1e-12) {
  detail::require_theta_range(p, "extend_Phi");
  if (!(y_max > p.y_bar))
    throw std::invalid_argument("extend_Phi: y_max must exceed y_bar");

  ProfileCurve out;
  out.theta = critical_curve.theta;
  for (std::size_t i = 0; i < critical_curve.y.size(); ++i) {
    if (critical_curve.y[i] >= p.y_bar) continue;
    out.y.push_back(critical_curve.y[i]);
    out.value.push_back(critical_curve.value[i]);
    out.derivative.push_back(critical_curve.derivative[i]);
    out.branch.push_back(BranchLabel::MinusRoot);
  }
  out.y.push_back(p.y_bar);
  out.value.push_back(gamma_curve(p.y_bar, p));
  out.derivative.push_back(0.5 * p.gamma * p.y_bar);
  out.branch.push_back(BranchLabel::PlusRoot);

  const double dt = 1e-4 * p.y_bar;
  const double m = detail::tangency_m(p, +1);
  const double ys = p.y_bar + dt;
  std::array<double, 1> v{gamma_curve(ys, p) - m * m * dt * dt};
  double x = ys;

  detail::PhiRhs rhs{p, +1};
  auto record = [&](double y, const std::array<double, 1>& s) {
    std::array<double, 1> d;
    rhs(y, s, d);
    out.y.push_back(y);
    out.value.push_back(s[0]);
    out.derivative.push_back(d[0]);
    out.branch.push_back(BranchLabel::PlusRoot);
    return true;
  };
  record(x, v);

  OdeOptions opt;
  opt.abs_tol = opt.rel_tol = tol;
  opt.first_step = dt / 8.0;
  auto st = integrate_dp45<1>(rhs, v, x, y_max, opt,
                              [&](double) { return 0.02 * p.y_bar; }, record);
  if (st != OdeStatus::ReachedEnd)
    throw std::runtime_error("extend_Phi: branch violation (Gamma - Phi < 0)");
  return out;
}

struct SweepRow {
  double r = 0.0, A = 0.0;
  double theta = std::numeric_limits<double>::quiet_NaN();
  double theta_r = std::numeric_limits<double>::quiet_NaN();
  double ybar = std::numeric_limits<double>::quiet_NaN();
  double method_residual = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string error;
};

// Run both Theta routes on each r of the grid and cross-check.
inline std::vector<SweepRow> theta_sweep(const std::vector<double>& r_grid,
                                         double A, double tol = 1e-10) {
  std::vector<SweepRow> rows;
  for (double r : r_grid) {
    SweepRow row;
    row.r = r;
    row.A = A;
    try {
      if (!(r > 1.0 && r < 3.0))
        throw std::invalid_argument("theta_sweep: grid point outside (1, 3)");
      ModelParams p = make_params(r, A);
      auto [curve, term] = solve_phi_terminal(p);
      ThetaResult bis = compute_theta_bisection(p, tol);
      row.theta = term.theta;
      row.theta_r = term.theta_r;
      row.ybar = p.y_bar;
      row.method_residual = std::abs(term.theta - bis.theta);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.r < b.r || (a.r == b.r && a.A < b.A);
  });
  return rows;
}

}  // namespace fkpp
