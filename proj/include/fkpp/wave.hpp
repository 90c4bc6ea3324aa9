#pragma once

// Minimal-speed (c = 2) traveling wave: shooting along the unstable
// manifold of U = 1, coordinate switch to the log-compensated tail
// variable, and extraction of the tail law.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fkpp/fit.hpp"
#include "fkpp/model.hpp"
#include "fkpp/ode.hpp"

namespace fkpp {

struct WaveMeta {
  double tol = 0.0;
  double eps_manifold = 0.0;
  double switch_xi = std::numeric_limits<double>::quiet_NaN();
};

// Sampled profile.  U and Q carry NaN where the value is not representable
// in double precision (deep tail); W = log(e^xi U) and its derivative are
// always kept, since all tail statistics live there.
struct WaveProfile {
  std::vector<double> xi;
  std::vector<double> U;
  std::vector<double> Q;   // nu e^xi U
  std::vector<double> W;   // log(e^xi U)
  std::vector<double> dW;  // dW/dxi, used for Hermite interpolation
  double log_nu = 0.0;
  WaveMeta meta;

  // Cubic Hermite interpolation of W at x (x within sampled range).
  double interp_W(double x) const {
    if (xi.empty() || x < xi.front() || x > xi.back())
      throw std::invalid_argument("interp_W: abscissa outside profile");
    std::size_t hi = 1;
    while (hi + 1 < xi.size() && xi[hi] < x) ++hi;
    std::size_t lo = hi - 1;
    double h = xi[hi] - xi[lo];
    if (h <= 0) return W[lo];
    double t = (x - xi[lo]) / h;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    double h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t);
    double h11 = t * t * (t - 1);
    return h00 * W[lo] + h10 * h * dW[lo] + h01 * W[hi] + h11 * h * dW[hi];
  }
};

enum class TailRegime { Supercritical, Critical, Subcritical };  // r>3, r=3, r in (1,3)

struct TailFit {
  TailRegime regime;
  double statistic;  // kappa for r >= 3, slope of W vs xi^{(3-r)/2} for r < 3
  double window_lo, window_hi;
  double flatness;  // max relative variation of the compensated quantity
};

namespace detail {

// Internal tail variable: omega = log(e^xi U / nu) = W - log(nu), which
// satisfies omega'' + (omega')^2 = A (xi - omega)^{1-r} with
// xi - omega = log(nu/U) > 0.
struct TailRhs {
  double A, r;
  bool operator()(double x, const std::array<double, 2>& v,
                  std::array<double, 2>& d) const {
    double gap = x - v[0];
    if (!(gap > 0.0)) return false;
    d[0] = v[1];
    d[1] = A * std::pow(gap, 1.0 - r) - v[1] * v[1];
    return std::isfinite(d[1]);
  }
};

inline double tail_max_step(double x) {
  return (x < 100.0) ? 0.5 : 0.04 * x;
}

}  // namespace detail

// Integrate the tail equation only, from (W, W') = (w0, w1) at xi0 to xi1.
inline WaveProfile integrate_tail_Q(const ModelParams& p, double w0, double w1,
                                    double xi0, double xi1,
                                    double tol = 1e-10) {
  if (!(w1 >= 0.0))
    throw std::invalid_argument("integrate_tail_Q: require W' >= 0 at the left end");
  const double lnu = p.log_nu;
  if (!(xi0 - (w0 - lnu) > 0.0))
    throw std::invalid_argument("integrate_tail_Q: log(nu/U) <= 0 at the left end");
  WaveProfile prof;
  prof.log_nu = lnu;
  prof.meta.tol = tol;

  std::array<double, 2> v{w0 - lnu, w1};
  double x = xi0;
  auto push = [&](double xx, const std::array<double, 2>& vv) {
    prof.xi.push_back(xx);
    double W = vv[0] + lnu;
    prof.W.push_back(W);
    prof.dW.push_back(vv[1]);
    double U = std::exp(W - xx);
    prof.U.push_back(U > 0.0 ? U : std::numeric_limits<double>::quiet_NaN());
    double Q = (W + lnu < 700.0) ? std::exp(W + lnu)
                                 : std::numeric_limits<double>::quiet_NaN();
    prof.Q.push_back(Q);
    return true;
  };
  push(x, v);
  OdeOptions opt;
  opt.abs_tol = opt.rel_tol = tol;
  opt.first_step = 1e-3;
  auto st = integrate_dp45<2>(detail::TailRhs{p.A, p.r}, v, x, xi1, opt,
                              detail::tail_max_step,
                              [&](double xx, const auto& vv) { return push(xx, vv); });
  if (st == OdeStatus::FailedStep)
    throw std::runtime_error("integrate_tail_Q: invalid state (xi - log Q <= 0 or non-finite)");
  return prof;
}

// Shoot the traveling wave from the unstable manifold of U = 1, fix the
// translation so that U(0) = 1/2, and continue in tail coordinates to xi_end.
inline WaveProfile shoot_wave(const ModelParams& p, double xi_end,
                              double tol = 1e-10) {
  if (!(tol > 1e-14 && tol < 1e-4))
    throw std::invalid_argument("shoot_wave: tol must lie in (1e-14, 1e-4)");
  const double eps_man = 1e-8;
  const double switch_U = 1e-12;
  const double fp1 = reaction_deriv_at_one(p);
  const double mu = -1.0 + std::sqrt(1.0 - fp1);  // unstable eigenvalue at U = 1
  const double lnu = p.log_nu;

  // Phase 1: (U, U') in the wave ODE U'' + 2U' + f(U) = 0.
  std::vector<double> xs, us, ups;
  std::array<double, 2> v{1.0 - eps_man, -eps_man * mu};
  double x = 0.0;
  xs.push_back(x); us.push_back(v[0]); ups.push_back(v[1]);

  ReactionEvalPolicy pol;
  auto rhs_u = [&](double, const std::array<double, 2>& s,
                   std::array<double, 2>& d) {
    if (!(s[0] > 0.0) || s[0] >= 1.0) return false;
    d[0] = s[1];
    d[1] = -2.0 * s[1] - reaction(s[0], p, pol);
    return true;
  };
  const double span_guard = 60.0 / mu + std::abs(xi_end) + 200.0;
  OdeOptions opt;
  opt.abs_tol = opt.rel_tol = tol;
  opt.first_step = 1e-3;
  auto st = integrate_dp45<2>(
      rhs_u, v, x, span_guard, opt, [](double) { return 0.25; },
      [&](double xx, const std::array<double, 2>& s) {
        xs.push_back(xx); us.push_back(s[0]); ups.push_back(s[1]);
        return s[0] >= switch_U;
      });
  if (st == OdeStatus::FailedStep || !std::isfinite(v[0]))
    throw std::runtime_error("shoot_wave: integration aborted with non-finite or invalid state");
  if (st == OdeStatus::ReachedEnd && v[0] >= switch_U && v[0] > 0.5)
    throw std::runtime_error("shoot_wave: failed to enter the monotone descent regime");

  // Translation fixing: locate U = 1/2 on the cubic Hermite interpolant.
  double s_half = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (us[i] >= 0.5 && us[i + 1] < 0.5) {
      double a = xs[i], b = xs[i + 1], h = b - a;
      auto eval = [&](double t) {
        double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
        double h10 = t * (1 - t) * (1 - t);
        double h01 = t * t * (3 - 2 * t);
        double h11 = t * t * (t - 1);
        return h00 * us[i] + h10 * h * ups[i] + h01 * us[i + 1] +
               h11 * h * ups[i + 1] - 0.5;
      };
      double t0 = 0.0, t1 = 1.0;
      for (int it = 0; it < 80; ++it) {
        double tm = 0.5 * (t0 + t1);
        (eval(tm) >= 0.0 ? t0 : t1) = tm;
      }
      s_half = a + 0.5 * (t0 + t1) * h;
      break;
    }
  }
  if (!std::isfinite(s_half))
    throw std::runtime_error("shoot_wave: wave never crossed U = 1/2");

  const double raw_end = xi_end + s_half;

  WaveProfile prof;
  prof.log_nu = lnu;
  prof.meta.tol = tol;
  prof.meta.eps_manifold = eps_man;

  auto push_u = [&](double xx, double U, double Up) {
    double xi = xx - s_half;
    if (xi > xi_end) return;
    prof.xi.push_back(xi);
    prof.U.push_back(U);
    double lq = lnu + xi + std::log(U);
    prof.Q.push_back(lq < 700.0 ? std::exp(lq)
                                : std::numeric_limits<double>::quiet_NaN());
    prof.W.push_back(xi + std::log(U));
    prof.dW.push_back(1.0 + Up / U);
  };
  for (std::size_t i = 0; i < xs.size(); ++i) {
    push_u(xs[i], us[i], ups[i]);
    // insert the exact normalization point U(0) = 1/2
    if (i + 1 < xs.size() && xs[i] < s_half && xs[i + 1] >= s_half) {
      prof.xi.push_back(0.0);
      prof.U.push_back(0.5);
      prof.Q.push_back(lnu + std::log(0.5) < 700.0
                           ? 0.5 * std::exp(lnu)
                           : std::numeric_limits<double>::quiet_NaN());
      prof.W.push_back(std::log(0.5));
      // derivative from the ODE's slow manifold is not available exactly;
      // interpolate U' linearly between the bracketing samples
      double t = (s_half - xs[i]) / (xs[i + 1] - xs[i]);
      double up = (1 - t) * ups[i] + t * ups[i + 1];
      prof.dW.push_back(1.0 + up / 0.5);
    }
  }

  if (x - s_half >= xi_end) {
    prof.meta.switch_xi = std::numeric_limits<double>::quiet_NaN();
    return prof;
  }

  // Phase 2: tail coordinates (omega, omega') from the switch point.
  prof.meta.switch_xi = x - s_half;
  std::array<double, 2> w{(x - s_half) + std::log(v[0]) - lnu,
                          1.0 + v[1] / v[0]};
  double xt = x - s_half;
  auto push_w = [&](double xx, const std::array<double, 2>& vv) {
    prof.xi.push_back(xx);
    double W = vv[0] + lnu;
    prof.W.push_back(W);
    prof.dW.push_back(vv[1]);
    double U = std::exp(W - xx);
    prof.U.push_back(U > 0.0 ? U : std::numeric_limits<double>::quiet_NaN());
    prof.Q.push_back((W + lnu < 700.0) ? std::exp(W + lnu)
                                       : std::numeric_limits<double>::quiet_NaN());
    return true;
  };
  auto st2 = integrate_dp45<2>(detail::TailRhs{p.A, p.r}, w, xt, xi_end, opt,
                               detail::tail_max_step, push_w);
  if (st2 == OdeStatus::FailedStep)
    throw std::runtime_error("shoot_wave: tail integration failed");
  return prof;
}

// Compensated tail statistic per regime.
inline TailFit extract_tail_law(const WaveProfile& prof, const ModelParams& p,
                                std::optional<double> win_lo = std::nullopt,
                                std::optional<double> win_hi = std::nullopt) {
  if (prof.xi.empty()) throw std::invalid_argument("extract_tail_law: empty profile");
  const double xmax = prof.xi.back();
  TailFit fit;
  if (p.r > 3.0 || p.r == 3.0) {
    fit.regime = (p.r > 3.0) ? TailRegime::Supercritical : TailRegime::Critical;
    const double a = (p.r > 3.0) ? 1.0 : p.alpha;
    double lo = win_lo.value_or(xmax * 5.0 / 7.0);
    double hi = win_hi.value_or(xmax);
    fit.window_lo = lo;
    fit.window_hi = hi;
    // evaluate the compensated ratio U/(xi^a e^{-xi}) = exp(W - a log xi)
    // on a fixed grid so the statistic does not move with the step sequence
    const int m = 101;
    double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0, csum = 0.0;
    for (int i = 0; i < m; ++i) {
      double xi = lo + (hi - lo) * i / (m - 1);
      double c = std::exp(prof.interp_W(xi) - a * std::log(xi));
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
      csum += c;
    }
    fit.statistic = csum / m;
    fit.flatness = cmax / cmin - 1.0;
  } else {
    fit.regime = TailRegime::Subcritical;
    double lo = win_lo.value_or(std::max(prof.xi.front(), xmax / 100.0));
    double hi = win_hi.value_or(xmax);
    fit.window_lo = lo;
    fit.window_hi = hi;
    const double e = 0.5 * (3.0 - p.r);
    std::vector<double> xs, ys;
    double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
    for (std::size_t i = 0; i < prof.xi.size(); ++i) {
      if (prof.xi[i] < lo || prof.xi[i] > hi) continue;
      double s = std::pow(prof.xi[i], e);
      xs.push_back(s);
      ys.push_back(prof.W[i]);
      double c = prof.W[i] / s;
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, std::abs(c));
    }
    FitResult lf = linfit(xs, ys, -std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity());
    fit.statistic = lf.slope;
    fit.flatness = (cmin > 0.0) ? (cmax / cmin - 1.0)
                                : std::numeric_limits<double>::infinity();
  }
  if (!(fit.statistic > 0.0))
    throw std::runtime_error("extract_tail_law: non-positive statistic");
  if (fit.flatness > 0.25)
    throw std::runtime_error("extract_tail_law: asymptotic regime not reached (flatness > 25%)");
  return fit;
}

}  // namespace fkpp
