#pragma once

// Cauchy problem on a re-centered lab-frame window: explicit two-stage
// stepping, level-set front tracking, delay-law fits, and the heat-kernel
// sandwich check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fkpp/fit.hpp"
#include "fkpp/model.hpp"

namespace fkpp {

struct FieldState {
  double window_left = 0.0;  // physical coordinate of the left window edge
  double dx = 0.0;
  double t = 0.0;
  long shift_count = 0;  // cumulative re-centering offset in cells
  std::vector<double> values;
  double max_overshoot = 0.0;  // largest pre-clamp excursion outside [0,1]

  double cell_center(std::size_t i) const {
    return window_left + (double(i) + 0.5) * dx;
  }
};

struct FrontTrace {
  double lambda = 0.5;
  std::vector<double> times;
  std::vector<double> positions;  // X_lambda(t)
  std::vector<double> delays;     // 2t - X_lambda(t)
};

struct DelayFit {
  bool log_model = false;  // a ln t + b if true, Theta t^beta + b otherwise
  double coefficient = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
};

inline FieldState init_field(
    const ModelParams&, double x_lo, double x_hi, double dx,
    const std::function<double(double)>& datum = nullptr) {
  if (!(x_lo < 0.0 && 0.0 < x_hi) || !(dx > 0.0))
    throw std::invalid_argument("init_field: window must straddle 0 and dx > 0");
  FieldState f;
  f.window_left = x_lo;
  f.dx = dx;
  f.values.resize(std::size_t(std::llround((x_hi - x_lo) / dx)));
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double x = f.cell_center(i);
    double u = datum ? datum(x) : (x < 0.0 ? 1.0 : 0.0);
    if (!(u >= 0.0 && u <= 1.0))
      throw std::invalid_argument("init_field: datum outside [0,1]");
    if (x >= 0.0 && u > 0.0)
      throw std::invalid_argument("init_field: datum must vanish for x >= 0");
    f.values[i] = u;
  }
  return f;
}

// One explicit step (Heun / two-stage RK) with second-order central
// differences, Dirichlet u = 1 on the left ghost and u = 0 on the right.
template <class Reaction>
void step_with(FieldState& f, double dt, Reaction&& reac,
               std::vector<double>& stage) {
  const std::size_t n = f.values.size();
  const double idx2 = 1.0 / (f.dx * f.dx);
  stage.resize(n);
  auto rhs_at = [&](const std::vector<double>& u, std::size_t i) {
    double ul = (i == 0) ? 1.0 : u[i - 1];
    double ur = (i + 1 == n) ? 0.0 : u[i + 1];
    return (ul - 2.0 * u[i] + ur) * idx2 + reac(u[i]);
  };
  for (std::size_t i = 0; i < n; ++i)
    stage[i] = f.values[i] + dt * rhs_at(f.values, i);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.5 * (f.values[i] + stage[i] + dt * rhs_at(stage, i));
    if (!std::isfinite(v))
      throw std::runtime_error("step: non-finite state");
    double over = std::max(v - 1.0, -v);
    if (over > f.max_overshoot) f.max_overshoot = over;
    f.values[i] = std::clamp(v, 0.0, 1.0);
  }
  f.t += dt;
}

inline void step(FieldState& f, double dt, const ModelParams& p,
                 const ReactionEvalPolicy& pol = {}) {
  if (!(dt <= 0.4 * f.dx * f.dx * (1.0 + 1e-12)))
    throw std::invalid_argument("step: dt exceeds the 0.4 dx^2 stability bound");
  std::vector<double> stage;
  step_with(f, dt, [&](double u) { return reaction(u, p, pol); }, stage);
}

// Rightmost crossing of the level lambda, linear interpolation between
// cell centers.
inline double front_position(const FieldState& f, double lambda) {
  const auto& u = f.values;
  if (u.size() < 2) throw std::invalid_argument("front_position: degenerate field");
  for (std::size_t i = u.size() - 1; i-- > 0;) {
    if (u[i] >= lambda && u[i + 1] < lambda) {
      double x0 = f.cell_center(i);
      if (u[i] == u[i + 1]) return x0;
      return x0 + f.dx * (u[i] - lambda) / (u[i] - u[i + 1]);
    }
  }
  throw std::runtime_error("front_position: level never attained");
}

struct WindowPolicy {
  double x_lo = -60.0;
  double width = 240.0;
  double recenter_frac = 2.0 / 3.0;  // re-center once the front passes this
};

namespace detail {

// Re-center the window: drop k cells on the left (asserted to be at the
// invaded state), append k zeros on the right.
inline void recenter(FieldState& f, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) {
    if (std::abs(f.values[i] - 1.0) > 1e-8)
      throw std::runtime_error("recenter: dropping cells not settled at u = 1");
  }
  f.values.erase(f.values.begin(), f.values.begin() + long(k));
  f.values.insert(f.values.end(), k, 0.0);
  f.window_left += double(k) * f.dx;
  f.shift_count += long(k);
}

template <class Reaction>
FrontTrace run_front_impl(Reaction&& reac, double t_end, double lambda,
                          double dx, const WindowPolicy& wp) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("run_front: lambda must lie in (0,1)");
  if (!(t_end >= 1.0)) throw std::invalid_argument("run_front: t_end must be >= 1");
  if (!(dx > 0.0)) throw std::invalid_argument("run_front: dx must be positive");

  FieldState f;
  f.window_left = wp.x_lo;
  f.dx = dx;
  f.values.resize(std::size_t(std::llround(wp.width / dx)));
  for (std::size_t i = 0; i < f.values.size(); ++i)
    f.values[i] = (f.cell_center(i) < 0.0) ? 1.0 : 0.0;

  const double dt = 0.4 * dx * dx;
  const std::size_t n = f.values.size();
  std::vector<double> stage;
  FrontTrace trace;
  trace.lambda = lambda;

  double next_sample = 1.0;
  const double ratio = 1.05;
  // window management runs on its own cadence: the front moves at speed
  // ~2, so checking every few time units keeps it far from the edges
  double next_manage = 1.0;
  const double manage_every = 2.0;
  while (f.t < t_end - 0.5 * dt) {
    step_with(f, std::min(dt, t_end - f.t), reac, stage);
    bool sample = f.t + 1e-12 >= next_sample || f.t >= t_end - 0.5 * dt;
    bool manage = f.t + 1e-12 >= next_manage;
    if (!sample && !manage) continue;
    double X = front_position(f, lambda);
    if (sample) {
      trace.times.push_back(f.t);
      trace.positions.push_back(X);
      trace.delays.push_back(2.0 * f.t - X);
      while (next_sample <= f.t + 1e-12) next_sample *= ratio;
    }
    if (manage) next_manage = f.t + manage_every;
    double right_edge = f.window_left + wp.width;
    if (right_edge - X < wp.width / 4.0)
      throw std::runtime_error("run_front: front reached the window edge");
    if (X - f.window_left > wp.recenter_frac * wp.width) {
      auto k = std::size_t(std::llround((X - f.window_left - wp.width / 2.0) / dx));
      if (k > 0 && k < n) recenter(f, k);
    }
  }
  return trace;
}

}  // namespace detail

inline FrontTrace run_front(const ModelParams& p, double t_end, double lambda,
                            double dx, const WindowPolicy& wp = {},
                            const ReactionEvalPolicy& pol = {}) {
  return detail::run_front_impl(
      [&](double u) { return reaction(u, p, pol); }, t_end, lambda, dx, wp);
}

// Same machinery with the classical reaction u(1-u); harness oracle.
inline FrontTrace run_front_classical(double t_end, double lambda, double dx,
                                      const WindowPolicy& wp = {}) {
  return detail::run_front_impl([](double u) { return u * (1.0 - u); }, t_end,
                                lambda, dx, wp);
}

// Fit the delay law on the last decade of the trace: a ln t + b for r >= 3,
// Theta t^beta + b for r in (1,3).
inline DelayFit fit_delay(const FrontTrace& trace, const ModelParams& p) {
  if (trace.times.empty()) throw std::invalid_argument("fit_delay: empty trace");
  const double t_hi = trace.times.back();
  const double t_lo = t_hi / 10.0;
  if (!(t_lo >= 50.0))
    throw std::invalid_argument("fit_delay: trace must cover a decade past t = 50");
  DelayFit df;
  df.window_lo = t_lo;
  df.window_hi = t_hi;
  if (p.r >= 3.0) {
    df.log_model = true;
    std::vector<double> lnt(trace.times.size());
    for (std::size_t i = 0; i < lnt.size(); ++i) lnt[i] = std::log(trace.times[i]);
    FitResult fr = linfit(lnt, trace.delays, std::log(t_lo), std::log(t_hi));
    df.coefficient = fr.slope;
    df.intercept = fr.intercept;
    df.rms = fr.rms;
  } else {
    df.log_model = false;
    FitResult fr = powfit(trace.times, trace.delays, p.beta, t_lo, t_hi);
    df.coefficient = fr.slope;
    df.intercept = fr.intercept;
    df.rms = fr.rms;
  }
  return df;
}

struct HeatBoundReport {
  std::vector<double> t_samples;
  double c_lower = std::numeric_limits<double>::quiet_NaN();
  double c_upper = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
};

namespace detail {

// Minimal C for the upper bound u <= C sqrt(t)/(x+sqrt(t)) e^{t - x^2/4t}
// over cells with x in [0, x_max].
inline double heat_upper_constant(const FieldState& f, double x_max) {
  double c = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double x = f.cell_center(i);
    if (x < 0.0 || x > x_max) continue;
    double st = std::sqrt(f.t);
    double env = st / (x + st) * std::exp(f.t - x * x / (4.0 * f.t));
    c = std::max(c, f.values[i] / env);
  }
  return c;
}

// Minimal C for sqrt(t)/(C(x+sqrt(t))) e^{-x^2/4t - Cx/t} <= u, or nullopt
// if no C <= c_cap works (e.g. u vanishes somewhere in range).
inline std::optional<double> heat_lower_constant(const FieldState& f,
                                                 double x_max,
                                                 double c_cap = 1e3) {
  auto violated = [&](double C) {
    double st = std::sqrt(f.t);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      double x = f.cell_center(i);
      if (x < 0.0 || x > x_max) continue;
      double lb = st / (C * (x + st)) *
                  std::exp(-x * x / (4.0 * f.t) - C * x / f.t);
      if (lb > f.values[i]) return true;
    }
    return false;
  };
  if (violated(c_cap)) return std::nullopt;
  double lo = 1e-8, hi = c_cap;
  if (!violated(lo)) return lo;
  for (int it = 0; it < 80; ++it) {
    double mid = std::sqrt(lo * hi);
    (violated(mid) ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace detail

// Evolve the step datum and measure the minimal constants making the
// half-line heat-kernel bounds hold at each sample time, x in [0, 6 sqrt(t)].
inline HeatBoundReport heat_bound_check(const ModelParams& p,
                                        std::vector<double> t_samples,
                                        double dx,
                                        const ReactionEvalPolicy& pol = {}) {
  std::sort(t_samples.begin(), t_samples.end());
  if (t_samples.empty() || t_samples.front() < 1.0 || t_samples.back() > 20.0)
    throw std::invalid_argument("heat_bound_check: samples must lie in [1, 20]");

  FieldState f = init_field(p, -40.0, 90.0, dx);
  const double dt = 0.4 * dx * dx;
  std::vector<double> stage;
  HeatBoundReport rep;
  rep.t_samples = t_samples;
  rep.c_lower = 0.0;
  rep.c_upper = 0.0;
  rep.ok = true;
  for (double ts : t_samples) {
    while (f.t < ts - 0.5 * dt)
      step_with(f, std::min(dt, ts - f.t),
                [&](double u) { return reaction(u, p, pol); }, stage);
    double xm = 6.0 * std::sqrt(f.t);
    rep.c_upper = std::max(rep.c_upper, detail::heat_upper_constant(f, xm));
    auto cl = detail::heat_lower_constant(f, xm);
    if (!cl) {
      rep.ok = false;
      rep.c_lower = std::numeric_limits<double>::quiet_NaN();
      throw std::runtime_error("heat_bound_check: no C <= 1e3 satisfies the lower bound");
    }
    rep.c_lower = std::max(rep.c_lower, *cl);
  }
  rep.ok = rep.c_upper <= 1e3 && rep.c_lower <= 1e3;
  return rep;
}

}  // namespace fkpp
