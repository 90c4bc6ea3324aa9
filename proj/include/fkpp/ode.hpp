#pragma once

// Embedded Dormand-Prince 5(4) pair with adaptive step control.
// The right-hand side may declare a state invalid (returns false), in which
// case the step is retried with a smaller h; the observer may stop the
// integration early.

#include <array>
#include <cmath>
#include <cstddef>
#include <algorithm>

namespace fkpp {

enum class OdeStatus { ReachedEnd, StoppedByObserver, FailedStep };

struct OdeOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double first_step = 1e-4;
  double min_step = 1e-13;  // relative to max(1,|x|); below this -> FailedStep
};

// Rhs:     bool operator()(double x, const std::array<double,N>& y,
//                          std::array<double,N>& dydx)
// MaxStep: double operator()(double x)        -- step-size ceiling at x
// Observer: bool operator()(double x, const std::array<double,N>& y)
template <std::size_t N, class Rhs, class MaxStep, class Observer>
OdeStatus integrate_dp45(Rhs&& rhs, std::array<double, N>& y, double& x,
                         double x_end, const OdeOptions& opt,
                         MaxStep&& max_step, Observer&& obs) {
  using State = std::array<double, N>;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  if (x == x_end) return OdeStatus::ReachedEnd;
  const double dir = (x_end > x) ? 1.0 : -1.0;
  double h = dir * std::abs(opt.first_step);

  State k1, k2, k3, k4, k5, k6, k7, yt, ynew;
  if (!rhs(x, y, k1)) return OdeStatus::FailedStep;

  for (;;) {
    double hcap = std::abs(max_step(x));
    double remaining = std::abs(x_end - x);
    h = dir * std::min({std::abs(h), hcap, remaining});
    if (std::abs(h) < opt.min_step * std::max(1.0, std::abs(x)))
      return OdeStatus::FailedStep;

    bool ok = true;
    auto stage = [&](double frac, const State& base, State& k) {
      return rhs(x + frac * h, base, k);
    };
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * a21 * k1[i];
    ok = stage(c2, yt, k2);
    if (ok) {
      for (std::size_t i = 0; i < N; ++i)
        yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      ok = stage(c3, yt, k3);
    }
    if (ok) {
      for (std::size_t i = 0; i < N; ++i)
        yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      ok = stage(c4, yt, k4);
    }
    if (ok) {
      for (std::size_t i = 0; i < N; ++i)
        yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      ok = stage(c5, yt, k5);
    }
    if (ok) {
      for (std::size_t i = 0; i < N; ++i)
        yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                            a64 * k4[i] + a65 * k5[i]);
      ok = stage(1.0, yt, k6);
    }
    if (ok) {
      for (std::size_t i = 0; i < N; ++i)
        ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                              b5 * k5[i] + b6 * k6[i]);
      ok = rhs(x + h, ynew, k7);
    }
    if (!ok) {
      h *= 0.5;
      continue;
    }

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                       e6 * k6[i] + e7 * k7[i]);
      double sc = opt.abs_tol +
                  opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / double(N));

    if (err <= 1.0) {
      x += h;
      y = ynew;
      k1 = k7;  // FSAL
      if (!obs(x, y)) return OdeStatus::StoppedByObserver;
      if (x == x_end || std::abs(x_end - x) < 1e-15 * std::max(1.0, std::abs(x)))
        return OdeStatus::ReachedEnd;
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      h *= std::clamp(fac, 0.2, 5.0);
    } else {
      double fac = 0.9 * std::pow(err, -0.25);
      h *= std::clamp(fac, 0.1, 0.9);
    }
  }
}

}  // namespace fkpp
