#pragma once

// Closed-form least squares on (possibly transformed) coordinates.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fkpp {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;       // rms residual
  std::size_t n = 0;      // points used
  double window_lo = 0.0;  // window on the abscissa actually used
  double window_hi = 0.0;
};

// Ordinary least squares of ys against xs restricted to xs in [lo, hi].
inline FitResult linfit(std::span<const double> xs, std::span<const double> ys,
                        double lo, double hi) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("linfit: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || xs[i] < lo || xs[i] > hi) continue;
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    ++n;
  }
  if (n < 8) throw std::invalid_argument("linfit: fewer than 8 points in window");
  // det/(n*sxx) is a scale-free measure of abscissa spread
  const double det = double(n) * sxx - sx * sx;
  if (!(det > 1e-12 * double(n) * sxx))
    throw std::invalid_argument("linfit: degenerate abscissas");
  FitResult f;
  f.slope = (double(n) * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / double(n);
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || xs[i] < lo || xs[i] > hi) continue;
    double r = ys[i] - (f.slope * xs[i] + f.intercept);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / double(n));
  f.n = n;
  f.window_lo = lo;
  f.window_hi = hi;
  return f;
}

// Least squares of ds against ts^beta with intercept, windowed on ts.
inline FitResult powfit(std::span<const double> ts, std::span<const double> ds,
                        double beta, double lo, double hi) {
  if (ts.size() != ds.size())
    throw std::invalid_argument("powfit: size mismatch");
  std::vector<double> xs(ts.size()), ys;
  ys.assign(ds.begin(), ds.end());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    // keep out-of-window points out of range so linfit skips them
    xs[i] = (ts[i] < lo || ts[i] > hi) ? std::nan("") : std::pow(ts[i], beta);
  }
  double tlo = std::pow(lo, beta), thi = std::pow(hi, beta);
  if (tlo > thi) std::swap(tlo, thi);
  FitResult f = linfit(xs, ys, tlo, thi);
  f.window_lo = lo;
  f.window_hi = hi;
  return f;
}

}  // namespace fkpp
