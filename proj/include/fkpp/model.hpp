#pragma once

// Reaction term u(1 - A(log(nu/u))^{1-r}), its normalization, and the
// derived constants shared by every solver.

#include <cmath>
#include <stdexcept>
#include <string>

namespace fkpp {

struct ModelParams {
  double r;       // singularity exponent, r > 1
  double A;       // amplitude, A > 0
  double nu;      // normalization, exp(A^{1/(r-1)}); may overflow to inf
  double log_nu;  // A^{1/(r-1)}, always finite; all evaluation goes via this
  double gamma;  // 2/(1+r)
  double beta;   // (3-r)/(1+r)
  double alpha;  // root > 1 of alpha(alpha-1) = A
  double s_a;    // alpha + 1/2
  double y_bar;  // tangency abscissa (1+r)^gamma A^{gamma/2}
};

inline double alpha_of(double A) {
  if (!(A > 0.0) || !std::isfinite(A))
    throw std::invalid_argument("alpha_of: A must be positive and finite");
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * A));
}

// The exponent in nu is +1/(r-1), not the -1/(r-1) that appears in some
// write-ups of this model: only the + sign gives f(1) = 0 for all A.
inline ModelParams make_params(double r, double A) {
  if (!(r > 1.0) || !std::isfinite(r))
    throw std::invalid_argument("make_params: require finite r > 1");
  if (!(A > 0.0) || !std::isfinite(A))
    throw std::invalid_argument("make_params: require finite A > 0");
  ModelParams p;
  p.r = r;
  p.A = A;
  p.log_nu = std::pow(A, 1.0 / (r - 1.0));
  p.nu = std::exp(p.log_nu);
  p.gamma = 2.0 / (1.0 + r);
  p.beta = (3.0 - r) / (1.0 + r);
  p.alpha = alpha_of(A);
  p.s_a = p.alpha + 0.5;
  p.y_bar = std::pow(1.0 + r, p.gamma) * std::pow(A, 0.5 * p.gamma);
  return p;
}

struct ReactionEvalPolicy {
  // Below clamp_low the log term is within O(1/log(1/u)) of its limit and
  // the state is dynamically irrelevant; evaluate via the f(u) ~ u limit.
  double clamp_low = 1e-250;
  double clamp_high = 1.0;
};

namespace detail {
// pow(ell, 1-r) with fast paths for the small integer exponents that
// dominate the PDE inner loop.
inline double log_power(double ell, double r) {
  if (r == 2.0) return 1.0 / ell;
  if (r == 3.0) return 1.0 / (ell * ell);
  if (r == 5.0) {
    double e2 = ell * ell;
    return 1.0 / (e2 * e2);
  }
  return std::pow(ell, 1.0 - r);
}
}  // namespace detail

inline double reaction(double u, const ModelParams& p,
                       const ReactionEvalPolicy& pol = {}) {
  // log_nu > 0, so u >= nu is only possible for u > 1
  if (u < 0.0 || (u > 1.0 && std::log(u) >= p.log_nu))
    throw std::domain_error("reaction: state outside [0, nu), maximum principle broken");
  if (u > pol.clamp_high) u = pol.clamp_high;
  if (u <= pol.clamp_low) return u;  // f(u)/u -> 1 as u -> 0+
  const double ell = p.log_nu - std::log(u);  // log(nu/u) > 0
  return u * (1.0 - p.A * detail::log_power(ell, p.r));
}

// f'(1), needed for the linearization about the invaded state.
inline double reaction_deriv_at_one(const ModelParams& p) {
  return (1.0 - p.r) * std::pow(p.A, -1.0 / (p.r - 1.0));
}

namespace detail {
inline void require_subcritical(const ModelParams& p, const char* who) {
  if (!(p.r < 3.0))
    throw std::invalid_argument(std::string(who) + ": requires r < 3 (beta > 0)");
}
inline void require_positive_y(double y, const char* who) {
  if (!(y > 0.0))
    throw std::invalid_argument(std::string(who) + ": requires y > 0");
}
}  // namespace detail

// The barrier curve Gamma(y) = gamma^2 y^2/(4 beta) + A y^{1-r}/beta.
inline double gamma_curve(double y, const ModelParams& p) {
  detail::require_subcritical(p, "gamma_curve");
  detail::require_positive_y(y, "gamma_curve");
  return p.gamma * p.gamma * y * y / (4.0 * p.beta) +
         p.A * std::pow(y, 1.0 - p.r) / p.beta;
}

inline double gamma_curve_deriv(double y, const ModelParams& p) {
  detail::require_subcritical(p, "gamma_curve_deriv");
  detail::require_positive_y(y, "gamma_curve_deriv");
  return p.gamma * p.gamma * y / (2.0 * p.beta) +
         p.A * (1.0 - p.r) * std::pow(y, -p.r) / p.beta;
}

inline double gamma_curve_second(double y, const ModelParams& p) {
  detail::require_subcritical(p, "gamma_curve_second");
  detail::require_positive_y(y, "gamma_curve_second");
  return p.gamma * p.gamma / (2.0 * p.beta) +
         p.A * p.r * (p.r - 1.0) * std::pow(y, -1.0 - p.r) / p.beta;
}

}  // namespace fkpp
