#pragma once

// Regularized incomplete gamma functions, their inverses, and the standard
// normal distribution.

namespace marma::special {

/// Lower regularized incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double gamma_p(double a, double x);

/// Upper regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

/// x >= 0 with P(a, x) = p, for p in [0, 1].
double gamma_p_inv(double a, double p);

/// x >= 0 with Q(a, x) = q, for q in [0, 1].
double gamma_q_inv(double a, double q);

double normal_cdf(double z);

/// Upper tail 1 - Phi(z), accurate for large z.
double normal_sf(double z);

/// Phi^{-1}(p) for p in (0, 1); -inf / +inf at 0 / 1.
double normal_quantile(double p);

}  // namespace marma::special
