#pragma once

// The Matsuoka distribution M(p) on (0, 1):
//   f(x; p) = 2 sqrt(-p^3 ln x / pi) x^(p-1),   -ln X ~ Gamma(3/2, scale 1/p).

#include <cstddef>
#include <vector>

#include "marma/random.hpp"

namespace marma {

/// Positive, finite shape parameter p of M(p).
class Shape {
 public:
  explicit Shape(double p);
  double value() const noexcept { return p_; }

 private:
  double p_;
};

/// ln f(x; p). Throws DomainError unless 0 < x < 1.
double log_pdf(double x, Shape p);
double pdf(double x, Shape p);

/// F(x; p), total on the real line: 0 for x <= 0, 1 for x >= 1, otherwise
/// Q(3/2, -p ln x).
double cdf(double x, Shape p);

/// F^{-1}(q; p) for q in [0, 1]; 0 and 1 at the endpoints.
double quantile(double q, Shape p);

/// One draw of M(p) via the gamma representation; always strictly in (0, 1).
double sample_one(Shape p, Rng& rng);
std::vector<double> sample(Shape p, Rng& rng, std::size_t count);

/// E(X^k) = (p / (p + k))^{3/2}, k >= 1.
double moment(int k, Shape p);
double mean(Shape p);
double variance(Shape p);

/// u(p) = (p / (1 + p))^{3/2}: the mean of M(p).
double shape_to_mean(Shape p);
/// u^{-1}(mu) = mu^{2/3} / (1 - mu^{2/3}). Throws DomainError unless 0 < mu < 1.
Shape mean_to_shape(double mu);
/// Same map given both mu and 1 - mu, so that neither needs to be recovered
/// from the other (accurate when mu is close to 1).
Shape mean_to_shape(double mu, double one_minus_mu);

}  // namespace marma
