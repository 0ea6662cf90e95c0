#include "marma/distribution.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "marma/errors.hpp"
#include "marma/special.hpp"

namespace marma {
namespace {

constexpr double kThreeHalves = 1.5;
// ln 2 - ln(sqrt(pi))
const double kLogNorm = std::log(2.0) - 0.5 * std::log(std::numbers::pi);

void check_unit(double x, const char* who) {
  if (!(x > 0.0 && x < 1.0))
    throw DomainError(std::string(who) + ": argument must lie in (0, 1), got " + std::to_string(x));
}

// ln x, computed from x - 1 near 1 (exact there by Sterbenz).
double log_unit(double x) { return x > 0.5 ? std::log1p(x - 1.0) : std::log(x); }

}  // namespace

Shape::Shape(double p) : p_(p) {
  if (!(p > 0.0) || !std::isfinite(p))
    throw DomainError("Matsuoka shape must be positive and finite, got " + std::to_string(p));
}

double log_pdf(double x, Shape p) {
  check_unit(x, "log_pdf");
  const double lx = log_unit(x);
  const double pv = p.value();
  return kLogNorm + 1.5 * std::log(pv) + 0.5 * std::log(-lx) + (pv - 1.0) * lx;
}

double pdf(double x, Shape p) { return std::exp(log_pdf(x, p)); }

double cdf(double x, Shape p) {
  if (std::isnan(x)) return x;
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return special::gamma_q(kThreeHalves, -p.value() * log_unit(x));
}

double quantile(double q, Shape p) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: probability must lie in [0, 1]");
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;
  return std::exp(-special::gamma_q_inv(kThreeHalves, q) / p.value());
}

double sample_one(Shape p, Rng& rng) {
  const double x = std::exp(-rng.gamma_three_halves() / p.value());
  if (x >= 1.0) return std::nextafter(1.0, 0.0);
  if (x < std::numeric_limits<double>::min()) return std::numeric_limits<double>::min();
  return x;
}

std::vector<double> sample(Shape p, Rng& rng, std::size_t count) {
  std::vector<double> out(count);
  for (auto& v : out) v = sample_one(p, rng);
  return out;
}

double moment(int k, Shape p) {
  if (k < 1) throw DomainError("moment: order must be a positive integer");
  return std::exp(-1.5 * std::log1p(k / p.value()));
}

double mean(Shape p) { return moment(1, p); }

double variance(Shape p) {
  // (p/(p+2))^{3/2} - (p/(p+1))^3, factored to keep precision for large p.
  const double inv = 1.0 / p.value();
  const double log_second = -1.5 * std::log1p(2.0 * inv);
  const double log_first_sq = -3.0 * std::log1p(inv);
  return std::exp(log_first_sq) * std::expm1(log_second - log_first_sq);
}

double shape_to_mean(Shape p) { return mean(p); }

Shape mean_to_shape(double mu) {
  check_unit(mu, "mean_to_shape");
  const double log_m = (2.0 / 3.0) * log_unit(mu);
  // m / (1 - m) with 1 - m = -expm1(ln m)
  return Shape(std::exp(log_m) / -std::expm1(log_m));
}

Shape mean_to_shape(double mu, double one_minus_mu) {
  check_unit(mu, "mean_to_shape");
  check_unit(one_minus_mu, "mean_to_shape");
  const double log_m = (2.0 / 3.0) * (mu > 0.5 ? std::log1p(-one_minus_mu) : std::log(mu));
  return Shape(std::exp(log_m) / -std::expm1(log_m));
}

}  // namespace marma
