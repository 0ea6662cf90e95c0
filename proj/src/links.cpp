#include "marma/links.hpp"

#include <cmath>
#include <stdexcept>

#include "marma/errors.hpp"

namespace marma {
namespace {

void check_unit(double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("link: argument must lie in (0, 1), got " + std::to_string(x));
}

}  // namespace

Link Link::from_name(std::string_view name) {
  if (name == "logit") return Link(LinkKind::logit);
  if (name == "cloglog") return Link(LinkKind::cloglog);
  if (name == "loglog") return Link(LinkKind::loglog);
  throw std::invalid_argument("unknown link '" + std::string(name) + "' (expected logit, cloglog or loglog)");
}

std::string Link::name() const {
  switch (kind_) {
    case LinkKind::logit: return "logit";
    case LinkKind::cloglog: return "cloglog";
    case LinkKind::loglog: return "loglog";
  }
  return {};
}

double Link::g(double x) const {
  check_unit(x);
  switch (kind_) {
    case LinkKind::logit: return std::log(x) - std::log1p(-x);
    case LinkKind::cloglog: return std::log(-std::log1p(-x));
    case LinkKind::loglog: return -std::log(-std::log(x));
  }
  return 0.0;
}

double Link::g_prime(double x) const {
  check_unit(x);
  switch (kind_) {
    case LinkKind::logit: return 1.0 / (x * (1.0 - x));
    case LinkKind::cloglog: return -1.0 / ((1.0 - x) * std::log1p(-x));
    case LinkKind::loglog: return -1.0 / (x * std::log(x));
  }
  return 0.0;
}

Link::Inverse Link::g_inv_checked(double eta) const {
  if (std::isnan(eta)) throw DomainError("link inverse: eta is NaN");
  double mu = 0.0, c = 0.0;
  switch (kind_) {
    case LinkKind::logit:
      if (eta >= 0.0) {
        const double e = std::exp(-eta);
        mu = 1.0 / (1.0 + e);
        c = e / (1.0 + e);
      } else {
        const double e = std::exp(eta);
        mu = e / (1.0 + e);
        c = 1.0 / (1.0 + e);
      }
      break;
    case LinkKind::cloglog:
      mu = -std::expm1(-std::exp(eta));
      c = std::exp(-std::exp(eta));
      break;
    case LinkKind::loglog:
      mu = std::exp(-std::exp(-eta));
      c = -std::expm1(-std::exp(-eta));
      break;
  }
  if (mu < kBound) return {kBound, true, 1.0 - kBound};
  if (c < kBound) return {1.0 - kBound, true, kBound};
  return {mu, false, c};
}

double Link::dmu_deta(double eta) const {
  if (std::isnan(eta)) throw DomainError("link inverse: eta is NaN");
  switch (kind_) {
    case LinkKind::logit: {
      const double e = std::exp(-std::fabs(eta));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case LinkKind::cloglog: return std::exp(eta - std::exp(eta));
    case LinkKind::loglog: return std::exp(-eta - std::exp(-eta));
  }
  return 0.0;
}

}  // namespace marma
