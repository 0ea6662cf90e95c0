#pragma once

#include <string>
#include <string_view>

namespace marma {

enum class LinkKind { logit, cloglog, loglog };

/// Link function g: (0, 1) -> R, strictly increasing.
///   logit   ln(x / (1 - x))
///   cloglog ln(-ln(1 - x))
///   loglog  -ln(-ln x)
class Link {
 public:
  /// Inverse-link outputs are confined to [kBound, 1 - kBound].
  static constexpr double kBound = 0x1.0p-48;

  struct Inverse {
    double value;
    bool clamped;
    /// 1 - value, computed from eta so it keeps full relative precision
    /// when value is close to 1.
    double complement;
  };

  constexpr Link() = default;
  constexpr explicit Link(LinkKind kind) : kind_(kind) {}

  /// Parses "logit", "cloglog" or "loglog"; throws std::invalid_argument.
  static Link from_name(std::string_view name);

  LinkKind kind() const noexcept { return kind_; }
  std::string name() const;

  double g(double x) const;
  double g_prime(double x) const;
  double g_inv(double eta) const { return g_inv_checked(eta).value; }
  Inverse g_inv_checked(double eta) const;
  /// d g^{-1}(eta) / d eta, i.e. 1 / g'(g^{-1}(eta)) without rounding mu first.
  double dmu_deta(double eta) const;

  friend bool operator==(const Link&, const Link&) = default;

 private:
  LinkKind kind_ = LinkKind::logit;
};

}  // namespace marma
