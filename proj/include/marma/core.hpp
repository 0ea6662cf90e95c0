#pragma once

// The MARMA(p, q) systematic component
//
//   eta_t = alpha + X_t' beta + sum_i phi_i [g(Y_{t-i}) - X_{t-i}' beta]
//                             + sum_j theta_j r_{t-j},     r_t = g(Y_t) - eta_t,
//
// with Y_t | F_{t-1} ~ M(u^{-1}(mu_t)) and mu_t = g^{-1}(eta_t), together with
// the partial log-likelihood, its score and the conditional information.
//
// Pre-sample conventions (t < 1): g(Y_t) = 0, X_t = mean of the first p
// covariate rows, r_t = 0, and all eta derivatives are 0.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "marma/links.hpp"

namespace marma {

struct ModelSpec {
  int ar_order = 0;
  int ma_order = 0;
  int n_covariates = 0;
  Link link{LinkKind::logit};

  /// 1 + r + p + q
  int num_params() const noexcept { return 1 + n_covariates + ar_order + ma_order; }
  void validate() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// gamma = (alpha, beta_1..beta_r, phi_1..phi_p, theta_1..theta_q), flat in
/// that order.
class ParamVector {
 public:
  explicit ParamVector(const ModelSpec& spec);
  ParamVector(const ModelSpec& spec, Eigen::VectorXd flat);
  static ParamVector from_parts(const ModelSpec& spec, double alpha, const std::vector<double>& beta,
                                const std::vector<double>& phi, const std::vector<double>& theta);

  int size() const noexcept { return static_cast<int>(values_.size()); }
  const Eigen::VectorXd& flat() const noexcept { return values_; }
  Eigen::VectorXd& flat() noexcept { return values_; }

  double alpha() const { return values_[0]; }
  auto beta() const { return values_.segment(beta_offset(), n_cov_); }
  auto phi() const { return values_.segment(phi_offset(), ar_); }
  auto theta() const { return values_.segment(theta_offset(), ma_); }

  int beta_offset() const noexcept { return 1; }
  int phi_offset() const noexcept { return 1 + n_cov_; }
  int theta_offset() const noexcept { return 1 + n_cov_ + ar_; }

  /// "alpha", "beta1", ..., "phi1", ..., "theta1", ...
  static std::vector<std::string> names(const ModelSpec& spec);

 private:
  int n_cov_ = 0;
  int ar_ = 0;
  int ma_ = 0;
  Eigen::VectorXd values_;
};

/// Observations y_1..y_n in (0, 1) and the n x r covariate matrix.
struct SeriesData {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;

  std::size_t size() const noexcept { return static_cast<std::size_t>(y.size()); }
  /// Throws DomainError / DimensionError.
  void validate(const ModelSpec& spec) const;
};

struct FilterOutput {
  Eigen::VectorXd eta;
  Eigen::VectorXd mu;
  Eigen::VectorXd one_minus_mu;  // 1 - mu_t from eta_t, full relative precision
  Eigen::VectorXd shape;  // p_t = u^{-1}(mu_t)
  Eigen::VectorXd resid;  // r_t = g(y_t) - eta_t
  Eigen::MatrixXd deriv;  // D: d eta_t / d gamma_j
  std::vector<bool> clamped;  // mu_t hit the inverse-link bound
  int clamp_count = 0;
};

/// The right-hand side of the systematic recursion, shared by the filter, the
/// forecaster and the simulator.
class LinearPredictor {
 public:
  /// `x` supplies covariate rows from t = 1 onward (at least p rows when
  /// p > 0 and r > 0) for the pre-sample covariate mean.
  LinearPredictor(const ParamVector& gamma, const ModelSpec& spec, const Eigen::MatrixXd& x);

  /// X_t' beta for covariate row `row`.
  double covariate_effect(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  /// Pre-sample X' beta.
  double presample_effect() const noexcept { return presample_xb_; }
  const Eigen::RowVectorXd& presample_row() const noexcept { return presample_x_; }

  /// eta at time k + 1 given histories g(Y), X'beta and r for times 1..k.
  double eta(std::span<const double> gy, std::span<const double> xb, std::span<const double> resid,
             double xb_now) const;

 private:
  double alpha_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd phi_;
  Eigen::VectorXd theta_;
  Eigen::RowVectorXd presample_x_;
  double presample_xb_ = 0.0;
};

/// Runs the recursion over t = 1..n and the derivative recursions.
/// Throws NumericalError if eta_t is not finite.
FilterOutput filter(const ParamVector& gamma, const SeriesData& data, const ModelSpec& spec);

/// Per-observation pieces in terms of the conditional mean mu. The
/// three-argument forms also take 1 - mu, which near mu = 1 carries digits
/// that mu itself has lost.
double loglik_term(double y, double mu);
double loglik_term(double y, double mu, double one_minus_mu);
/// h_t = d l_t / d mu_t.
double score_mu(double y, double mu);
double score_mu(double y, double mu, double one_minus_mu);
/// [E_mu] = -E(d^2 l_t / d mu_t^2 | F_{t-1}) = 2 / (3 (1 - mu^{2/3})^2 mu^2).
double info_mu(double mu);
double info_mu(double mu, double one_minus_mu);

double loglik(const ParamVector& gamma, const SeriesData& data, const ModelSpec& spec);
Eigen::VectorXd score(const ParamVector& gamma, const SeriesData& data, const ModelSpec& spec);
/// K_n = D' T E_mu T D.
Eigen::MatrixXd cond_info(const ParamVector& gamma, const SeriesData& data, const ModelSpec& spec);

struct Evaluation {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd info;  // empty unless requested
  int clamp_count = 0;
};

/// loglik, score and (optionally) K_n from a single filter pass.
Evaluation evaluate(const ParamVector& gamma, const SeriesData& data, const ModelSpec& spec,
                    bool with_info = false);

}  // namespace marma
