#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "marma/core.hpp"

namespace marma {

struct FitOptions {
  int max_evals = 4000;
  /// Convergence requires the sup-norm of the score to fall below this.
  double grad_tol = 1e-6;
  double rel_f_tol = 1e-13;
  std::optional<Eigen::VectorXd> start;
  /// Run a Nelder-Mead polish (then quasi-Newton again) when the first
  /// quasi-Newton stage stops short of grad_tol.
  bool polish = true;

  void validate() const;
};

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
  double hqc = 0.0;
};

/// aic = -2l + 2k, bic = -2l + k ln n, hqc = -2l + 2k ln ln n.
InformationCriteria information_criteria(double loglik, std::size_t n, int k);

struct FitResult {
  explicit FitResult(const ModelSpec& spec) : spec(spec), gamma_hat(spec) {}

  ModelSpec spec;
  ParamVector gamma_hat;
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd cond_info;   // K_n at gamma_hat
  Eigen::MatrixXd covariance;  // K_n^{-1}; empty when singular
  Eigen::VectorXd std_errors;      // sqrt(diag K_n^{-1}); empty when singular
  bool info_singular = false;
  int n_evals = 0;
  bool converged = false;
  std::string message;
  int clamp_count = 0;
  InformationCriteria ic;
  std::size_t n_obs = 0;

  double score_norm() const { return score.size() ? score.lpNorm<Eigen::Infinity>() : 0.0; }
};

InformationCriteria information_criteria(const FitResult& fit, std::size_t n, int k);

/// Least-squares starting values: (alpha, beta) from g(y) on (1, X), phi from
/// the regression residuals on their own p lags, theta = 0.
ParamVector default_start(const SeriesData& data, const ModelSpec& spec);

/// Partial maximum likelihood. Non-convergence is reported through
/// `converged` / `message` with the best iterate; a numerically singular K_n
/// sets `info_singular` and leaves the standard errors empty.
/// Throws DataError for series too short or constant.
FitResult fit(const SeriesData& data, const ModelSpec& spec, const FitOptions& options = {});

/// Recomputes K_n, its inverse and standard errors at `fit.gamma_hat`.
void attach_inference(FitResult& fit, const SeriesData& data);

}  // namespace marma
