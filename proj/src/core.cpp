#include "marma/core.hpp"

#include <cmath>
#include <numbers>

#include "marma/distribution.hpp"
#include "marma/errors.hpp"

namespace marma {
namespace {

const double kLogNorm = std::log(2.0) - 0.5 * std::log(std::numbers::pi);

// 1 - mu^{2/3}, accurate for mu near 1.
// ln mu from whichever of mu, 1 - mu is the accurate one.
double log_mean(double mu, double c) { return mu > 0.5 ? std::log1p(-c) : std::log(mu); }

}  // namespace

void ModelSpec::validate() const {
  if (ar_order < 0 || ma_order < 0 || n_covariates < 0)
    throw DimensionError("model orders and covariate count must be nonnegative");
}

ParamVector::ParamVector(const ModelSpec& spec)
    : n_cov_(spec.n_covariates),
      ar_(spec.ar_order),
      ma_(spec.ma_order),
      values_(Eigen::VectorXd::Zero(spec.num_params())) {
  spec.validate();
}

ParamVector::ParamVector(const ModelSpec& spec, Eigen::VectorXd flat) : ParamVector(spec) {
  if (flat.size() != spec.num_params())
    throw DimensionError("parameter vector has length " + std::to_string(flat.size()) + ", model needs " +
                         std::to_string(spec.num_params()));
  if (!flat.allFinite()) throw DomainError("parameter vector contains non-finite values");
  values_ = std::move(flat);
}

ParamVector ParamVector::from_parts(const ModelSpec& spec, double alpha, const std::vector<double>& beta,
                                    const std::vector<double>& phi, const std::vector<double>& theta) {
  if (static_cast<int>(beta.size()) != spec.n_covariates || static_cast<int>(phi.size()) != spec.ar_order ||
      static_cast<int>(theta.size()) != spec.ma_order)
    throw DimensionError("parameter blocks do not match the model orders");
  Eigen::VectorXd flat(spec.num_params());
  int k = 0;
  flat[k++] = alpha;
  for (double v : beta) flat[k++] = v;
  for (double v : phi) flat[k++] = v;
  for (double v : theta) flat[k++] = v;
  return ParamVector(spec, std::move(flat));
}

std::vector<std::string> ParamVector::names(const ModelSpec& spec) {
  std::vector<std::string> out{"alpha"};
  for (int l = 1; l <= spec.n_covariates; ++l) out.push_back("beta" + std::to_string(l));
  for (int i = 1; i <= spec.ar_order; ++i) out.push_back("phi" + std::to_string(i));
  for (int j = 1; j <= spec.ma_order; ++j) out.push_back("theta" + std::to_string(j));
  return out;
}

void SeriesData::validate(const ModelSpec& spec) const {
  if (y.size() == 0) throw DimensionError("series is empty");
  if (x.rows() != y.size())
    throw DimensionError("covariate matrix has " + std::to_string(x.rows()) + " rows, series has " +
                         std::to_string(y.size()));
  if (x.cols() != spec.n_covariates)
    throw DimensionError("covariate matrix has " + std::to_string(x.cols()) + " columns, model expects " +
                         std::to_string(spec.n_covariates));
  for (Eigen::Index t = 0; t < y.size(); ++t)
    if (!(y[t] > 0.0 && y[t] < 1.0))
      throw DomainError("observation " + std::to_string(t + 1) + " = " + std::to_string(y[t]) +
                        " is outside (0, 1)");
  if (!x.allFinite()) throw DomainError("covariates contain non-finite values");
}

LinearPredictor::LinearPredictor(const ParamVector& gamma, const ModelSpec& spec, const Eigen::MatrixXd& x)
    : alpha_(gamma.alpha()),
      beta_(gamma.beta()),
      phi_(gamma.phi()),
      theta_(gamma.theta()),
      presample_x_(Eigen::RowVectorXd::Zero(spec.n_covariates)) {
  if (spec.ar_order > 0 && spec.n_covariates > 0) {
    const Eigen::Index rows = std::min<Eigen::Index>(spec.ar_order, x.rows());
    if (rows > 0) presample_x_ = x.topRows(rows).colwise().mean();
    presample_xb_ = presample_x_.dot(beta_);
  }
}

double LinearPredictor::covariate_effect(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  return beta_.size() == 0 ? 0.0 : row.dot(beta_);
}

double LinearPredictor::eta(std::span<const double> gy, std::span<const double> xb, std::span<const double> resid,
                            double xb_now) const {
  const auto k = static_cast<Eigen::Index>(gy.size());
  double value = alpha_ + xb_now;
  for (Eigen::Index i = 1; i <= phi_.size(); ++i) {
    const Eigen::Index s = k - i;
    value += phi_[i - 1] * (s >= 0 ? gy[s] - xb[s] : -presample_xb_);
  }
  for (Eigen::Index j = 1; j <= theta_.size(); ++j) {
    const Eigen::Index s = k - j;
    if (s >= 0) value += theta_[j - 1] * resid[s];
  }
  return value;
}

FilterOutput filter(const ParamVector& gamma, const SeriesData& data, const ModelSpec& spec) {
  data.validate(spec);
  if (gamma.size() != spec.num_params()) throw DimensionError("parameter vector does not match model");

  const auto n = static_cast<Eigen::Index>(data.size());
  const int r = spec.n_covariates;
  const int p = spec.ar_order;
  const int q = spec.ma_order;
  const int k = spec.num_params();
  const Link& link = spec.link;
  const LinearPredictor predictor(gamma, spec, data.x);
  const auto phi = gamma.phi();
  const auto theta = gamma.theta();

  std::vector<double> gy(n), xb(n), resid(n);
  FilterOutput out;
  out.eta.resize(n);
  out.mu.resize(n);
  out.one_minus_mu.resize(n);
  out.shape.resize(n);
  out.resid.resize(n);
  out.deriv.setZero(n, k);
  out.clamped.assign(static_cast<std::size_t>(n), false);

  const int ia = 0;
  const int ib = gamma.beta_offset();
  const int ip = gamma.phi_offset();
  const int iq = gamma.theta_offset();

  for (Eigen::Index t = 0; t < n; ++t) {
    gy[t] = link.g(data.y[t]);
    xb[t] = predictor.covariate_effect(data.x.row(t));
    const double eta = predictor.eta(std::span(gy).first(t), std::span(xb).first(t), std::span(resid).first(t), xb[t]);
    if (!std::isfinite(eta)) throw NumericalError("linear predictor is not finite", static_cast<std::size_t>(t + 1));

    const auto inv = link.g_inv_checked(eta);
    out.clamp_count += inv.clamped ? 1 : 0;
    out.clamped[static_cast<std::size_t>(t)] = inv.clamped;
    out.eta[t] = eta;
    out.mu[t] = inv.value;
    out.one_minus_mu[t] = inv.complement;
    out.shape[t] = mean_to_shape(inv.value, inv.complement).value();
    resid[t] = gy[t] - eta;
    out.resid[t] = resid[t];

    // Derivative recursions.
    auto row = out.deriv.row(t);
    row[ia] = 1.0;
    for (int l = 0; l < r; ++l) {
      double v = data.x(t, l);
      for (int i = 1; i <= p; ++i)
        v -= phi[i - 1] * (t - i >= 0 ? data.x(t - i, l) : predictor.presample_row()[l]);
      row[ib + l] = v;
    }
    for (int i = 1; i <= p; ++i)
      row[ip + i - 1] = t - i >= 0 ? gy[t - i] - xb[t - i] : -predictor.presample_effect();
    for (int s = 1; s <= q; ++s) row[iq + s - 1] = t - s >= 0 ? resid[t - s] : 0.0;
    for (int j = 1; j <= q && t - j >= 0; ++j) row -= theta[j - 1] * out.deriv.row(t - j);
  }
  return out;
}

double loglik_term(double y, double mu, double one_minus_mu) {
  const double lm = log_mean(mu, one_minus_mu);
  const double m = std::exp((2.0 / 3.0) * lm);
  const double om = -std::expm1((2.0 / 3.0) * lm);
  const double ly = std::log(y);
  return kLogNorm + 0.5 * std::log(-ly) + lm - 1.5 * std::log(om) + (m / om - 1.0) * ly;
}

double score_mu(double y, double mu, double one_minus_mu) {
  const double om = -std::expm1((2.0 / 3.0) * log_mean(mu, one_minus_mu));
  return 2.0 * std::log(y) / (3.0 * om * om * std::cbrt(mu)) + 1.0 / (om * mu);
}

double info_mu(double mu, double one_minus_mu) {
  const double om = -std::expm1((2.0 / 3.0) * log_mean(mu, one_minus_mu));
  return 2.0 / (3.0 * om * om * mu * mu);
}

double loglik_term(double y, double mu) { return loglik_term(y, mu, 1.0 - mu); }
double score_mu(double y, double mu) { return score_mu(y, mu, 1.0 - mu); }
double info_mu(double mu) { return info_mu(mu, 1.0 - mu); }

Evaluation evaluate(const ParamVector& gamma, const SeriesData& data, const ModelSpec& spec, bool with_info) {
  const FilterOutput f = filter(gamma, data, spec);
  const auto n = f.mu.size();
  Evaluation ev;
  ev.clamp_count = f.clamp_count;
  ev.score = Eigen::VectorXd::Zero(spec.num_params());
  if (with_info) ev.info = Eigen::MatrixXd::Zero(spec.num_params(), spec.num_params());
  Eigen::VectorXd weights(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double mu = f.mu[t];
    const double c = f.one_minus_mu[t];
    const double term = loglik_term(data.y[t], mu, c);
    if (!std::isfinite(term))
      throw NumericalError("log-likelihood contribution is not finite", static_cast<std::size_t>(t + 1));
    ev.loglik += term;
    // A clamped mu does not move with eta.
    const double dmu_deta = f.clamped[static_cast<std::size_t>(t)] ? 0.0 : spec.link.dmu_deta(f.eta[t]);
    ev.score.noalias() += (score_mu(data.y[t], mu, c) * dmu_deta) * f.deriv.row(t).transpose();
    weights[t] = info_mu(mu, c) * dmu_deta * dmu_deta;
  }
  if (with_info) ev.info.noalias() = f.deriv.transpose() * weights.asDiagonal() * f.deriv;
  return ev;
}

double loglik(const ParamVector& gamma, const SeriesData& data, const ModelSpec& spec) {
  return evaluate(gamma, data, spec).loglik;
}

Eigen::VectorXd score(const ParamVector& gamma, const SeriesData& data, const ModelSpec& spec) {
  return evaluate(gamma, data, spec).score;
}

Eigen::MatrixXd cond_info(const ParamVector& gamma, const SeriesData& data, const ModelSpec& spec) {
  return evaluate(gamma, data, spec, true).info;
}

}  // namespace marma
