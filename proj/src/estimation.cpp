#include "marma/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "marma/errors.hpp"

namespace marma {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimization view of the negative partial log-likelihood.
class Objective {
 public:
  Objective(const SeriesData& data, const ModelSpec& spec) : data_(data), spec_(spec) {}

  struct Point {
    Eigen::VectorXd x;
    double f = kInf;
    Eigen::VectorXd grad;
  };

  double value(const Eigen::VectorXd& x) {
    ++evals_;
    try {
      return -loglik(ParamVector(spec_, x), data_, spec_);
    } catch (const std::exception&) {
      return kInf;
    }
  }

  Point value_and_grad(const Eigen::VectorXd& x) {
    ++evals_;
    Point pt{x, kInf, {}};
    try {
      const Evaluation ev = evaluate(ParamVector(spec_, x), data_, spec_);
      if (std::isfinite(ev.loglik) && ev.score.allFinite()) {
        pt.f = -ev.loglik;
        pt.grad = -ev.score;
      }
    } catch (const std::exception&) {
    }
    return pt;
  }

  /// K_n^{-1} when positive definite, used to scale quasi-Newton steps.
  std::optional<Eigen::MatrixXd> inverse_info(const Eigen::VectorXd& x) {
    try {
      const Eigen::MatrixXd info = cond_info(ParamVector(spec_, x), data_, spec_);
      Eigen::LLT<Eigen::MatrixXd> llt(info);
      if (llt.info() != Eigen::Success || !info.allFinite()) return std::nullopt;
      Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
      if (!inv.allFinite()) return std::nullopt;
      return inv;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  int evals() const noexcept { return evals_; }

 private:
  const SeriesData& data_;
  const ModelSpec& spec_;
  int evals_ = 0;
};

struct StageResult {
  Objective::Point best;
  bool converged = false;
  std::string message;
};

double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

// BFGS on the inverse Hessian, seeded with K_n^{-1}, Armijo backtracking.
StageResult quasi_newton(Objective& obj, const Eigen::VectorXd& x0, const FitOptions& opt) {
  StageResult res;
  Objective::Point cur = obj.value_and_grad(x0);
  if (!std::isfinite(cur.f)) {
    res.best = cur;
    res.message = "objective not finite at the starting point";
    return res;
  }
  const auto k = x0.size();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(k, k);
  auto fresh_metric = [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    if (auto inv = obj.inverse_info(x)) return *inv;
    return identity / std::max(1.0, sup_norm(cur.grad));
  };
  Eigen::MatrixXd h = fresh_metric(cur.x);
  bool just_reset = true;
  int stalls = 0;

  while (obj.evals() < opt.max_evals) {
    if (sup_norm(cur.grad) <= opt.grad_tol) {
      res.converged = true;
      res.message = "score below tolerance";
      break;
    }
    Eigen::VectorXd dir = -h * cur.grad;
    double slope = cur.grad.dot(dir);
    if (!(slope < 0.0)) {
      h = fresh_metric(cur.x);
      just_reset = true;
      dir = -h * cur.grad;
      slope = cur.grad.dot(dir);
      if (!(slope < 0.0)) {
        dir = -cur.grad;
        slope = -cur.grad.squaredNorm();
      }
    }

    const double noise = 1e-12 * (std::fabs(cur.f) + 1.0);
    double step = 1.0;
    Objective::Point trial;
    bool accepted = false;
    for (int ls = 0; ls < 60 && obj.evals() < opt.max_evals; ++ls) {
      trial = obj.value_and_grad(cur.x + step * dir);
      if (std::isfinite(trial.f) && trial.f <= cur.f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      // Near the optimum the decrease drops below rounding noise in f; accept
      // the step if f is unchanged within that noise and the score shrank.
      if (std::isfinite(trial.f) && trial.f <= cur.f + noise && sup_norm(trial.grad) < sup_norm(cur.grad)) {
        accepted = true;
        break;
      }
      double next = 0.5 * step;
      if (std::isfinite(trial.f)) {
        // Minimizer of the quadratic through f(0), f'(0) and f(step).
        const double denom = 2.0 * (trial.f - cur.f - slope * step);
        if (denom > 0.0) next = std::clamp(-slope * step * step / denom, 0.1 * step, 0.5 * step);
      }
      step = next;
    }
    if (!accepted) {
      if (!just_reset) {
        h = fresh_metric(cur.x);
        just_reset = true;
        continue;
      }
      res.message = "line search failed";
      break;
    }

    const Eigen::VectorXd s = trial.x - cur.x;
    const Eigen::VectorXd y = trial.grad - cur.grad;
    const double sy = s.dot(y);
    const double df = cur.f - trial.f;
    cur = std::move(trial);
    just_reset = false;
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left = identity - rho * s * y.transpose();
      h = left * h * left.transpose() + rho * s * s.transpose();
    }

    const bool tiny_step = sup_norm(s) <= 1e-12 * (1.0 + sup_norm(cur.x));
    if (df <= opt.rel_f_tol * (std::fabs(cur.f) + 1e-10) && tiny_step) {
      if (++stalls >= 5) {
        res.message = "relative change in objective below tolerance";
        break;
      }
    } else {
      stalls = 0;
    }
  }
  if (res.message.empty()) res.message = "evaluation budget exhausted";
  res.converged = res.converged || sup_norm(cur.grad) <= opt.grad_tol;
  res.best = std::move(cur);
  return res;
}

Eigen::VectorXd nelder_mead(Objective& obj, const Eigen::VectorXd& x0, double f0, const FitOptions& opt,
                            int budget) {
  const auto k = x0.size();
  std::vector<Eigen::VectorXd> simplex(k + 1, x0);
  std::vector<double> fv(k + 1, f0);
  for (Eigen::Index i = 0; i < k; ++i) {
    simplex[i + 1][i] += 0.05 * std::max(std::fabs(x0[i]), 0.2);
    fv[i + 1] = obj.value(simplex[i + 1]);
  }
  std::vector<int> order(k + 1);
  const int stop_at = obj.evals() + budget;
  while (obj.evals() < stop_at) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[k - 1];
    if (std::fabs(fv[worst] - fv[best]) <= opt.rel_f_tol * (std::fabs(fv[best]) + 1e-10)) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(k);
    for (int i : order)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(k);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = obj.value(reflected);
    if (fr < fv[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = obj.value(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        fv[worst] = fe;
      } else {
        simplex[worst] = reflected;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = reflected;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = obj.value(contracted);
    if (fc < std::min(fr, fv[worst])) {
      simplex[worst] = contracted;
      fv[worst] = fc;
      continue;
    }
    for (int i : order) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      fv[i] = obj.value(simplex[i]);
    }
  }
  const auto it = std::min_element(fv.begin(), fv.end());
  return simplex[static_cast<std::size_t>(it - fv.begin())];
}

bool is_constant(const Eigen::VectorXd& y) { return (y.array() == y[0]).all(); }

}  // namespace

void FitOptions::validate() const {
  if (max_evals < 1) throw std::invalid_argument("max_evals must be positive");
  if (!(grad_tol > 0.0) || !(rel_f_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
}

InformationCriteria information_criteria(double loglik, std::size_t n, int k) {
  const double nn = static_cast<double>(n);
  return {-2.0 * loglik + 2.0 * k, -2.0 * loglik + k * std::log(nn), -2.0 * loglik + 2.0 * k * std::log(std::log(nn))};
}

InformationCriteria information_criteria(const FitResult& fit, std::size_t n, int k) {
  return information_criteria(fit.loglik, n, k);
}

ParamVector default_start(const SeriesData& data, const ModelSpec& spec) {
  data.validate(spec);
  const auto n = static_cast<Eigen::Index>(data.size());
  const int r = spec.n_covariates;
  const int p = spec.ar_order;

  Eigen::VectorXd gy(n);
  for (Eigen::Index t = 0; t < n; ++t) gy[t] = spec.link.g(data.y[t]);

  ParamVector start(spec);
  auto fallback = [&] {
    ParamVector zero(spec);
    zero.flat()[0] = gy.mean();
    return zero;
  };

  Eigen::MatrixXd design(n, 1 + r);
  design.col(0).setOnes();
  if (r > 0) design.rightCols(r) = data.x;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (n < 1 + r || qr.rank() < 1 + r) return fallback();
  const Eigen::VectorXd coef = qr.solve(gy);
  start.flat().head(1 + r) = coef;

  if (p > 0) {
    const Eigen::VectorXd u = gy - design * coef;
    const Eigen::Index rows = n - p;
    if (rows < p + 1) return fallback();
    Eigen::MatrixXd lags(rows, p);
    for (int i = 1; i <= p; ++i) lags.col(i - 1) = u.segment(p - i, rows);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> ar_qr(lags);
    if (ar_qr.rank() < p) return fallback();
    const Eigen::VectorXd phi = ar_qr.solve(u.tail(rows));
    if (!phi.allFinite()) return fallback();
    start.flat().segment(start.phi_offset(), p) = phi;
    // The regression intercept estimates the level alpha / (1 - sum phi).
    start.flat()[0] = coef[0] * (1.0 - phi.sum());
  }
  if (!start.flat().allFinite()) return fallback();
  return start;
}

void attach_inference(FitResult& fit, const SeriesData& data) {
  const Evaluation ev = evaluate(fit.gamma_hat, data, fit.spec, true);
  fit.loglik = ev.loglik;
  fit.score = ev.score;
  fit.clamp_count = ev.clamp_count;
  fit.cond_info = ev.info;
  fit.covariance.resize(0, 0);
  fit.std_errors.resize(0);
  fit.info_singular = true;

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(ev.info);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ev.info.allFinite()) {
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (dmax > 0.0 && d.minCoeff() > 1e-13 * dmax) {
      const auto k = ev.info.rows();
      Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
      cov = 0.5 * (cov + cov.transpose());
      if (cov.allFinite() && (cov.diagonal().array() > 0.0).all()) {
        fit.covariance = std::move(cov);
        fit.std_errors = fit.covariance.diagonal().cwiseSqrt();
        fit.info_singular = false;
      }
    }
  }
  fit.n_obs = data.size();
  fit.ic = information_criteria(fit.loglik, fit.n_obs, fit.spec.num_params());
}

FitResult fit(const SeriesData& data, const ModelSpec& spec, const FitOptions& options) {
  options.validate();
  data.validate(spec);
  const int k = spec.num_params();
  if (data.size() <= static_cast<std::size_t>(k))
    throw DataError("need more than " + std::to_string(k) + " observations to fit " + std::to_string(k) +
                    " parameters");
  if (is_constant(data.y)) throw DataError("observations are constant");

  Objective obj(data, spec);
  const Eigen::VectorXd x0 = options.start ? ParamVector(spec, *options.start).flat() : default_start(data, spec).flat();

  StageResult stage = quasi_newton(obj, x0, options);
  if (!stage.converged && options.polish && std::isfinite(stage.best.f) && obj.evals() < options.max_evals) {
    const int budget = std::max(1, (options.max_evals - obj.evals()) / 2);
    const Eigen::VectorXd polished = nelder_mead(obj, stage.best.x, stage.best.f, options, budget);
    StageResult again = quasi_newton(obj, polished, options);
    if (again.best.f <= stage.best.f || again.converged) {
      again.message = "polished: " + again.message;
      stage = std::move(again);
    }
  }

  FitResult result(spec);
  result.n_evals = obj.evals();
  result.message = stage.message;
  if (!std::isfinite(stage.best.f)) {
    result.gamma_hat = ParamVector(spec, x0);
    result.converged = false;
    result.n_obs = data.size();
    result.loglik = -kInf;
    return result;
  }
  result.gamma_hat = ParamVector(spec, stage.best.x);
  attach_inference(result, data);
  result.converged = stage.converged && result.score_norm() <= options.grad_tol;
  return result;
}

}  // namespace marma
