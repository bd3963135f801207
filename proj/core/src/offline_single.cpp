#include "netstream/offline_single.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "netstream/fused_chain.hpp"
#include "netstream/linalg.hpp"

namespace netstream {
namespace {

// Below this the kernel is a point mass; the floor only avoids 0/0.
constexpr double kMinWidth = 1e-100;

struct WeightedMoments {
  Vector mean;
  Matrix cov;
  double total_weight = 0.0;
};

WeightedMoments weighted_moments(const Matrix& x, Index center, double width,
                                 bool exclude_center) {
  const Index n = x.rows();
  const Index p = x.cols();
  const double w = std::max(width, kMinWidth);
  const double denom = 2.0 * w * w;

  Vector weights(n);
  for (Index j = 0; j < n; ++j) {
    const double dt = static_cast<double>(center - j);
    weights(j) = (exclude_center && j == center) ? 0.0 : std::exp(-(dt * dt) / denom);
  }
  WeightedMoments m;
  m.total_weight = weights.sum();
  m.mean = Vector::Zero(p);
  m.cov = Matrix::Zero(p, p);
  if (!(m.total_weight > 0.0)) return m;
  for (Index j = 0; j < n; ++j) {
    if (weights(j) > 0.0) m.mean += weights(j) * x.row(j).transpose();
  }
  m.mean /= m.total_weight;
  for (Index j = 0; j < n; ++j) {
    if (weights(j) > 0.0) {
      const Vector c = x.row(j).transpose() - m.mean;
      m.cov.noalias() += weights(j) * (c * c.transpose());
    }
  }
  m.cov /= m.total_weight;
  linalg::symmetrize(m.cov);
  return m;
}

}  // namespace

std::vector<Matrix> kernel_covariances(const Matrix& x, double width) {
  if (x.rows() < 2) throw std::invalid_argument("kernel_covariances needs T >= 2");
  if (!(width > 0.0)) throw std::invalid_argument("kernel width must be > 0");
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) out.push_back(weighted_moments(x, i, width, false).cov);
  return out;
}

double leave_one_out_log_likelihood(const Matrix& x, double width) {
  if (x.rows() < 3) throw std::invalid_argument("leave-one-out needs T >= 3");
  const double p = static_cast<double>(x.cols());
  double total = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    const auto m = weighted_moments(x, i, width, true);
    if (!(m.total_weight > 0.0)) return -std::numeric_limits<double>::infinity();
    Eigen::LLT<Matrix> llt(m.cov);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Vector e = x.row(i).transpose() - m.mean;
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double quad = e.dot(llt.solve(e));
    const double ll = -0.5 * (p * std::log(2.0 * std::numbers::pi) + log_det + quad);
    if (!std::isfinite(ll)) return -std::numeric_limits<double>::infinity();
    total += ll;
  }
  return total;
}

double select_kernel_width(const Matrix& x, std::span<const double> candidates) {
  if (candidates.empty()) throw std::invalid_argument("no candidate kernel widths");
  double best = candidates.front();
  double best_ll = -std::numeric_limits<double>::infinity();
  for (double w : candidates) {
    const double ll = leave_one_out_log_likelihood(x, w);
    if (ll > best_ll) {
      best_ll = ll;
      best = w;
    }
  }
  return best;
}

double joint_objective(std::span<const Matrix> thetas, std::span<const Matrix> covariances,
                       const SolverConfig& cfg) {
  if (thetas.size() != covariances.size()) {
    throw DimensionError("joint_objective: sequence lengths differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    double log_det = 0.0;
    try {
      log_det = linalg::log_det_spd(thetas[i]);
    } catch (const SingularMatrixError&) {
      return std::numeric_limits<double>::infinity();
    }
    double l1 = thetas[i].cwiseAbs().sum();
    if (!cfg.penalize_diagonal) l1 -= thetas[i].diagonal().cwiseAbs().sum();
    total += -log_det + covariances[i].cwiseProduct(thetas[i]).sum() + cfg.lambda1 * l1;
    if (i > 0) total += cfg.lambda2 * (thetas[i] - thetas[i - 1]).cwiseAbs().sum();
  }
  return total;
}

BurnInResult solve_joint(std::span<const Matrix> covariances, const SolverConfig& cfg) {
  cfg.validate();
  if (covariances.empty()) throw std::invalid_argument("solve_joint needs T >= 1");
  const std::size_t n = covariances.size();
  const Index p = covariances.front().rows();
  for (const auto& s : covariances) {
    if (s.rows() != p || s.cols() != p) throw DimensionError("solve_joint: dimension mismatch");
  }

  BurnInResult res;
  res.covariances.assign(covariances.begin(), covariances.end());
  res.thetas.assign(n, Matrix::Identity(p, p));
  res.zs.assign(n, Matrix::Zero(p, p));
  std::vector<Matrix> us(n, Matrix::Zero(p, p));

  std::vector<double> chain_in(n), chain_out(n);
  std::vector<Matrix> z_next(n, Matrix::Zero(p, p));
  for (int it = 1; it <= cfg.max_iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      res.thetas[i] = theta_step(covariances[i], res.zs[i], us[i]);
    }
    for (Index c = 0; c < p; ++c) {
      for (Index r = 0; r <= c; ++r) {
        const double l1 = (r == c && !cfg.penalize_diagonal) ? 0.0 : cfg.lambda1;
        for (std::size_t i = 0; i < n; ++i) chain_in[i] = res.thetas[i](r, c) + us[i](r, c);
        fused_lasso_chain(chain_in, l1, cfg.lambda2, chain_out);
        for (std::size_t i = 0; i < n; ++i) {
          z_next[i](r, c) = chain_out[i];
          z_next[i](c, r) = chain_out[i];
        }
      }
    }
    double primal = 0.0, dual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      us[i] += res.thetas[i] - z_next[i];
      primal += (res.thetas[i] - z_next[i]).squaredNorm();
      dual += (z_next[i] - res.zs[i]).squaredNorm();
      res.zs[i] = z_next[i];
    }
    res.iterations_used = it;
    if (!std::isfinite(primal) || !std::isfinite(dual)) {
      throw SolverError("solve_joint: non-finite iterate");
    }
    if (primal < cfg.epsilon && dual < cfg.epsilon) {
      res.converged = true;
      break;
    }
  }
  res.objective = joint_objective(res.zs, res.covariances, cfg);
  return res;
}

BurnInResult burn_in(const Matrix& x, const SolverConfig& cfg, const KernelConfig& kcfg) {
  if (x.rows() < 2) throw std::invalid_argument("burn_in needs at least 2 observations");
  const double width = kcfg.candidate_widths.empty()
                           ? kcfg.width
                           : select_kernel_width(x, kcfg.candidate_widths);
  const auto covs = kernel_covariances(x, width);
  auto res = solve_joint(covs, cfg);
  res.kernel_width = width;
  return res;
}

long aic_degrees_of_freedom(std::span<const Matrix> supports, double zero_tol) {
  if (supports.empty()) return 0;
  const Index p = supports.front().rows();
  long k = 0;
  for (Index c = 0; c < p; ++c) {
    for (Index r = 0; r <= c; ++r) {
      bool ever_nonzero = false;
      for (std::size_t i = 0; i < supports.size(); ++i) {
        if (std::abs(supports[i](r, c)) > zero_tol) ever_nonzero = true;
        if (i > 0 && std::abs(supports[i](r, c) - supports[i - 1](r, c)) > zero_tol) ++k;
      }
      if (ever_nonzero) ++k;
    }
  }
  return k;
}

double aic(std::span<const Matrix> thetas, std::span<const Matrix> supports,
           std::span<const Matrix> covariances, double zero_tol) {
  if (thetas.size() != covariances.size() || supports.size() != thetas.size()) {
    throw DimensionError("aic: sequence lengths differ");
  }
  double log_lik = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    log_lik += linalg::log_det_spd(thetas[i]) - covariances[i].cwiseProduct(thetas[i]).sum();
  }
  return 2.0 * static_cast<double>(aic_degrees_of_freedom(supports, zero_tol)) - 2.0 * log_lik;
}

double aic(const BurnInResult& result, double zero_tol) {
  return aic(result.thetas, result.zs, result.covariances, zero_tol);
}

}  // namespace netstream
