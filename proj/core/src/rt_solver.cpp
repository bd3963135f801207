#include "netstream/rt_solver.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "netstream/linalg.hpp"

namespace netstream {

void SolverConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw std::invalid_argument("penalties must be >= 0");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(zero_tol >= 0.0)) throw std::invalid_argument("zero_tol must be >= 0");
}

Matrix theta_step(const Matrix& s, const Matrix& z, const Matrix& u) {
  if (s.rows() != s.cols() || z.rows() != s.rows() || u.rows() != s.rows() ||
      z.cols() != s.cols() || u.cols() != s.cols()) {
    throw DimensionError("theta_step: dimension mismatch");
  }
  Matrix m = s - (z - u);
  linalg::symmetrize(m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.info() != Eigen::Success) throw SolverError("theta_step: eigendecomposition failed");
  const Vector& d = eig.eigenvalues();
  const Vector mapped = 0.5 * (-d.array() + (d.array().square() + 4.0).sqrt()).matrix();
  const Matrix& v = eig.eigenvectors();
  Matrix theta = v * mapped.asDiagonal() * v.transpose();
  linalg::symmetrize(theta);
  return theta;
}

double z_step_scalar(double a, double b, double lambda1, double lambda2) {
  const auto objective = [&](double x) {
    const double r = a - x;
    return 0.5 * r * r + lambda1 * std::abs(x) + lambda2 * std::abs(x - b);
  };
  // The objective is piecewise quadratic with kinks at 0 and b, so the
  // minimizer is a kink or the stationary point of one of the pieces.
  const std::array<double, 6> candidates = {
      0.0,
      b,
      a - lambda1 - lambda2,
      a - lambda1 + lambda2,
      a + lambda1 - lambda2,
      a + lambda1 + lambda2,
  };
  double best = candidates[0];
  double best_value = objective(best);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double x = candidates[i];
    const double value = objective(x);
    if (value < best_value) {
      best = x;
      best_value = value;
    } else if (value == best_value) {
      const bool sparser = std::abs(x) < std::abs(best);
      const bool closer = std::abs(x) == std::abs(best) && std::abs(x - b) < std::abs(best - b);
      if (sparser || closer) best = x;
    }
  }
  return best;
}

Matrix z_step(const Matrix& theta, const Matrix& u, const Matrix& theta_prev,
              const SolverConfig& cfg) {
  const Index p = theta.rows();
  if (theta.cols() != p || u.rows() != p || u.cols() != p || theta_prev.rows() != p ||
      theta_prev.cols() != p) {
    throw DimensionError("z_step: dimension mismatch");
  }
  Matrix z(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double l1 = (i == j && !cfg.penalize_diagonal) ? 0.0 : cfg.lambda1;
      const double a = 0.5 * ((theta(i, j) + u(i, j)) + (theta(j, i) + u(j, i)));
      const double value = z_step_scalar(a, theta_prev(i, j), l1, cfg.lambda2);
      z(i, j) = value;
      z(j, i) = value;
    }
  }
  return z;
}

double rt_objective(const Matrix& theta, const Matrix& s, const Matrix& theta_prev,
                    const SolverConfig& cfg) {
  double log_det = 0.0;
  try {
    log_det = linalg::log_det_spd(theta);
  } catch (const SingularMatrixError&) {
    return std::numeric_limits<double>::infinity();
  }
  double l1 = theta.cwiseAbs().sum();
  if (!cfg.penalize_diagonal) l1 -= theta.diagonal().cwiseAbs().sum();
  const double fused = (theta - theta_prev).cwiseAbs().sum();
  return -log_det + (s.cwiseProduct(theta)).sum() + cfg.lambda1 * l1 + cfg.lambda2 * fused;
}

NetworkEstimate solve(const Matrix& s, const Matrix& theta_prev, const SolverConfig& cfg,
                      const NetworkEstimate* warm) {
  cfg.validate();
  const Index p = s.rows();
  if (s.cols() != p || theta_prev.rows() != p || theta_prev.cols() != p) {
    throw DimensionError("solve: dimension mismatch");
  }

  NetworkEstimate est;
  if (warm != nullptr && warm->theta.rows() == p && warm->z.rows() == p && warm->u.rows() == p) {
    est.theta = warm->theta;
    est.z = warm->z;
    est.u = warm->u;
  } else {
    est.theta = Matrix::Identity(p, p);
    est.z = Matrix::Zero(p, p);
    est.u = Matrix::Zero(p, p);
  }

  for (int it = 1; it <= cfg.max_iters; ++it) {
    est.theta = theta_step(s, est.z, est.u);
    Matrix z_next = z_step(est.theta, est.u, theta_prev, cfg);
    est.u += est.theta - z_next;
    const double primal = (est.theta - z_next).squaredNorm();
    const double dual = (z_next - est.z).squaredNorm();
    est.z = std::move(z_next);
    est.iterations_used = it;
    if (!std::isfinite(primal) || !std::isfinite(dual)) {
      throw SolverError("solve: non-finite iterate");
    }
    if (primal < cfg.epsilon && dual < cfg.epsilon) {
      est.converged = true;
      break;
    }
  }
  est.objective = rt_objective(est.z, s, theta_prev, cfg);
  return est;
}

std::vector<Edge> edge_set(const Matrix& z, double zero_tol) {
  std::vector<Edge> edges;
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index j = i + 1; j < z.cols(); ++j) {
      if (std::abs(z(i, j)) > zero_tol) {
        edges.push_back({static_cast<int>(i), static_cast<int>(j), z(i, j)});
      }
    }
  }
  return edges;
}

std::vector<Edge> edge_set(const NetworkEstimate& est, const SolverConfig& cfg) {
  return edge_set(est.z, cfg.zero_tol);
}

EdgeSet support(const std::vector<Edge>& edges) {
  EdgeSet out;
  for (const auto& e : edges) out.emplace(e.i, e.j);
  return out;
}

}  // namespace netstream
