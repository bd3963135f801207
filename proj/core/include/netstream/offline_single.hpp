#pragma once

#include <span>
#include <vector>

#include "netstream/rt_solver.hpp"
#include "netstream/types.hpp"

namespace netstream {

struct KernelConfig {
  /// Gaussian kernel bandwidth in observations.
  double width = 3.0;
  /// When non-empty, burn_in picks the width from this list by
  /// leave-one-out log-likelihood instead of using `width`.
  std::vector<double> candidate_widths;
};

/// Solution of the joint problem over a block of T covariances
///   Σ_i −log det Θ_i + tr(S_i Θ_i) + λ1 Σ_i ‖Θ_i‖₁ + λ2 Σ_{i≥2} ‖Θ_i − Θ_{i−1}‖₁.
struct BurnInResult {
  std::vector<Matrix> thetas;
  /// Sparse splitting variables; supports are read from these.
  std::vector<Matrix> zs;
  std::vector<Matrix> covariances;
  double objective = 0.0;
  int iterations_used = 0;
  bool converged = false;
  double kernel_width = 0.0;
};

/// Gaussian-kernel weighted covariances S_i for each row i of the T×p
/// observation matrix `x`.
std::vector<Matrix> kernel_covariances(const Matrix& x, double width);

/// Sum over i of the Gaussian log-density of x_i under the kernel mean and
/// covariance computed with x_i's own weight removed.
double leave_one_out_log_likelihood(const Matrix& x, double width);

/// Candidate with the largest leave-one-out log-likelihood (first on ties).
double select_kernel_width(const Matrix& x, std::span<const double> candidates);

/// Joint objective at the given sequence; +inf if any Θ_i is not PD.
double joint_objective(std::span<const Matrix> thetas, std::span<const Matrix> covariances,
                       const SolverConfig& cfg);

/// ADMM over the block: independent Θ-steps per time point, and a Z-step
/// that decomposes per matrix entry into a fused lasso chain over time.
BurnInResult solve_joint(std::span<const Matrix> covariances, const SolverConfig& cfg);

/// kernel_covariances followed by solve_joint.
BurnInResult burn_in(const Matrix& x, const SolverConfig& cfg, const KernelConfig& kcfg);

/// AIC = 2K − 2 Σ_i (log det Θ_i − tr(S_i Θ_i)), where K counts the distinct
/// upper-triangular positions that are nonzero anywhere in `supports` plus
/// the number of position changes between consecutive supports matrices.
double aic(std::span<const Matrix> thetas, std::span<const Matrix> supports,
           std::span<const Matrix> covariances, double zero_tol);
double aic(const BurnInResult& result, double zero_tol);

/// Degrees of freedom K used by aic().
long aic_degrees_of_freedom(std::span<const Matrix> supports, double zero_tol);

}  // namespace netstream
