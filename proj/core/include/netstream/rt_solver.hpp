#pragma once

#include <vector>

#include "netstream/types.hpp"

namespace netstream {

/// Penalties and stopping rule for the real-time sparse, temporally
/// homogeneous precision problem
///   f(Θ) = −log det Θ + tr(SΘ) + λ1‖Θ‖₁ + λ2‖Θ − Θ_prev‖₁.
struct SolverConfig {
  double lambda1 = 0.1;
  double lambda2 = 0.05;
  /// Stop when ‖Θ − Z‖²_F < epsilon and ‖Z − Z_prev‖²_F < epsilon.
  double epsilon = 1e-4;
  int max_iters = 500;
  /// Entries of Z with magnitude at or below this count as structural zeros.
  double zero_tol = 1e-8;
  /// When false the diagonal is excluded from the λ1 penalty.
  bool penalize_diagonal = true;

  void validate() const;
};

/// ADMM iterate. Theta is positive definite; Z carries the exact zeros that
/// define the reported network; U is the scaled dual variable.
struct NetworkEstimate {
  Matrix theta;
  Matrix z;
  Matrix u;
  int iterations_used = 0;
  bool converged = false;
  /// Objective evaluated at Z (+inf when Z is not positive definite).
  double objective = 0.0;
};

/// Θ-update: V diag(½(−d + √(d² + 4))) Vᵀ where V diag(d) Vᵀ = S − (Z − U).
Matrix theta_step(const Matrix& s, const Matrix& z, const Matrix& u);

/// argmin_x ½(a − x)² + λ1|x| + λ2|x − b|, exact. Ties go to the smaller
/// |x|, then to the candidate closest to b.
double z_step_scalar(double a, double b, double lambda1, double lambda2);

/// Entrywise Z-update on the upper triangle, mirrored.
Matrix z_step(const Matrix& theta, const Matrix& u, const Matrix& theta_prev,
              const SolverConfig& cfg);

/// f(Θ); +inf when Θ is not positive definite.
double rt_objective(const Matrix& theta, const Matrix& s, const Matrix& theta_prev,
                    const SolverConfig& cfg);

/// Runs ADMM from Θ⁰ = I, Z⁰ = U⁰ = 0, or from `warm` when given.
/// Non-convergence is reported through NetworkEstimate::converged.
NetworkEstimate solve(const Matrix& s, const Matrix& theta_prev, const SolverConfig& cfg,
                      const NetworkEstimate* warm = nullptr);

/// Off-diagonal pairs (i < j) with |Z_ij| > zero_tol, weighted by Z_ij.
std::vector<Edge> edge_set(const NetworkEstimate& est, const SolverConfig& cfg);
std::vector<Edge> edge_set(const Matrix& z, double zero_tol);

EdgeSet support(const std::vector<Edge>& edges);

}  // namespace netstream
