#pragma once

#include <span>

namespace netstream {

/// Exact 1-D total-variation denoising (taut-string equivalent, direct
/// method): out = argmin_z ½‖y − z‖² + lambda Σ|z_{i+1} − z_i|.
/// `out` may alias `y`.
void tv_denoise(std::span<const double> y, double lambda, std::span<double> out);

/// Fused lasso signal approximator:
///   argmin_z ½‖a − z‖² + lambda1 Σ|z_i| + lambda2 Σ|z_{i+1} − z_i|,
/// computed as TV denoising at lambda2 followed by soft-thresholding at lambda1.
void fused_lasso_chain(std::span<const double> a, double lambda1, double lambda2,
                       std::span<double> out);

double soft_threshold(double x, double lambda);

}  // namespace netstream
