#pragma once

#include <optional>

#include "netstream/types.hpp"

namespace netstream::linalg {

/// Largest absolute entry.
double max_abs(const Matrix& m);

/// Replaces m by (m + m^T) / 2.
void symmetrize(Matrix& m);

/// Inverse of a symmetric positive-definite matrix via Cholesky, or nullopt
/// when the factorization fails or a pivot falls below `rel_pivot_floor`
/// times the largest pivot.
std::optional<Matrix> spd_inverse(const Matrix& a, double rel_pivot_floor = 1e-14);

/// log det of a symmetric positive-definite matrix. Throws
/// SingularMatrixError when `a` is not numerically positive definite.
double log_det_spd(const Matrix& a);

/// In-place Sherman-Morrison update: given inv = M^{-1}, overwrite it with
/// (M + u v^T)^{-1}. Returns false (and leaves inv untouched) when
/// |1 + v^T M^{-1} u| < denominator_floor or the result is not finite.
bool sherman_morrison_update(Matrix& inv, const Vector& u, const Vector& v,
                             double denominator_floor = 1e-10);

/// True when the Cholesky factorization of `a` succeeds.
bool is_positive_definite(const Matrix& a);

}  // namespace netstream::linalg
