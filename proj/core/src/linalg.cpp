#include "netstream/linalg.hpp"

#include <cmath>

namespace netstream::linalg {

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

void symmetrize(Matrix& m) {
  const Matrix t = m.transpose();
  m = 0.5 * (m + t);
}

std::optional<Matrix> spd_inverse(const Matrix& a, double rel_pivot_floor) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Vector pivots = llt.matrixLLT().diagonal().cwiseAbs2();
  if (pivots.size() > 0 &&
      !(pivots.minCoeff() > rel_pivot_floor * pivots.maxCoeff())) {
    return std::nullopt;
  }
  Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  if (!inv.allFinite()) return std::nullopt;
  symmetrize(inv);
  return inv;
}

double log_det_spd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("log_det_spd: matrix is not positive definite");
  }
  const Matrix& l = llt.matrixLLT();
  double sum = 0.0;
  for (Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0)) {
      throw SingularMatrixError("log_det_spd: zero pivot");
    }
    sum += std::log(l(i, i));
  }
  return 2.0 * sum;
}

bool sherman_morrison_update(Matrix& inv, const Vector& u, const Vector& v,
                             double denominator_floor) {
  const Vector inv_u = inv * u;
  const Vector inv_t_v = inv.transpose() * v;
  const double denom = 1.0 + v.dot(inv_u);
  if (!std::isfinite(denom) || std::abs(denom) < denominator_floor) return false;
  Matrix next = inv - (inv_u * inv_t_v.transpose()) / denom;
  if (!next.allFinite()) return false;
  inv = std::move(next);
  return true;
}

bool is_positive_definite(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  return llt.info() == Eigen::Success;
}

}  // namespace netstream::linalg
