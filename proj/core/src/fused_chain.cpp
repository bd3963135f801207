#include "netstream/fused_chain.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace netstream {

double soft_threshold(double x, double lambda) {
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return 0.0;
}

// Condat's direct algorithm. Runs over the input keeping the range
// [vmin, vmax] of admissible levels for the current segment and the dual
// slack (umin, umax); a segment is closed as soon as the slack leaves
// [−λ, λ].
void tv_denoise(std::span<const double> y, double lambda, std::span<double> out) {
  if (out.size() != y.size()) throw std::invalid_argument("tv_denoise: size mismatch");
  if (!(lambda >= 0.0)) throw std::invalid_argument("tv_denoise: lambda must be >= 0");
  const std::size_t n = y.size();
  if (n == 0) return;
  if (lambda == 0.0 || n == 1) {
    if (out.data() != y.data()) std::copy(y.begin(), y.end(), out.begin());
    return;
  }
  // Work on a copy so that `out` may alias `y`.
  const std::vector<double> in(y.begin(), y.end());

  std::size_t k = 0, k0 = 0, kplus = 0, kminus = 0;
  double umin = lambda, umax = -lambda;
  double vmin = in[0] - lambda, vmax = in[0] + lambda;
  const double two_lambda = 2.0 * lambda;
  const double neg_lambda = -lambda;

  for (;;) {
    while (k == n - 1) {
      if (umin < 0.0) {
        do out[k0++] = vmin; while (k0 <= kminus);
        k = kminus = k0;
        vmin = in[k];
        umin = lambda;
        umax = vmin + umin - vmax;
      } else if (umax > 0.0) {
        do out[k0++] = vmax; while (k0 <= kplus);
        k = kplus = k0;
        vmax = in[k];
        umax = neg_lambda;
        umin = vmax + umax - vmin;
      } else {
        vmin += umin / static_cast<double>(k - k0 + 1);
        do out[k0++] = vmin; while (k0 <= k);
        return;
      }
    }
    umin += in[k + 1] - vmin;
    if (umin < neg_lambda) {
      do out[k0++] = vmin; while (k0 <= kminus);
      k = kplus = kminus = k0;
      vmin = in[k];
      vmax = vmin + two_lambda;
      umin = lambda;
      umax = neg_lambda;
      continue;
    }
    umax += in[k + 1] - vmax;
    if (umax > lambda) {
      do out[k0++] = vmax; while (k0 <= kplus);
      k = kplus = kminus = k0;
      vmax = in[k];
      vmin = vmax - two_lambda;
      umin = lambda;
      umax = neg_lambda;
      continue;
    }
    ++k;
    if (umin >= lambda) {
      kminus = k;
      vmin += (umin - lambda) / static_cast<double>(kminus - k0 + 1);
      umin = lambda;
    }
    if (umax <= neg_lambda) {
      kplus = k;
      vmax += (umax + lambda) / static_cast<double>(kplus - k0 + 1);
      umax = neg_lambda;
    }
  }
}

void fused_lasso_chain(std::span<const double> a, double lambda1, double lambda2,
                       std::span<double> out) {
  if (!(lambda1 >= 0.0)) throw std::invalid_argument("fused_lasso_chain: lambda1 must be >= 0");
  tv_denoise(a, lambda2, out);
  for (auto& v : out) v = soft_threshold(v, lambda1);
}

}  // namespace netstream
