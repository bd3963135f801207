#pragma once

#include <deque>
#include <string>
#include <string_view>
#include <variant>

#include "netstream/types.hpp"

namespace netstream {

/// Equal weights over the last `h` observations.
struct SlidingWindow {
  int h = 20;
};

/// Exponentially weighted moving average with a constant forgetting factor.
struct FixedForgetting {
  double r = 0.95;
};

/// Forgetting factor tuned online by gradient ascent on the predictive
/// log-likelihood of each incoming observation.
struct AdaptiveForgetting {
  double eta = 0.005;
  double r_init = 0.95;
  double r_min = 0.5;
  double r_max = 0.9999;
};

using ForgettingMode = std::variant<SlidingWindow, FixedForgetting, AdaptiveForgetting>;

/// Which recursion to use for the r-derivative of the effective sample size.
/// kDerived differentiates omega_t = r omega_{t-1} + 1 exactly and adds
/// omega_{t-1}; kAsPrinted adds omega_t instead.
enum class OmegaPrimeVariant { kDerived, kAsPrinted };

struct TrackerOptions {
  /// Ridge anchored at ridge_scale * trace(S) / p + ridge_floor whenever the
  /// inverse is refactorized. Both zero disables the ridge.
  double ridge_scale = 1e-6;
  double ridge_floor = 1e-10;
  /// Full refactorization period for the maintained inverse.
  int refactor_interval = 64;
  /// Rank-one updates whose scale or denominator fall below this magnitude
  /// are replaced by a full refactorization.
  double denominator_floor = 1e-10;
  OmegaPrimeVariant omega_prime_variant = OmegaPrimeVariant::kDerived;
  /// Adaptive mode applies gradient steps only once this many observations
  /// have been absorbed; 0 means p + 1 (the first full-rank covariance).
  long adapt_after = 0;
};

/// Streaming mean/covariance tracker under sliding-window, fixed or adaptive
/// forgetting. The tracker keeps the running mean x̄_t, scatter Π_t,
/// covariance S_t = Π_t − x̄_t x̄_tᵀ, the inverse of the ridged covariance
/// S_t + ρ_t I and, in forgetting modes, derivatives of all of these with
/// respect to the forgetting factor.
///
/// The ridge ρ_t is a pseudo-observation: it is anchored at every full
/// refactorization and decays with the factor (1 − 1/ω_t) in between, so
/// the ridged matrix evolves by exact rank-one updates. Single writer;
/// copies are cheap snapshots for readers.
class ForgettingState {
 public:
  ForgettingState(Index p, ForgettingMode mode, TrackerOptions options = {});

  /// Dispatches on the configured mode.
  void update(const Vector& x);

  void update_sliding(const Vector& x);
  void update_fixed(const Vector& x);
  void update_adaptive(const Vector& x);

  /// −½ log det(S_t + ρI) − ½ (x − x̄_t)ᵀ (S_t + ρI)⁻¹ (x − x̄_t).
  double log_likelihood(const Vector& x) const;

  /// Derivative of log_likelihood(x) with respect to the forgetting factor,
  /// from the stored inverse and derivative trackers.
  double likelihood_gradient(const Vector& x) const;

  /// Re-anchors the ridge and recomputes the inverse by Cholesky.
  void refresh_inverse();

  Index dim() const { return p_; }
  long t() const { return t_; }
  const ForgettingMode& mode() const { return mode_; }
  const TrackerOptions& options() const { return options_; }

  double r() const { return r_; }
  double omega() const { return omega_; }
  const Vector& mean() const { return mean_; }
  const Matrix& scatter() const { return scatter_; }
  const Matrix& covariance() const { return cov_; }
  /// (S_t + ρ_t I)⁻¹. Throws SingularMatrixError when unavailable.
  const Matrix& inverse() const;
  bool has_inverse() const { return has_inverse_; }
  double ridge() const { return ridge_; }
  Matrix ridged_covariance() const;

  double d_omega() const { return d_omega_; }
  const Vector& d_mean() const { return d_mean_; }
  const Matrix& d_scatter() const { return d_scatter_; }
  const Matrix& d_covariance() const { return d_cov_; }
  double d_ridge() const { return d_ridge_; }

  long refactor_count() const { return refactor_count_; }
  long adapt_after() const;

  /// Versioned JSON dump of every field; round-trips bit-exactly.
  std::string serialize() const;
  static ForgettingState deserialize(std::string_view text);

 private:
  void check_observation(const Vector& x) const;
  void advance(const Vector& x, double r, bool track_derivatives);
  void maintain_inverse(const Vector& d, double a);
  void anchor_ridge();
  void factorize();

  Index p_;
  ForgettingMode mode_;
  TrackerOptions options_;

  long t_ = 0;
  double r_ = 1.0;
  double omega_ = 0.0;
  Vector mean_;
  Matrix scatter_;
  Matrix cov_;
  Matrix inv_;
  bool has_inverse_ = false;
  double ridge_ = 0.0;

  double d_omega_ = 0.0;
  Vector d_mean_;
  Matrix d_scatter_;
  Matrix d_cov_;
  double d_ridge_ = 0.0;

  long steps_since_refactor_ = 0;
  long refactor_count_ = 0;
  std::deque<Vector> window_;
};

}  // namespace netstream
