#include "netstream/streaming_covariance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "netstream/linalg.hpp"
#include "json_matrix.hpp"

namespace netstream {
namespace {

constexpr int kCheckpointVersion = 1;

void validate_mode(const ForgettingMode& mode) {
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, SlidingWindow>) {
          if (m.h < 2) throw std::invalid_argument("sliding window needs h >= 2");
        } else if constexpr (std::is_same_v<M, FixedForgetting>) {
          if (!(m.r > 0.0 && m.r <= 1.0)) {
            throw std::invalid_argument("forgetting factor must lie in (0, 1]");
          }
        } else {
          if (!(m.r_min > 0.0 && m.r_min <= m.r_max && m.r_max <= 1.0)) {
            throw std::invalid_argument("adaptive forgetting needs 0 < r_min <= r_max <= 1");
          }
          if (!(m.r_init >= m.r_min && m.r_init <= m.r_max)) {
            throw std::invalid_argument("r_init must lie in [r_min, r_max]");
          }
          if (!(m.eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
        }
      },
      mode);
}

double initial_factor(const ForgettingMode& mode) {
  if (const auto* f = std::get_if<FixedForgetting>(&mode)) return f->r;
  if (const auto* a = std::get_if<AdaptiveForgetting>(&mode)) return a->r_init;
  return 1.0;
}

nlohmann::json mode_to_json(const ForgettingMode& mode) {
  return std::visit(
      [](const auto& m) -> nlohmann::json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, SlidingWindow>) {
          return {{"kind", "sliding"}, {"h", m.h}};
        } else if constexpr (std::is_same_v<M, FixedForgetting>) {
          return {{"kind", "fixed"}, {"r", m.r}};
        } else {
          return {{"kind", "adaptive"},
                  {"eta", m.eta},
                  {"r_init", m.r_init},
                  {"r_min", m.r_min},
                  {"r_max", m.r_max}};
        }
      },
      mode);
}

ForgettingMode mode_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "sliding") return SlidingWindow{j.at("h").get<int>()};
  if (kind == "fixed") return FixedForgetting{j.at("r").get<double>()};
  if (kind == "adaptive") {
    return AdaptiveForgetting{j.at("eta").get<double>(), j.at("r_init").get<double>(),
                              j.at("r_min").get<double>(), j.at("r_max").get<double>()};
  }
  throw std::invalid_argument("unknown forgetting mode: " + kind);
}

}  // namespace

ForgettingState::ForgettingState(Index p, ForgettingMode mode, TrackerOptions options)
    : p_(p), mode_(mode), options_(options) {
  if (p < 1) throw DimensionError("dimension must be >= 1");
  validate_mode(mode_);
  if (options_.refactor_interval < 1) {
    throw std::invalid_argument("refactor_interval must be >= 1");
  }
  if (options_.ridge_scale < 0.0 || options_.ridge_floor < 0.0) {
    throw std::invalid_argument("ridge parameters must be >= 0");
  }
  r_ = initial_factor(mode_);
  mean_ = Vector::Zero(p);
  scatter_ = Matrix::Zero(p, p);
  cov_ = Matrix::Zero(p, p);
  inv_ = Matrix::Zero(p, p);
  d_mean_ = Vector::Zero(p);
  d_scatter_ = Matrix::Zero(p, p);
  d_cov_ = Matrix::Zero(p, p);
}

void ForgettingState::check_observation(const Vector& x) const {
  if (x.size() != p_) {
    throw DimensionError("observation has " + std::to_string(x.size()) +
                         " entries, stream dimension is " + std::to_string(p_));
  }
  if (!x.allFinite()) throw std::invalid_argument("observation contains non-finite values");
}

void ForgettingState::update(const Vector& x) {
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, SlidingWindow>) {
          update_sliding(x);
        } else if constexpr (std::is_same_v<M, FixedForgetting>) {
          update_fixed(x);
        } else {
          update_adaptive(x);
        }
      },
      mode_);
}

void ForgettingState::update_sliding(const Vector& x) {
  const auto* mode = std::get_if<SlidingWindow>(&mode_);
  if (mode == nullptr) throw std::logic_error("update_sliding on a non-sliding tracker");
  check_observation(x);

  window_.push_back(x);
  while (static_cast<int>(window_.size()) > mode->h) window_.pop_front();
  ++t_;

  const double n = static_cast<double>(window_.size());
  mean_.setZero();
  for (const auto& obs : window_) mean_ += obs;
  mean_ /= n;
  cov_.setZero();
  for (const auto& obs : window_) {
    const Vector c = obs - mean_;
    cov_.noalias() += c * c.transpose();
  }
  cov_ /= n;
  scatter_ = cov_ + mean_ * mean_.transpose();
  omega_ = n;
  factorize();
}

void ForgettingState::update_fixed(const Vector& x) {
  if (!std::holds_alternative<FixedForgetting>(mode_)) {
    throw std::logic_error("update_fixed on a non-fixed tracker");
  }
  check_observation(x);
  advance(x, r_, true);
}

void ForgettingState::update_adaptive(const Vector& x) {
  const auto* mode = std::get_if<AdaptiveForgetting>(&mode_);
  if (mode == nullptr) throw std::logic_error("update_adaptive on a non-adaptive tracker");
  check_observation(x);

  if (mode->eta > 0.0 && t_ >= adapt_after()) {
    if (!has_inverse_) {
      throw SingularMatrixError("covariance not invertible at t=" + std::to_string(t_ + 1));
    }
    const double g = likelihood_gradient(x);
    if (!std::isfinite(g)) {
      throw SingularMatrixError("non-finite likelihood gradient at t=" + std::to_string(t_ + 1));
    }
    r_ = std::clamp(r_ + mode->eta * g, mode->r_min, mode->r_max);
  }
  advance(x, r_, true);
}

long ForgettingState::adapt_after() const {
  return options_.adapt_after > 0 ? options_.adapt_after : static_cast<long>(p_) + 1;
}

void ForgettingState::advance(const Vector& x, double r, bool track_derivatives) {
  ++t_;
  const double omega_prev = omega_;
  omega_ = r * omega_prev + 1.0;
  const double a = 1.0 / omega_;
  const Vector d = x - mean_;

  double c = 0.0;
  if (track_derivatives) {
    const double d_omega_next =
        r * d_omega_ +
        (options_.omega_prime_variant == OmegaPrimeVariant::kDerived ? omega_prev : omega_);
    c = d_omega_next / (omega_ * omega_);
    d_mean_ = (1.0 - a) * d_mean_ - c * d;
    d_scatter_ = (1.0 - a) * d_scatter_ + c * (scatter_ - x * x.transpose());
    d_omega_ = d_omega_next;
  }

  mean_ = (1.0 - a) * mean_ + a * x;
  scatter_ = (1.0 - a) * scatter_ + a * (x * x.transpose());
  linalg::symmetrize(scatter_);
  cov_ = scatter_ - mean_ * mean_.transpose();
  linalg::symmetrize(cov_);

  if (track_derivatives) {
    d_cov_ = d_scatter_ - d_mean_ * mean_.transpose() - mean_ * d_mean_.transpose();
    linalg::symmetrize(d_cov_);
  }

  ++steps_since_refactor_;
  const bool startup = t_ <= static_cast<long>(p_) + 1;
  const bool periodic = steps_since_refactor_ >= options_.refactor_interval;
  const bool degenerate_scale = (1.0 - a) < options_.denominator_floor;
  if (!startup && !periodic && !degenerate_scale && has_inverse_) {
    // S_t + ρ_t I = (1 − a)(S_{t−1} + ρ_{t−1} I) + a(1 − a) d dᵀ with ρ_t = (1 − a) ρ_{t−1}.
    Matrix candidate = inv_ / (1.0 - a);
    if (linalg::sherman_morrison_update(candidate, (a * (1.0 - a)) * d, d,
                                        options_.denominator_floor)) {
      const double ridge_prev = ridge_;
      ridge_ = (1.0 - a) * ridge_;
      d_ridge_ = (1.0 - a) * d_ridge_ + c * ridge_prev;
      linalg::symmetrize(candidate);
      inv_ = std::move(candidate);
      return;
    }
  }
  factorize();
}

void ForgettingState::anchor_ridge() {
  const double p = static_cast<double>(p_);
  ridge_ = options_.ridge_scale * cov_.trace() / p + options_.ridge_floor;
  d_ridge_ = options_.ridge_scale * d_cov_.trace() / p;
}

void ForgettingState::factorize() {
  anchor_ridge();
  steps_since_refactor_ = 0;
  ++refactor_count_;
  auto inv = linalg::spd_inverse(ridged_covariance());
  if (inv) {
    inv_ = std::move(*inv);
    has_inverse_ = true;
    return;
  }
  has_inverse_ = false;
  if (ridge_ > 0.0) {
    throw SingularMatrixError("ridged covariance is not positive definite at t=" +
                              std::to_string(t_));
  }
}

void ForgettingState::refresh_inverse() { factorize(); }

Matrix ForgettingState::ridged_covariance() const {
  Matrix a = cov_;
  a.diagonal().array() += ridge_;
  return a;
}

const Matrix& ForgettingState::inverse() const {
  if (!has_inverse_) {
    throw SingularMatrixError("covariance is singular at t=" + std::to_string(t_) +
                              " and the ridge is disabled");
  }
  return inv_;
}

double ForgettingState::log_likelihood(const Vector& x) const {
  check_observation(x);
  const Matrix& inv = inverse();
  const Vector e = x - mean_;
  return -0.5 * linalg::log_det_spd(ridged_covariance()) - 0.5 * e.dot(inv * e);
}

double ForgettingState::likelihood_gradient(const Vector& x) const {
  if (std::holds_alternative<SlidingWindow>(mode_)) {
    throw std::logic_error("likelihood_gradient needs a forgetting-factor tracker");
  }
  check_observation(x);
  const Matrix& inv = inverse();
  const Vector e = x - mean_;
  const Vector v = inv * e;
  // A = S + ρI, A' = S' + ρ'I.
  const double trace_term = (inv.cwiseProduct(d_cov_)).sum() + d_ridge_ * inv.trace();
  const double quad_term = v.dot(d_cov_ * v) + d_ridge_ * v.squaredNorm();
  return -0.5 * trace_term + d_mean_.dot(v) + 0.5 * quad_term;
}

std::string ForgettingState::serialize() const {
  using detail::to_json;
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["p"] = p_;
  j["mode"] = mode_to_json(mode_);
  j["options"] = {{"ridge_scale", options_.ridge_scale},
                  {"ridge_floor", options_.ridge_floor},
                  {"refactor_interval", options_.refactor_interval},
                  {"denominator_floor", options_.denominator_floor},
                  {"omega_prime_variant",
                   options_.omega_prime_variant == OmegaPrimeVariant::kDerived ? "derived"
                                                                               : "printed"},
                  {"adapt_after", options_.adapt_after}};
  j["t"] = t_;
  j["r"] = r_;
  j["omega"] = omega_;
  j["mean"] = to_json(mean_);
  j["scatter"] = to_json(scatter_);
  j["cov"] = to_json(cov_);
  j["inv"] = to_json(inv_);
  j["has_inverse"] = has_inverse_;
  j["ridge"] = ridge_;
  j["d_omega"] = d_omega_;
  j["d_mean"] = to_json(d_mean_);
  j["d_scatter"] = to_json(d_scatter_);
  j["d_cov"] = to_json(d_cov_);
  j["d_ridge"] = d_ridge_;
  j["steps_since_refactor"] = steps_since_refactor_;
  j["refactor_count"] = refactor_count_;
  nlohmann::json window = nlohmann::json::array();
  for (const auto& obs : window_) window.push_back(to_json(obs));
  j["window"] = std::move(window);
  return j.dump();
}

ForgettingState ForgettingState::deserialize(std::string_view text) {
  using detail::matrix_from_json;
  using detail::vector_from_json;
  const auto j = nlohmann::json::parse(text);
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw std::invalid_argument("unsupported tracker checkpoint version");
  }
  const auto& o = j.at("options");
  TrackerOptions options;
  options.ridge_scale = o.at("ridge_scale").get<double>();
  options.ridge_floor = o.at("ridge_floor").get<double>();
  options.refactor_interval = o.at("refactor_interval").get<int>();
  options.denominator_floor = o.at("denominator_floor").get<double>();
  options.omega_prime_variant = o.at("omega_prime_variant").get<std::string>() == "derived"
                                    ? OmegaPrimeVariant::kDerived
                                    : OmegaPrimeVariant::kAsPrinted;
  options.adapt_after = o.at("adapt_after").get<long>();

  ForgettingState s(j.at("p").get<Index>(), mode_from_json(j.at("mode")), options);
  s.t_ = j.at("t").get<long>();
  s.r_ = j.at("r").get<double>();
  s.omega_ = j.at("omega").get<double>();
  s.mean_ = vector_from_json(j.at("mean"));
  s.scatter_ = matrix_from_json(j.at("scatter"));
  s.cov_ = matrix_from_json(j.at("cov"));
  s.inv_ = matrix_from_json(j.at("inv"));
  s.has_inverse_ = j.at("has_inverse").get<bool>();
  s.ridge_ = j.at("ridge").get<double>();
  s.d_omega_ = j.at("d_omega").get<double>();
  s.d_mean_ = vector_from_json(j.at("d_mean"));
  s.d_scatter_ = matrix_from_json(j.at("d_scatter"));
  s.d_cov_ = matrix_from_json(j.at("d_cov"));
  s.d_ridge_ = j.at("d_ridge").get<double>();
  s.steps_since_refactor_ = j.at("steps_since_refactor").get<long>();
  s.refactor_count_ = j.at("refactor_count").get<long>();
  for (const auto& obs : j.at("window")) s.window_.push_back(vector_from_json(obs));
  return s;
}

}  // namespace netstream
