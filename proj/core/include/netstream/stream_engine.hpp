#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netstream/metrics.hpp"
#include "netstream/offline_single.hpp"
#include "netstream/rt_solver.hpp"
#include "netstream/streaming_covariance.hpp"

namespace netstream {

struct EngineConfig {
  ForgettingMode mode = AdaptiveForgetting{};
  TrackerOptions tracker;
  SolverConfig solver;
  /// Observations solved jointly offline before streaming starts; 0 skips
  /// the burn-in (the first streaming solve then has no temporal penalty).
  int burn_in_n = 15;
  KernelConfig kernel;
  /// Start each ADMM solve from the previous (Θ, Z, U).
  bool warm_start = true;
};

/// Output for one observation.
struct StreamRecord {
  long t = 0;                ///< 1-based
  std::optional<double> r;   ///< forgetting factor; empty for sliding windows
  double omega = 0.0;
  std::vector<Edge> edges;
  bool converged = false;
  int iters = 0;
  double wall_ms = 0.0;
  double trace_s = 0.0;
  Matrix z;           ///< estimated sparse precision
  Matrix covariance;  ///< S_t used for the solve
  bool burn_in = false;
};

/// Real-time estimator: collects the burn-in block, solves it jointly, then
/// per observation updates the covariance tracker and solves the real-time
/// problem against the previous estimate. Single writer.
class StreamEngine {
 public:
  StreamEngine(Index p, EngineConfig cfg);

  /// Absorbs one observation. Returns nothing while the burn-in block is
  /// filling, the whole burn-in block when it completes, and exactly one
  /// record per observation afterwards.
  std::vector<StreamRecord> push(const Vector& x);

  Index dim() const { return p_; }
  long observations() const { return t_; }
  bool in_burn_in() const { return t_ < cfg_.burn_in_n; }
  const EngineConfig& config() const { return cfg_; }
  const ForgettingState& tracker() const { return tracker_; }
  const Matrix& theta_prev() const { return theta_prev_; }

  /// Versioned JSON snapshot of the full engine state and configuration.
  std::string checkpoint() const;
  static StreamEngine restore(std::string_view text);

 private:
  std::vector<StreamRecord> finish_burn_in(double tracker_ms);

  Index p_;
  EngineConfig cfg_;
  ForgettingState tracker_;
  long t_ = 0;
  std::vector<Vector> burn_rows_;
  /// Tracker snapshots for the burn-in records: r, omega, S.
  std::vector<StreamRecord> burn_meta_;
  Matrix theta_prev_;
  std::optional<NetworkEstimate> last_;
};

struct RecordFormat {
  bool include_matrices = false;
  bool omit_timing = false;
  /// When set, precision/recall/F against the active segment are appended.
  const GroundTruth* truth = nullptr;
};

/// JSON object with fields in fixed order:
/// t, r_t, omega_t, edges, converged, iters, wall_ms, trace_of_S
/// [, Z, S] [, precision, recall, f_score].
std::string to_json_line(const StreamRecord& rec, const RecordFormat& fmt = {});

/// Parses a JSON-lines run output back into a RunTrace (edges, r, iters,
/// wall_ms and S when present). Records are ordered by t.
RunTrace read_run_trace(std::istream& is, double zero_tol = 0.0);

}  // namespace netstream
