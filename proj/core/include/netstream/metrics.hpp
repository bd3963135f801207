#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "netstream/synth.hpp"
#include "netstream/types.hpp"

namespace netstream {

/// Trace inner-product distance tr(Σ⁻¹ S); equals p when S = Σ.
double trace_distance(const Matrix& sigma_true, const Matrix& s_est);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

/// Precision, recall and F score of an estimated edge set. Conventions:
/// both sets empty gives (1, 1, 1); an empty estimate against a non-empty
/// truth gives precision 0; an empty truth against a non-empty estimate
/// gives recall 1; F is 0 whenever P + R = 0.
Prf prf(const EdgeSet& estimated, const EdgeSet& truth);

/// One estimator run over a dataset, indexed by 0-based row.
struct RunTrace {
  std::vector<EdgeSet> edges;
  /// Optional; enables trace distances when non-empty.
  std::vector<Matrix> covariances;
  /// Optional forgetting-factor trace.
  std::vector<double> r;
  std::vector<int> solver_iters;
  std::vector<double> wall_ms;
};

struct MetricRecord {
  long t = 0;  ///< 1-based time index
  std::size_t segment = 0;
  Prf prf;
  std::optional<double> trace_distance;
  std::optional<double> r;
  int solver_iters = 0;
  double wall_ms = 0.0;
};

struct ScoreOptions {
  /// Plateau = the last `plateau_len` points of each segment.
  long plateau_len = 50;
  /// Window length before/after each change point for mean r_t.
  long r_window = 10;
  /// Recovery = first point after a change whose F reaches this fraction
  /// of the previous segment's plateau mean F.
  double recovery_fraction = 0.9;
};

struct RunSummary {
  std::vector<double> plateau_f;           ///< per segment
  std::vector<double> plateau_trace_distance;  ///< per segment, empty without covariances
  std::vector<std::optional<long>> recovery_time;  ///< per change point
  std::vector<double> r_before;            ///< per change point, empty without r
  std::vector<double> r_after;
  double mean_f = 0.0;
};

struct MetricSeries {
  std::vector<MetricRecord> records;
  RunSummary summary;
};

/// Scores each time point against the active ground-truth segment.
/// Throws DimensionError when the trace length does not match the truth.
MetricSeries score_run(const RunTrace& run, const GroundTruth& truth, const ScoreOptions& opts = {});

/// Comma-separated table with a header row; `label` fills the first column.
void write_metrics_csv(std::ostream& os, const MetricSeries& series, const std::string& label,
                       bool header = true);

/// One JSON object per record, then a final {"summary": ...} object.
void write_metrics_jsonl(std::ostream& os, const MetricSeries& series, const std::string& label);

std::string summary_json(const RunSummary& summary, const std::string& label);

}  // namespace netstream
