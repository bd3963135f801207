#include "netstream/metrics.hpp"

#include <algorithm>
#include <ostream>

#include <json.hpp>

#include "netstream/io.hpp"

namespace netstream {

double trace_distance(const Matrix& sigma_true, const Matrix& s_est) {
  if (sigma_true.rows() != s_est.rows() || sigma_true.cols() != s_est.cols() ||
      sigma_true.rows() != sigma_true.cols()) {
    throw DimensionError("trace_distance: dimension mismatch");
  }
  Eigen::LLT<Matrix> llt(sigma_true);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("trace_distance: true covariance is not positive definite");
  }
  return llt.solve(s_est).trace();
}

Prf prf(const EdgeSet& estimated, const EdgeSet& truth) {
  if (estimated.empty() && truth.empty()) return {1.0, 1.0, 1.0};
  std::size_t hits = 0;
  for (const auto& e : estimated) hits += truth.count(e);
  Prf out;
  out.precision = estimated.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(estimated.size());
  out.recall = truth.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  const double sum = out.precision + out.recall;
  out.f_score = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

MetricSeries score_run(const RunTrace& run, const GroundTruth& truth, const ScoreOptions& opts) {
  const long n = truth.total_length();
  const auto check = [&](std::size_t size, const char* what) {
    if (size != 0 && static_cast<long>(size) != n) {
      throw DimensionError(std::string("score_run: ") + what + " has " + std::to_string(size) +
                           " entries, ground truth has " + std::to_string(n));
    }
  };
  if (static_cast<long>(run.edges.size()) != n) {
    throw DimensionError("score_run: edge sequence has " + std::to_string(run.edges.size()) +
                         " entries, ground truth has " + std::to_string(n));
  }
  check(run.covariances.size(), "covariance sequence");
  check(run.r.size(), "forgetting trace");
  check(run.solver_iters.size(), "iteration trace");
  check(run.wall_ms.size(), "timing trace");

  std::vector<EdgeSet> truth_edges;
  for (const auto& seg : truth.segments) truth_edges.push_back(seg.graph.edge_set());

  MetricSeries series;
  series.records.reserve(static_cast<std::size_t>(n));
  double f_total = 0.0;
  for (long t = 0; t < n; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    MetricRecord rec;
    rec.t = t + 1;
    rec.segment = truth.segment_at(t);
    rec.prf = prf(run.edges[ut], truth_edges[rec.segment]);
    if (!run.covariances.empty()) {
      rec.trace_distance = trace_distance(truth.segments[rec.segment].covariance, run.covariances[ut]);
    }
    if (!run.r.empty()) rec.r = run.r[ut];
    if (!run.solver_iters.empty()) rec.solver_iters = run.solver_iters[ut];
    if (!run.wall_ms.empty()) rec.wall_ms = run.wall_ms[ut];
    f_total += rec.prf.f_score;
    series.records.push_back(rec);
  }

  RunSummary& sum = series.summary;
  sum.mean_f = n > 0 ? f_total / static_cast<double>(n) : 0.0;
  for (const auto& seg : truth.segments) {
    const long len = std::min(opts.plateau_len, seg.length);
    double f = 0.0, d = 0.0;
    for (long t = seg.end() - len; t < seg.end(); ++t) {
      const auto& rec = series.records[static_cast<std::size_t>(t)];
      f += rec.prf.f_score;
      if (rec.trace_distance) d += *rec.trace_distance;
    }
    sum.plateau_f.push_back(len > 0 ? f / static_cast<double>(len) : 0.0);
    if (!run.covariances.empty()) sum.plateau_trace_distance.push_back(len > 0 ? d / static_cast<double>(len) : 0.0);
  }
  for (std::size_t s = 1; s < truth.segments.size(); ++s) {
    const auto& seg = truth.segments[s];
    const long change = seg.start;
    const double target = opts.recovery_fraction * sum.plateau_f[s - 1];
    std::optional<long> recovery;
    for (long t = change; t < seg.end(); ++t) {
      if (series.records[static_cast<std::size_t>(t)].prf.f_score >= target) {
        recovery = t - change;
        break;
      }
    }
    sum.recovery_time.push_back(recovery);
    if (!run.r.empty()) {
      const long lo = std::max(0L, change - opts.r_window);
      const long hi = std::min(n, change + opts.r_window);
      double before = 0.0, after = 0.0;
      for (long t = lo; t < change; ++t) before += run.r[static_cast<std::size_t>(t)];
      for (long t = change; t < hi; ++t) after += run.r[static_cast<std::size_t>(t)];
      sum.r_before.push_back(change > lo ? before / static_cast<double>(change - lo) : 0.0);
      sum.r_after.push_back(hi > change ? after / static_cast<double>(hi - change) : 0.0);
    }
  }
  return series;
}

void write_metrics_csv(std::ostream& os, const MetricSeries& series, const std::string& label,
                       bool header) {
  if (header) {
    os << "run,t,segment,precision,recall,f_score,trace_distance,r_t,solver_iters,wall_ms\n";
  }
  for (const auto& rec : series.records) {
    os << label << ',' << rec.t << ',' << rec.segment << ',' << io::format_double(rec.prf.precision)
       << ',' << io::format_double(rec.prf.recall) << ',' << io::format_double(rec.prf.f_score) << ','
       << (rec.trace_distance ? io::format_double(*rec.trace_distance) : "") << ','
       << (rec.r ? io::format_double(*rec.r) : "") << ',' << rec.solver_iters << ','
       << io::format_double(rec.wall_ms) << '\n';
  }
}

namespace {

nlohmann::ordered_json summary_object(const RunSummary& s, const std::string& label) {
  nlohmann::ordered_json j;
  j["run"] = label;
  j["mean_f"] = s.mean_f;
  j["plateau_f"] = s.plateau_f;
  j["plateau_trace_distance"] = s.plateau_trace_distance;
  nlohmann::ordered_json rec = nlohmann::ordered_json::array();
  for (const auto& r : s.recovery_time) {
    if (r) rec.push_back(*r); else rec.push_back(nullptr);
  }
  j["recovery_time"] = std::move(rec);
  j["r_before"] = s.r_before;
  j["r_after"] = s.r_after;
  return j;
}

}  // namespace

std::string summary_json(const RunSummary& summary, const std::string& label) {
  nlohmann::ordered_json j;
  j["summary"] = summary_object(summary, label);
  return j.dump();
}

void write_metrics_jsonl(std::ostream& os, const MetricSeries& series, const std::string& label) {
  for (const auto& rec : series.records) {
    nlohmann::ordered_json j;
    j["run"] = label;
    j["t"] = rec.t;
    j["segment"] = rec.segment;
    j["precision"] = rec.prf.precision;
    j["recall"] = rec.prf.recall;
    j["f_score"] = rec.prf.f_score;
    if (rec.trace_distance) j["trace_distance"] = *rec.trace_distance; else j["trace_distance"] = nullptr;
    if (rec.r) j["r_t"] = *rec.r; else j["r_t"] = nullptr;
    j["solver_iters"] = rec.solver_iters;
    j["wall_ms"] = rec.wall_ms;
    os << j.dump() << '\n';
  }
  os << summary_json(series.summary, label) << '\n';
}

}  // namespace netstream
