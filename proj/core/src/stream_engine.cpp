#include "netstream/stream_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>

#include <json.hpp>

#include "json_matrix.hpp"

namespace netstream {
namespace {

constexpr int kEngineCheckpointVersion = 1;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::optional<double> factor_of(const ForgettingState& s) {
  if (std::holds_alternative<SlidingWindow>(s.mode())) return std::nullopt;
  return s.r();
}

EngineConfig with_adapt_delay(EngineConfig cfg, Index p) {
  // Gradient steps start once the burn-in block is complete.
  const long default_delay = cfg.tracker.adapt_after > 0 ? cfg.tracker.adapt_after
                                                         : static_cast<long>(p) + 1;
  cfg.tracker.adapt_after = std::max<long>(default_delay, cfg.burn_in_n);
  return cfg;
}

}  // namespace

StreamEngine::StreamEngine(Index p, EngineConfig cfg)
    : p_(p),
      cfg_(with_adapt_delay(std::move(cfg), p)),
      tracker_(p, cfg_.mode, cfg_.tracker),
      theta_prev_(Matrix::Identity(p, p)) {
  cfg_.solver.validate();
  if (cfg_.burn_in_n == 1 || cfg_.burn_in_n < 0) {
    throw std::invalid_argument("burn-in needs 0 or at least 2 observations");
  }
}

std::vector<StreamRecord> StreamEngine::push(const Vector& x) {
  if (x.size() != p_) {
    throw DimensionError("observation has " + std::to_string(x.size()) +
                         " entries, stream dimension is " + std::to_string(p_));
  }
  const auto start = Clock::now();
  tracker_.update(x);
  ++t_;

  if (t_ <= cfg_.burn_in_n) {
    burn_rows_.push_back(x);
    StreamRecord meta;
    meta.t = t_;
    meta.r = factor_of(tracker_);
    meta.omega = tracker_.omega();
    meta.trace_s = tracker_.covariance().trace();
    meta.covariance = tracker_.covariance();
    meta.burn_in = true;
    burn_meta_.push_back(std::move(meta));
    if (t_ < cfg_.burn_in_n) return {};
    return finish_burn_in(elapsed_ms(start));
  }

  SolverConfig sc = cfg_.solver;
  if (t_ == 1) sc.lambda2 = 0.0;  // no previous estimate without a burn-in
  const NetworkEstimate* warm = (cfg_.warm_start && last_) ? &*last_ : nullptr;
  NetworkEstimate est = solve(tracker_.covariance(), theta_prev_, sc, warm);

  StreamRecord rec;
  rec.t = t_;
  rec.r = factor_of(tracker_);
  rec.omega = tracker_.omega();
  rec.edges = edge_set(est, cfg_.solver);
  rec.converged = est.converged;
  rec.iters = est.iterations_used;
  rec.trace_s = tracker_.covariance().trace();
  rec.z = est.z;
  rec.covariance = tracker_.covariance();
  theta_prev_ = est.z;
  last_ = std::move(est);
  rec.wall_ms = elapsed_ms(start);
  std::vector<StreamRecord> out;
  out.push_back(std::move(rec));
  return out;
}

std::vector<StreamRecord> StreamEngine::finish_burn_in(double tracker_ms) {
  const auto start = Clock::now();
  Matrix x(static_cast<Index>(burn_rows_.size()), p_);
  for (std::size_t i = 0; i < burn_rows_.size(); ++i) {
    x.row(static_cast<Index>(i)) = burn_rows_[i].transpose();
  }
  const BurnInResult res = burn_in(x, cfg_.solver, cfg_.kernel);
  const double solve_ms = elapsed_ms(start) + tracker_ms;

  std::vector<StreamRecord> out = std::move(burn_meta_);
  burn_meta_.clear();
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& rec = out[i];
    rec.edges = edge_set(res.zs[i], cfg_.solver.zero_tol);
    rec.converged = res.converged;
    rec.iters = res.iterations_used;
    rec.z = res.zs[i];
    rec.wall_ms = i + 1 == out.size() ? solve_ms : 0.0;
  }
  theta_prev_ = res.zs.back();
  NetworkEstimate warm;
  warm.theta = res.thetas.back();
  warm.z = res.zs.back();
  warm.u = Matrix::Zero(p_, p_);
  warm.iterations_used = res.iterations_used;
  warm.converged = res.converged;
  last_ = std::move(warm);
  burn_rows_.clear();
  return out;
}

std::string StreamEngine::checkpoint() const {
  using detail::to_json;
  nlohmann::json j;
  j["version"] = kEngineCheckpointVersion;
  j["p"] = p_;
  j["solver"] = {{"lambda1", cfg_.solver.lambda1},
                 {"lambda2", cfg_.solver.lambda2},
                 {"epsilon", cfg_.solver.epsilon},
                 {"max_iters", cfg_.solver.max_iters},
                 {"zero_tol", cfg_.solver.zero_tol},
                 {"penalize_diagonal", cfg_.solver.penalize_diagonal}};
  j["burn_in_n"] = cfg_.burn_in_n;
  j["kernel"] = {{"width", cfg_.kernel.width}, {"candidates", cfg_.kernel.candidate_widths}};
  j["warm_start"] = cfg_.warm_start;
  j["tracker"] = nlohmann::json::parse(tracker_.serialize());
  j["t"] = t_;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : burn_rows_) rows.push_back(to_json(r));
  j["burn_rows"] = std::move(rows);
  nlohmann::json meta = nlohmann::json::array();
  for (const auto& m : burn_meta_) {
    meta.push_back({{"t", m.t},
                    {"r", m.r ? nlohmann::json(*m.r) : nlohmann::json(nullptr)},
                    {"omega", m.omega},
                    {"trace_s", m.trace_s},
                    {"cov", to_json(m.covariance)}});
  }
  j["burn_meta"] = std::move(meta);
  j["theta_prev"] = to_json(theta_prev_);
  if (last_) {
    j["last"] = {{"theta", to_json(last_->theta)},
                 {"z", to_json(last_->z)},
                 {"u", to_json(last_->u)},
                 {"iters", last_->iterations_used},
                 {"converged", last_->converged}};
  } else {
    j["last"] = nullptr;
  }
  return j.dump();
}

StreamEngine StreamEngine::restore(std::string_view text) {
  using detail::matrix_from_json;
  using detail::vector_from_json;
  const auto j = nlohmann::json::parse(text);
  if (j.at("version").get<int>() != kEngineCheckpointVersion) {
    throw std::invalid_argument("unsupported engine checkpoint version");
  }
  auto tracker = ForgettingState::deserialize(j.at("tracker").dump());

  EngineConfig cfg;
  cfg.mode = tracker.mode();
  cfg.tracker = tracker.options();
  const auto& s = j.at("solver");
  cfg.solver.lambda1 = s.at("lambda1").get<double>();
  cfg.solver.lambda2 = s.at("lambda2").get<double>();
  cfg.solver.epsilon = s.at("epsilon").get<double>();
  cfg.solver.max_iters = s.at("max_iters").get<int>();
  cfg.solver.zero_tol = s.at("zero_tol").get<double>();
  cfg.solver.penalize_diagonal = s.at("penalize_diagonal").get<bool>();
  cfg.burn_in_n = j.at("burn_in_n").get<int>();
  cfg.kernel.width = j.at("kernel").at("width").get<double>();
  cfg.kernel.candidate_widths = j.at("kernel").at("candidates").get<std::vector<double>>();
  cfg.warm_start = j.at("warm_start").get<bool>();

  StreamEngine engine(j.at("p").get<Index>(), cfg);
  engine.tracker_ = std::move(tracker);
  engine.t_ = j.at("t").get<long>();
  for (const auto& r : j.at("burn_rows")) engine.burn_rows_.push_back(vector_from_json(r));
  for (const auto& m : j.at("burn_meta")) {
    StreamRecord rec;
    rec.t = m.at("t").get<long>();
    if (!m.at("r").is_null()) rec.r = m.at("r").get<double>();
    rec.omega = m.at("omega").get<double>();
    rec.trace_s = m.at("trace_s").get<double>();
    rec.covariance = matrix_from_json(m.at("cov"));
    rec.burn_in = true;
    engine.burn_meta_.push_back(std::move(rec));
  }
  engine.theta_prev_ = matrix_from_json(j.at("theta_prev"));
  if (!j.at("last").is_null()) {
    const auto& l = j.at("last");
    NetworkEstimate est;
    est.theta = matrix_from_json(l.at("theta"));
    est.z = matrix_from_json(l.at("z"));
    est.u = matrix_from_json(l.at("u"));
    est.iterations_used = l.at("iters").get<int>();
    est.converged = l.at("converged").get<bool>();
    engine.last_ = std::move(est);
  }
  return engine;
}

std::string to_json_line(const StreamRecord& rec, const RecordFormat& fmt) {
  nlohmann::ordered_json j;
  j["t"] = rec.t;
  j["r_t"] = rec.r ? nlohmann::ordered_json(*rec.r) : nlohmann::ordered_json(nullptr);
  j["omega_t"] = rec.omega;
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& e : rec.edges) edges.push_back({e.i, e.j, e.weight});
  j["edges"] = std::move(edges);
  j["converged"] = rec.converged;
  j["iters"] = rec.iters;
  j["wall_ms"] = fmt.omit_timing ? 0.0 : rec.wall_ms;
  j["trace_of_S"] = rec.trace_s;
  if (fmt.include_matrices) {
    j["Z"] = nlohmann::ordered_json::parse(detail::to_json(rec.z).dump());
    j["S"] = nlohmann::ordered_json::parse(detail::to_json(rec.covariance).dump());
  }
  if (fmt.truth != nullptr) {
    const long row = rec.t - 1;
    if (row < fmt.truth->total_length()) {
      const auto& seg = fmt.truth->segments[fmt.truth->segment_at(row)];
      const Prf m = prf(support(rec.edges), seg.graph.edge_set());
      j["precision"] = m.precision;
      j["recall"] = m.recall;
      j["f_score"] = m.f_score;
    }
  }
  return j.dump();
}

RunTrace read_run_trace(std::istream& is, double zero_tol) {
  struct Row {
    long t;
    EdgeSet edges;
    std::optional<double> r;
    int iters;
    double wall_ms;
    std::optional<Matrix> s;
  };
  std::vector<Row> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("run output line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.contains("t")) continue;
    Row row;
    row.t = j.at("t").get<long>();
    for (const auto& e : j.at("edges")) {
      if (std::abs(e.at(2).get<double>()) > zero_tol) {
        int a = e.at(0).get<int>(), b = e.at(1).get<int>();
        row.edges.emplace(std::min(a, b), std::max(a, b));
      }
    }
    if (j.contains("r_t") && !j.at("r_t").is_null()) row.r = j.at("r_t").get<double>();
    row.iters = j.value("iters", 0);
    row.wall_ms = j.value("wall_ms", 0.0);
    if (j.contains("S")) row.s = detail::matrix_from_json(j.at("S"));
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
  RunTrace trace;
  const bool all_r = std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.r.has_value(); });
  const bool all_s = std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.s.has_value(); });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].t != static_cast<long>(i) + 1) {
      throw std::runtime_error("run output is missing record t=" + std::to_string(i + 1));
    }
    trace.edges.push_back(std::move(rows[i].edges));
    if (all_r) trace.r.push_back(*rows[i].r);
    if (all_s) trace.covariances.push_back(std::move(*rows[i].s));
    trace.solver_iters.push_back(rows[i].iters);
    trace.wall_ms.push_back(rows[i].wall_ms);
  }
  return trace;
}

}  // namespace netstream
