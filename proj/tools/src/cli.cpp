#include "netstream/cli.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "netstream/io.hpp"
#include "netstream/metrics.hpp"
#include "netstream/offline_single.hpp"

namespace netstream::cli {
namespace {

constexpr int kUsageError = 2;
constexpr int kCheckpointVersion = 1;

const std::vector<std::string> kSubcommands{"stream", "simulate", "evaluate", "tune", "bench"};

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string normalize_key(std::string key) {
  for (auto& c : key) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == '_') c = '-';
  }
  return key;
}

/// Opens a named file or falls back to the provided stream for "-".
class InputHandle {
 public:
  InputHandle(const std::string& path, std::istream& fallback) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ifstream>(path);
      if (!*file_) throw std::runtime_error("cannot open input file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::istream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

class OutputHandle {
 public:
  OutputHandle(const std::string& path, std::ostream& fallback, bool append = false) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, append ? std::ios::app : std::ios::trunc);
      if (!*file_) throw std::runtime_error("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

/// Line reader that can keep waiting for a growing file.
class LineSource {
 public:
  LineSource(std::istream& is, bool follow, double idle_timeout_s)
      : is_(is), follow_(follow), idle_timeout_s_(idle_timeout_s) {}

  bool next(std::string& line) {
    auto last_progress = std::chrono::steady_clock::now();
    for (;;) {
      std::string chunk;
      if (std::getline(is_, chunk)) {
        if (!is_.eof()) {
          line = partial_ + chunk;
          partial_.clear();
          return true;
        }
        partial_ += chunk;
        last_progress = std::chrono::steady_clock::now();
      }
      if (!follow_) {
        if (partial_.empty()) return false;
        line = std::move(partial_);
        partial_.clear();
        return true;
      }
      is_.clear();
      const double idle = std::chrono::duration<double>(std::chrono::steady_clock::now() - last_progress).count();
      if (idle_timeout_s_ > 0.0 && idle >= idle_timeout_s_) {
        if (partial_.empty()) return false;
        line = std::move(partial_);
        partial_.clear();
        return true;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  }

 private:
  std::istream& is_;
  bool follow_;
  double idle_timeout_s_;
  std::string partial_;
};

void write_file_atomically(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write checkpoint '" + tmp + "'");
    os << text;
    if (!os) throw std::runtime_error("failed writing checkpoint '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

GroundTruth load_truth(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open ground truth '" + path + "'");
  return io::read_ground_truth(is);
}

// ---------------------------------------------------------------- stream

struct StreamArgs {
  std::string mode = "adaptive";
  int h = 20;
  double r = 0.95;
  double eta = 0.005;
  double r_init = 0.95;
  double r_min = 0.5;
  double r_max = 0.9999;
  std::string omega_prime = "derived";
  SolverConfig solver;
  int burn_in_n = 15;
  double kernel_width = 3.0;
  bool cold_start = false;
  std::string input = "-";
  std::string output = "-";
  std::string emit = "edges";
  std::string truth;
  bool follow = false;
  double idle_timeout = 0.0;
  std::string checkpoint;
  bool resume = false;
  long max_rows = 0;
  bool omit_timing = false;
  long expected_p = 0;
};

EngineConfig engine_config(const StreamArgs& a) {
  EngineConfig cfg;
  if (a.mode == "sliding") {
    cfg.mode = SlidingWindow{a.h};
  } else if (a.mode == "ewma") {
    cfg.mode = FixedForgetting{a.r};
  } else {
    cfg.mode = AdaptiveForgetting{a.eta, a.r_init, a.r_min, a.r_max};
  }
  cfg.tracker.omega_prime_variant =
      a.omega_prime == "printed" ? OmegaPrimeVariant::kAsPrinted : OmegaPrimeVariant::kDerived;
  cfg.solver = a.solver;
  cfg.burn_in_n = a.burn_in_n;
  cfg.kernel.width = a.kernel_width;
  cfg.warm_start = !a.cold_start;
  return cfg;
}

int cmd_stream(const StreamArgs& a, std::istream& in, std::ostream& out, std::ostream& err) {
  if (a.resume && a.checkpoint.empty()) {
    err << "error: --resume needs --checkpoint\n";
    return kUsageError;
  }
  if (a.emit == "metrics" && a.truth.empty()) {
    err << "error: --emit metrics needs --truth\n";
    return kUsageError;
  }
  std::optional<GroundTruth> truth;
  if (!a.truth.empty()) truth = load_truth(a.truth);

  const EngineConfig cfg = engine_config(a);
  std::optional<StreamEngine> engine;
  long skip = 0;
  if (a.resume && std::filesystem::exists(a.checkpoint)) {
    const auto j = nlohmann::json::parse(read_file(a.checkpoint));
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw std::runtime_error("unsupported checkpoint version in '" + a.checkpoint + "'");
    }
    skip = j.at("lines_consumed").get<long>();
    if (!j.at("engine").is_null()) engine.emplace(StreamEngine::restore(j.at("engine").dump()));
  }

  InputHandle input(a.input, in);
  OutputHandle output(a.output, out, skip > 0);
  std::ostream& os = output.get();
  LineSource source(input.get(), a.follow, a.idle_timeout);

  RecordFormat fmt;
  fmt.include_matrices = a.emit == "full_matrix";
  fmt.omit_timing = a.omit_timing;
  fmt.truth = a.emit == "metrics" ? &*truth : nullptr;

  const auto save = [&](long lines) {
    if (a.checkpoint.empty()) return;
    nlohmann::json j;
    j["version"] = kCheckpointVersion;
    j["lines_consumed"] = lines;
    j["engine"] = engine ? nlohmann::json::parse(engine->checkpoint()) : nlohmann::json(nullptr);
    write_file_atomically(a.checkpoint, j.dump());
  };

  std::string line;
  long lines = 0;
  long accepted = 0;
  while (source.next(line)) {
    ++lines;
    if (lines <= skip) continue;
    const auto row = io::parse_row(line);
    if (row.kind == io::RowKind::kBlank) continue;
    if (row.kind == io::RowKind::kMalformed) {
      err << "warning: line " << lines << ": malformed row skipped\n";
      continue;
    }
    const Index width = row.values.size();
    if (!engine) {
      if (a.expected_p > 0 && width != a.expected_p) {
        err << "error: line " << lines << " has " << width << " values, expected " << a.expected_p << "\n";
        return 1;
      }
      engine.emplace(width, cfg);
    } else if (width != engine->dim()) {
      err << "error: line " << lines << " has " << width << " values, stream dimension is "
          << engine->dim() << "\n";
      return 1;
    }
    for (const auto& rec : engine->push(row.values)) {
      os << to_json_line(rec, fmt) << '\n';
      os.flush();
    }
    save(lines);
    if (a.max_rows > 0 && ++accepted >= a.max_rows) break;
  }
  return 0;
}

// -------------------------------------------------------------- simulate

struct SimulateArgs {
  DatasetSpec spec;
  std::string graph = "ba";
  std::string output = "-";
  std::string truth;
};

int cmd_simulate(SimulateArgs a, std::ostream& out, std::ostream& err) {
  try {
    a.spec.graph = graph_model_from_string(a.graph);
    a.spec.validate();
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  const SyntheticDataset ds = generate_dataset(a.spec);
  {
    OutputHandle o(a.output, out);
    io::write_dataset(o.get(), ds);
  }
  std::string truth_path = a.truth;
  if (truth_path.empty() && a.output != "-") truth_path = a.output + ".truth.json";
  if (!truth_path.empty()) {
    OutputHandle o(truth_path, out);
    io::write_ground_truth(o.get(), ds);
  }
  return 0;
}

// -------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string truth;
  std::vector<std::string> runs;
  std::string data;
  bool offline = false;
  SolverConfig solver;
  double kernel_width = 3.0;
  std::vector<double> kernel_candidates;
  std::string format = "csv";
  std::string output = "-";
  ScoreOptions score;
};

void check_edges_within(const RunTrace& trace, int p, const std::string& label) {
  for (std::size_t t = 0; t < trace.edges.size(); ++t) {
    for (const auto& [i, j] : trace.edges[t]) {
      if (i < 0 || j >= p) {
        throw DimensionError("run '" + label + "' t=" + std::to_string(t + 1) + ": edge (" +
                             std::to_string(i) + "," + std::to_string(j) + ") outside p=" +
                             std::to_string(p));
      }
    }
  }
  if (!trace.covariances.empty() && trace.covariances.front().rows() != p) {
    throw DimensionError("run '" + label + "': covariance dimension " +
                         std::to_string(trace.covariances.front().rows()) + " differs from p=" +
                         std::to_string(p));
  }
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.runs.empty() && !a.offline) {
    err << "error: nothing to evaluate (give --run and/or --data with --offline)\n";
    return kUsageError;
  }
  if (a.offline && a.data.empty()) {
    err << "error: --offline needs --data\n";
    return kUsageError;
  }
  const GroundTruth truth = load_truth(a.truth);

  std::vector<std::pair<std::string, RunTrace>> runs;
  for (const auto& spec : a.runs) {
    std::string label, path;
    if (const auto eq = spec.find('='); eq != std::string::npos) {
      label = spec.substr(0, eq);
      path = spec.substr(eq + 1);
    } else {
      path = spec;
      label = std::filesystem::path(spec).stem().string();
    }
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open run output '" + path + "'");
    RunTrace trace = read_run_trace(is, a.solver.zero_tol);
    check_edges_within(trace, truth.p, label);
    runs.emplace_back(label, std::move(trace));
  }
  if (a.offline) {
    std::ifstream is(a.data);
    if (!is) throw std::runtime_error("cannot open dataset '" + a.data + "'");
    const Matrix x = io::read_observations(is);
    if (x.cols() != truth.p || x.rows() != truth.total_length()) {
      throw DimensionError("dataset is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                           ", ground truth expects " + std::to_string(truth.total_length()) + "x" +
                           std::to_string(truth.p));
    }
    KernelConfig kc{a.kernel_width, a.kernel_candidates};
    const auto start = std::chrono::steady_clock::now();
    const BurnInResult res = burn_in(x, a.solver, kc);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    RunTrace trace;
    for (const auto& z : res.zs) trace.edges.push_back(support(edge_set(z, a.solver.zero_tol)));
    trace.covariances = res.covariances;
    trace.solver_iters.assign(res.zs.size(), res.iterations_used);
    trace.wall_ms.assign(res.zs.size(), ms / static_cast<double>(res.zs.size()));
    runs.emplace_back("offline", std::move(trace));
  }

  OutputHandle o(a.output, out);
  std::ostream& os = o.get();
  std::vector<std::string> summaries;
  bool header = true;
  for (const auto& [label, trace] : runs) {
    const MetricSeries series = score_run(trace, truth, a.score);
    if (a.format == "jsonl") {
      write_metrics_jsonl(os, series, label);
    } else {
      write_metrics_csv(os, series, label, header);
      header = false;
      summaries.push_back(summary_json(series.summary, label));
    }
  }
  for (const auto& s : summaries) os << "# " << s << '\n';
  return 0;
}

// ------------------------------------------------------------------ tune

struct TuneArgs {
  std::string input = "-";
  int burn_in_n = 15;
  std::vector<double> lambda1s{0.05, 0.1, 0.2, 0.4};
  std::vector<double> lambda2s{0.05, 0.1, 0.2, 0.4};
  SolverConfig solver;
  double kernel_width = 3.0;
  std::string config_out;
};

int cmd_tune(const TuneArgs& a, std::istream& in, std::ostream& out, std::ostream& err) {
  InputHandle input(a.input, in);
  Matrix x = io::read_observations(input.get());
  if (a.burn_in_n > 0 && x.rows() > a.burn_in_n) x = Matrix(x.topRows(a.burn_in_n));
  if (x.rows() < 2) {
    err << "error: tuning needs at least 2 observations\n";
    return 1;
  }
  const auto rows = tune_grid(x, a.lambda1s, a.lambda2s, a.solver, KernelConfig{a.kernel_width, {}});
  out << "lambda1,lambda2,aic,dof,converged\n";
  for (const auto& r : rows) {
    out << io::format_double(r.lambda1) << ',' << io::format_double(r.lambda2) << ','
        << io::format_double(r.aic) << ',' << r.dof << ',' << (r.converged ? "true" : "false") << '\n';
  }
  const auto& best = rows[select_tuned(rows)];
  out << "# selected lambda1=" << io::format_double(best.lambda1)
      << " lambda2=" << io::format_double(best.lambda2) << '\n';
  if (!a.config_out.empty()) {
    std::ofstream cfg(a.config_out, std::ios::trunc);
    if (!cfg) throw std::runtime_error("cannot write config '" + a.config_out + "'");
    cfg << "lambda1=" << io::format_double(best.lambda1) << '\n'
        << "lambda2=" << io::format_double(best.lambda2) << '\n';
  }
  return 0;
}

// ----------------------------------------------------------------- bench

int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  for (int p : opts.ps) {
    if (p < 2) {
      err << "error: bench needs p >= 2\n";
      return kUsageError;
    }
  }
  const auto rows = run_bench(opts);
  out << "p,mode,mean_ms,median_ms,updates\n";
  for (const auto& r : rows) {
    out << r.p << ',' << r.mode << ',' << io::format_double(r.mean_ms) << ','
        << io::format_double(r.median_ms) << ',' << r.updates << '\n';
  }
  for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
    const double base = rows[i].mean_ms;
    const double diff = base > 0.0 ? 100.0 * (rows[i + 1].mean_ms - base) / base : 0.0;
    out << "# p=" << rows[i].p << " adaptive vs ewma mean difference: " << io::format_double(diff) << "%\n";
  }
  return 0;
}

void add_solver_options(CLI::App* app, SolverConfig& s) {
  app->add_option("--lambda1", s.lambda1, "sparsity penalty")->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--lambda2", s.lambda2, "temporal homogeneity penalty")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--epsilon", s.epsilon, "ADMM convergence tolerance (tool default, tune as needed)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--max-iters", s.max_iters, "ADMM iteration cap (tool default)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--zero-tol", s.zero_tol, "magnitude counted as a structural zero (tool default)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--penalize-diagonal", s.penalize_diagonal, "apply the sparsity penalty to the diagonal")
      ->capture_default_str();
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  long n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(n) + ": expected key=value");
    }
    const std::string key = normalize_key(trim(line.substr(0, eq)));
    if (key.empty()) throw std::runtime_error(path + ":" + std::to_string(n) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::runtime_error("--config needs a file name");
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config) return rest;
  std::vector<std::string> injected;
  for (const auto& [k, v] : read_config_file(*config)) injected.push_back("--" + k + "=" + v);

  auto pos = std::find_if(rest.begin() + (rest.empty() ? 0 : 1), rest.end(), [](const std::string& a) {
    return std::find(kSubcommands.begin(), kSubcommands.end(), a) != kSubcommands.end();
  });
  if (pos != rest.end()) ++pos;
  rest.insert(pos, injected.begin(), injected.end());
  return rest;
}

std::vector<TuneRow> tune_grid(const Matrix& burn, const std::vector<double>& lambda1s,
                               const std::vector<double>& lambda2s, const SolverConfig& base,
                               const KernelConfig& kernel) {
  if (lambda1s.empty() || lambda2s.empty()) throw std::invalid_argument("tuning grid is empty");
  std::vector<TuneRow> rows;
  for (double l1 : lambda1s) {
    for (double l2 : lambda2s) {
      SolverConfig cfg = base;
      cfg.lambda1 = l1;
      cfg.lambda2 = l2;
      cfg.validate();
      const BurnInResult res = burn_in(burn, cfg, kernel);
      TuneRow row;
      row.lambda1 = l1;
      row.lambda2 = l2;
      row.aic = aic(res, cfg.zero_tol);
      row.dof = aic_degrees_of_freedom(res.zs, cfg.zero_tol);
      row.converged = res.converged;
      rows.push_back(row);
    }
  }
  return rows;
}

std::size_t select_tuned(const std::vector<TuneRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("select_tuned: no rows");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = rows[best];
    if (a.aic < b.aic) {
      best = i;
    } else if (a.aic == b.aic &&
               (a.lambda1 > b.lambda1 || (a.lambda1 == b.lambda1 && a.lambda2 > b.lambda2))) {
      best = i;
    }
  }
  return best;
}

std::vector<BenchRow> run_bench(const BenchOptions& opts) {
  std::vector<BenchRow> rows;
  for (int p : opts.ps) {
    std::vector<double> ewma, adaptive;
    for (int rep = 0; rep < opts.reps; ++rep) {
      DatasetSpec spec;
      spec.p = p;
      spec.segments = opts.segments;
      spec.seg_len = opts.seg_len;
      spec.seed = opts.seed + static_cast<std::uint64_t>(rep);
      if (p >= 5) {
        spec.graph = GraphModel::kWattsStrogatz;
      } else if (p >= 3) {
        spec.graph = GraphModel::kWattsStrogatz;
        spec.k = 2;
      } else {
        spec.graph = GraphModel::kBarabasiAlbert;
        spec.m = 1;
      }
      const SyntheticDataset ds = generate_dataset(spec);
      for (int m = 0; m < 2; ++m) {
        EngineConfig cfg;
        if (m == 0) {
          cfg.mode = FixedForgetting{opts.r};
        } else {
          cfg.mode = AdaptiveForgetting{opts.eta, opts.r, 0.5, 0.9999};
        }
        cfg.solver = opts.solver;
        cfg.burn_in_n = std::min<int>(opts.burn_in_n, static_cast<int>(ds.observations.rows()));
        StreamEngine engine(p, cfg);
        auto& sink = m == 0 ? ewma : adaptive;
        for (Index t = 0; t < ds.observations.rows(); ++t) {
          for (const auto& rec : engine.push(ds.observations.row(t).transpose())) {
            if (!rec.burn_in) sink.push_back(rec.wall_ms);
          }
        }
      }
    }
    for (int m = 0; m < 2; ++m) {
      auto& v = m == 0 ? ewma : adaptive;
      BenchRow row;
      row.p = p;
      row.mode = m == 0 ? "ewma" : "adaptive";
      row.updates = static_cast<long>(v.size());
      if (!v.empty()) {
        row.mean_ms = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        row.median_ms = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(args);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  CLI::App app{"Streaming estimation of sparse time-varying precision networks"};
  app.name("netstream");
  app.set_help_flag("--help", "print this help message and exit");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string config_unused;
  app.add_option("--config", config_unused, "flat key=value file; keys are long option names");

  std::uint64_t seed = 1;
  const auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "random seed (falls back to NETSTREAM_SEED)")
        ->envname("NETSTREAM_SEED")
        ->capture_default_str();
  };

  // stream
  StreamArgs sa;
  auto* stream = app.add_subcommand("stream", "estimate networks from an observation stream");
  stream->add_option("--mode", sa.mode, "covariance tracking mode")
      ->check(CLI::IsMember({"sliding", "ewma", "adaptive"}))
      ->capture_default_str();
  auto* opt_h = stream->add_option("--h", sa.h, "sliding window length")->check(CLI::Range(2, 1 << 30))->capture_default_str();
  auto* opt_r = stream->add_option("--r", sa.r, "fixed forgetting factor")->check(CLI::Range(1e-12, 1.0))->capture_default_str();
  auto* opt_eta = stream->add_option("--eta", sa.eta, "adaptive step size")->check(CLI::NonNegativeNumber)->capture_default_str();
  auto* opt_rinit = stream->add_option("--r-init", sa.r_init, "initial adaptive forgetting factor")->check(CLI::Range(1e-12, 1.0))->capture_default_str();
  auto* opt_rmin = stream->add_option("--r-min", sa.r_min, "lower clamp for adaptive factor")->check(CLI::Range(1e-12, 1.0))->capture_default_str();
  auto* opt_rmax = stream->add_option("--r-max", sa.r_max, "upper clamp for adaptive factor")->check(CLI::Range(1e-12, 1.0))->capture_default_str();
  stream->add_option("--omega-prime", sa.omega_prime, "effective sample size derivative recursion")
      ->check(CLI::IsMember({"derived", "printed"}))
      ->capture_default_str();
  add_solver_options(stream, sa.solver);
  stream->add_option("--burn-in", sa.burn_in_n, "observations solved jointly before streaming (0 or >= 2)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  stream->add_option("--kernel-width", sa.kernel_width, "burn-in Gaussian kernel width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  stream->add_flag("--cold-start", sa.cold_start, "start every ADMM solve from the identity");
  stream->add_option("--input", sa.input, "observation file, or - for standard input")->capture_default_str();
  stream->add_option("--output", sa.output, "JSON-lines output, or - for standard output")->capture_default_str();
  stream->add_option("--emit", sa.emit, "record content")
      ->check(CLI::IsMember({"edges", "full_matrix", "metrics"}))
      ->capture_default_str();
  stream->add_option("--truth", sa.truth, "ground-truth sidecar (needed for --emit metrics)");
  stream->add_flag("--follow", sa.follow, "keep reading a growing input file");
  stream->add_option("--idle-timeout", sa.idle_timeout, "with --follow, stop after this many idle seconds (0 waits forever)")
      ->check(CLI::NonNegativeNumber);
  stream->add_option("--checkpoint", sa.checkpoint, "state file rewritten after every observation");
  stream->add_flag("--resume", sa.resume, "continue from --checkpoint, appending to --output");
  stream->add_option("--max-rows", sa.max_rows, "stop after this many accepted rows (0 = no limit)")
      ->check(CLI::NonNegativeNumber);
  stream->add_flag("--omit-timing", sa.omit_timing, "write wall_ms as 0 for reproducible output");
  stream->add_option("--p", sa.expected_p, "expected dimension (default: width of the first row)")
      ->check(CLI::NonNegativeNumber);

  // simulate
  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a piecewise-stationary dataset");
  simulate->add_option("--p", sim.spec.p, "number of nodes")->capture_default_str();
  simulate->add_option("--segments", sim.spec.segments, "number of segments")->capture_default_str();
  simulate->add_option("--seg-len", sim.spec.seg_len, "observations per segment")->capture_default_str();
  simulate->add_option("--graph", sim.graph, "graph model")->check(CLI::IsMember({"ba", "ws"}))->capture_default_str();
  simulate->add_option("--m", sim.spec.m, "preferential attachment edges per node")->capture_default_str();
  simulate->add_option("--k", sim.spec.k, "ring lattice degree")->capture_default_str();
  simulate->add_option("--beta", sim.spec.beta, "rewiring probability")->capture_default_str();
  simulate->add_option("--var-coeff", sim.spec.var_coeff, "VAR(1) coefficient")->capture_default_str();
  simulate->add_option("--delta", sim.spec.precision.delta, "diagonal dominance margin")->capture_default_str();
  simulate->add_option("--unit-diagonal", sim.spec.precision.unit_diagonal, "rescale precisions to unit diagonal")
      ->capture_default_str();
  add_seed(simulate);
  simulate->add_option("--output", sim.output, "dataset file, or - for standard output")->capture_default_str();
  simulate->add_option("--truth", sim.truth, "ground-truth sidecar (default: <output>.truth.json)");

  // evaluate
  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "score run outputs against ground truth");
  evaluate->add_option("--truth", ev.truth, "ground-truth sidecar")->required();
  evaluate->add_option("--run", ev.runs, "run output, optionally label=path (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  evaluate->add_option("--data", ev.data, "dataset file for the offline comparison");
  evaluate->add_flag("--offline", ev.offline, "also solve the whole dataset offline and score it");
  add_solver_options(evaluate, ev.solver);
  evaluate->add_option("--kernel-width", ev.kernel_width, "offline Gaussian kernel width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  evaluate->add_option("--kernel-candidates", ev.kernel_candidates,
                       "widths scanned by leave-one-out likelihood (overrides --kernel-width)")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  evaluate->add_option("--format", ev.format, "output format")->check(CLI::IsMember({"csv", "jsonl"}))->capture_default_str();
  evaluate->add_option("--output", ev.output, "metrics output, or - for standard output")->capture_default_str();
  evaluate->add_option("--plateau", ev.score.plateau_len, "plateau length at the end of each segment")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  evaluate->add_option("--recovery", ev.score.recovery_fraction, "recovery fraction of the previous plateau F")
      ->capture_default_str();
  evaluate->add_option("--r-window", ev.score.r_window, "points before/after a change for mean r_t")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // tune
  TuneArgs tu;
  auto* tune = app.add_subcommand("tune", "choose penalties by AIC over a burn-in block");
  tune->add_option("--input", tu.input, "observation file, or - for standard input")->capture_default_str();
  tune->add_option("--burn-in", tu.burn_in_n, "rows used from the start of the input (0 = all)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  tune->add_option("--lambda1-grid", tu.lambda1s, "comma-separated λ1 values")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->check(CLI::NonNegativeNumber);
  tune->add_option("--lambda2-grid", tu.lambda2s, "comma-separated λ2 values")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->check(CLI::NonNegativeNumber);
  tune->add_option("--epsilon", tu.solver.epsilon, "ADMM convergence tolerance")->check(CLI::PositiveNumber);
  tune->add_option("--max-iters", tu.solver.max_iters, "ADMM iteration cap")->check(CLI::PositiveNumber);
  tune->add_option("--zero-tol", tu.solver.zero_tol, "structural zero magnitude")->check(CLI::NonNegativeNumber);
  tune->add_option("--kernel-width", tu.kernel_width, "Gaussian kernel width")->check(CLI::PositiveNumber);
  tune->add_option("--config-out", tu.config_out, "write the selected penalties as key=value");

  // bench
  BenchOptions bo;
  auto* bench = app.add_subcommand("bench", "per-update timing on small-world datasets");
  bench->add_option("--p", bo.ps, "comma-separated dimensions")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->capture_default_str();
  bench->add_option("--reps", bo.reps, "datasets per dimension")->check(CLI::PositiveNumber)->capture_default_str();
  add_seed(bench);
  bench->add_option("--segments", bo.segments, "segments per dataset")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--seg-len", bo.seg_len, "observations per segment")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--r", bo.r, "fixed forgetting factor (and adaptive start)")->capture_default_str();
  bench->add_option("--eta", bo.eta, "adaptive step size")->capture_default_str();
  bench->add_option("--burn-in", bo.burn_in_n, "burn-in observations")->capture_default_str();
  add_solver_options(bench, bo.solver);

  std::vector<const char*> cargv;
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (stream->parsed()) {
      const bool adaptive_opts = opt_eta->count() + opt_rinit->count() + opt_rmin->count() + opt_rmax->count() > 0;
      if ((sa.mode != "sliding" && opt_h->count() > 0) || (sa.mode != "ewma" && opt_r->count() > 0) ||
          (sa.mode != "adaptive" && adaptive_opts)) {
        err << "error: options given for a mode other than --mode " << sa.mode << "\n";
        return kUsageError;
      }
      if (sa.burn_in_n == 1) {
        err << "error: --burn-in must be 0 or at least 2\n";
        return kUsageError;
      }
      if (sa.r_min > sa.r_max || sa.r_init < sa.r_min || sa.r_init > sa.r_max) {
        err << "error: need r-min <= r-init <= r-max\n";
        return kUsageError;
      }
      return cmd_stream(sa, in, out, err);
    }
    if (simulate->parsed()) {
      sim.spec.seed = seed;
      return cmd_simulate(sim, out, err);
    }
    if (evaluate->parsed()) return cmd_evaluate(ev, out, err);
    if (tune->parsed()) return cmd_tune(tu, in, out, err);
    if (bench->parsed()) {
      bo.seed = seed;
      return cmd_bench(bo, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace netstream::cli
