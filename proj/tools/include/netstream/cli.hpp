#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "netstream/stream_engine.hpp"
#include "netstream/synth.hpp"

namespace netstream::cli {

/// Runs the `netstream` command line. Standard input and output are passed
/// in so tests can drive the tool in-process. Returns the exit status.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

/// Flat `key=value` file: '#' starts a comment, blank lines are ignored and
/// keys are normalized to lower case with '_' mapped to '-'.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Expands `--config <file>` into `--key=value` arguments placed right after
/// the subcommand name, so explicit flags (which come later) take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

struct TuneRow {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double aic = 0.0;
  long dof = 0;
  bool converged = false;
};

/// One burn-in solve and AIC per grid point, in grid order (λ1 outer).
std::vector<TuneRow> tune_grid(const Matrix& burn, const std::vector<double>& lambda1s,
                               const std::vector<double>& lambda2s, const SolverConfig& base,
                               const KernelConfig& kernel);

/// Index of the minimum-AIC row; ties go to the larger λ1, then the larger λ2.
std::size_t select_tuned(const std::vector<TuneRow>& rows);

struct BenchOptions {
  std::vector<int> ps{5, 10, 15, 19};
  int reps = 3;
  std::uint64_t seed = 1;
  int segments = 3;
  int seg_len = 50;
  double r = 0.95;
  double eta = 0.005;
  SolverConfig solver;
  int burn_in_n = 15;
};

struct BenchRow {
  int p = 0;
  std::string mode;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  long updates = 0;
};

/// Per-update wall time of the streaming engine on small-world datasets,
/// for fixed and adaptive forgetting. Burn-in records are excluded.
std::vector<BenchRow> run_bench(const BenchOptions& opts);

}  // namespace netstream::cli
