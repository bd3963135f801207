#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netstream/rng.hpp"
#include "netstream/types.hpp"

namespace netstream {

/// Simple undirected graph; edges stored once with first < second, sorted.
struct Graph {
  int nodes = 0;
  std::vector<std::pair<int, int>> edges;

  std::vector<int> degrees() const;
  EdgeSet edge_set() const { return {edges.begin(), edges.end()}; }
};

/// Preferential attachment: m seed nodes, then each new node attaches to m
/// distinct existing nodes chosen with probability proportional to degree
/// (the first new node attaches to every seed node).
Graph barabasi_albert(int p, int m, std::uint64_t seed);
Graph barabasi_albert(int p, int m, Rng& rng);

/// Ring lattice with k/2 neighbours per side, each lattice edge rewired with
/// probability beta to a uniformly chosen node (no self-loops or duplicates).
Graph watts_strogatz(int p, int k, double beta, std::uint64_t seed);
Graph watts_strogatz(int p, int k, double beta, Rng& rng);

struct PrecisionOptions {
  /// Diagonal margin added to each absolute row sum.
  double delta = 0.1;
  /// Rescale to unit diagonal after construction.
  bool unit_diagonal = true;
};

struct PrecisionPair {
  Matrix precision;
  Matrix covariance;
};

/// Builds a strictly diagonally dominant precision from explicit edge weights.
PrecisionPair precision_from_weights(int p, std::span<const Edge> weighted,
                                     const PrecisionOptions& opts = {});

/// Samples weights uniformly from [−½, −¼] ∪ [¼, ½] on the graph's edges and
/// builds the precision with precision_from_weights.
PrecisionPair graph_to_precision(const Graph& graph, Rng& rng, const PrecisionOptions& opts = {});
PrecisionPair graph_to_precision(const Graph& graph, std::uint64_t seed,
                                 const PrecisionOptions& opts = {});

/// VAR(1) segment X_t = a X_{t−1} + ε_t, ε_t ~ N(0, (1 − a²) Σ), first row
/// drawn from N(0, Σ), so every row has marginal covariance Σ = precision⁻¹.
Matrix var_segment(const Matrix& precision, int length, double var_coeff, Rng& rng);
Matrix var_segment(const Matrix& precision, int length, double var_coeff, std::uint64_t seed);

enum class GraphModel { kBarabasiAlbert, kWattsStrogatz };

std::string to_string(GraphModel model);
GraphModel graph_model_from_string(const std::string& name);

struct DatasetSpec {
  int p = 10;
  int segments = 5;
  int seg_len = 100;
  GraphModel graph = GraphModel::kBarabasiAlbert;
  int m = 2;
  int k = 4;
  double beta = 0.75;
  double var_coeff = 0.3;
  std::uint64_t seed = 1;
  PrecisionOptions precision;

  void validate() const;
};

struct GroundTruthSegment {
  long start = 0;  ///< 0-based index of the first row
  long length = 0;
  Graph graph;
  Matrix precision;
  Matrix covariance;

  long end() const { return start + length; }
};

/// Ground-truth network sequence, independent of the observations.
struct GroundTruth {
  int p = 0;
  std::vector<GroundTruthSegment> segments;

  long total_length() const;
  /// Segment index active at 0-based row t.
  std::size_t segment_at(long t) const;
  /// 0-based rows at which a new segment starts (excluding row 0).
  std::vector<long> change_points() const;
};

struct SyntheticDataset {
  DatasetSpec spec;
  GroundTruth truth;
  Matrix observations;  ///< T × p
};

SyntheticDataset generate_dataset(const DatasetSpec& spec);

}  // namespace netstream
