#include "netstream/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "netstream/linalg.hpp"

namespace netstream {

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(nodes), 0);
  for (const auto& [a, b] : edges) {
    ++deg[static_cast<std::size_t>(a)];
    ++deg[static_cast<std::size_t>(b)];
  }
  return deg;
}

namespace {

void normalize(Graph& g) {
  for (auto& [a, b] : g.edges) {
    if (a > b) std::swap(a, b);
  }
  std::sort(g.edges.begin(), g.edges.end());
}

}  // namespace

Graph barabasi_albert(int p, int m, Rng& rng) {
  if (m < 1 || m >= p) throw std::invalid_argument("barabasi_albert needs 1 <= m < p");
  Graph g;
  g.nodes = p;
  std::vector<int> repeated;  // each node appears once per incident edge
  std::vector<int> targets(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) targets[static_cast<std::size_t>(i)] = i;

  for (int source = m; source < p; ++source) {
    for (int t : targets) {
      g.edges.emplace_back(t, source);
      repeated.push_back(t);
      repeated.push_back(source);
    }
    if (source + 1 == p) break;
    std::vector<int> chosen;
    while (static_cast<int>(chosen.size()) < m) {
      const int candidate = repeated[static_cast<std::size_t>(rng.below(repeated.size()))];
      if (std::find(chosen.begin(), chosen.end(), candidate) == chosen.end()) {
        chosen.push_back(candidate);
      }
    }
    targets = std::move(chosen);
  }
  normalize(g);
  return g;
}

Graph barabasi_albert(int p, int m, std::uint64_t seed) {
  Rng rng(seed);
  return barabasi_albert(p, m, rng);
}

Graph watts_strogatz(int p, int k, double beta, Rng& rng) {
  if (k < 2 || k % 2 != 0 || k >= p) {
    throw std::invalid_argument("watts_strogatz needs even k with 2 <= k < p");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  const auto n = static_cast<std::size_t>(p);
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  std::vector<int> degree(n, 0);
  const auto link = [&](int a, int b, char on) {
    adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = on;
    adj[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = on;
    degree[static_cast<std::size_t>(a)] += on ? 1 : -1;
    degree[static_cast<std::size_t>(b)] += on ? 1 : -1;
  };
  for (int j = 1; j <= k / 2; ++j) {
    for (int u = 0; u < p; ++u) link(u, (u + j) % p, 1);
  }
  for (int j = 1; j <= k / 2; ++j) {
    for (int u = 0; u < p; ++u) {
      if (!rng.bernoulli(beta)) continue;
      if (degree[static_cast<std::size_t>(u)] >= p - 1) continue;
      const int v = (u + j) % p;
      int w;
      do {
        w = static_cast<int>(rng.below(n));
      } while (w == u || adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(w)]);
      link(u, v, 0);
      link(u, w, 1);
    }
  }
  Graph g;
  g.nodes = p;
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      if (adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) g.edges.emplace_back(a, b);
    }
  }
  return g;
}

Graph watts_strogatz(int p, int k, double beta, std::uint64_t seed) {
  Rng rng(seed);
  return watts_strogatz(p, k, beta, rng);
}

PrecisionPair precision_from_weights(int p, std::span<const Edge> weighted,
                                     const PrecisionOptions& opts) {
  if (p < 1) throw std::invalid_argument("precision_from_weights needs p >= 1");
  if (!(opts.delta > 0.0)) throw std::invalid_argument("diagonal margin must be > 0");
  Matrix theta = Matrix::Zero(p, p);
  for (const auto& e : weighted) {
    if (e.i == e.j || e.i < 0 || e.j < 0 || e.i >= p || e.j >= p) {
      throw std::invalid_argument("precision_from_weights: invalid edge");
    }
    theta(e.i, e.j) = e.weight;
    theta(e.j, e.i) = e.weight;
  }
  for (Index i = 0; i < p; ++i) theta(i, i) = theta.row(i).cwiseAbs().sum() + opts.delta;
  if (opts.unit_diagonal) {
    const Vector scale = theta.diagonal().cwiseSqrt().cwiseInverse();
    theta = scale.asDiagonal() * theta * scale.asDiagonal();
    theta.diagonal().setOnes();
  }
  linalg::symmetrize(theta);
  auto cov = linalg::spd_inverse(theta);
  if (!cov) throw SingularMatrixError("precision_from_weights: construction is not PD");
  return {std::move(theta), std::move(*cov)};
}

PrecisionPair graph_to_precision(const Graph& graph, Rng& rng, const PrecisionOptions& opts) {
  std::vector<Edge> weighted;
  weighted.reserve(graph.edges.size());
  for (const auto& [a, b] : graph.edges) {
    const double magnitude = rng.uniform(0.25, 0.5);
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    weighted.push_back({a, b, sign * magnitude});
  }
  return precision_from_weights(graph.nodes, weighted, opts);
}

PrecisionPair graph_to_precision(const Graph& graph, std::uint64_t seed,
                                 const PrecisionOptions& opts) {
  Rng rng(seed);
  return graph_to_precision(graph, rng, opts);
}

Matrix var_segment(const Matrix& precision, int length, double var_coeff, Rng& rng) {
  if (length < 1) throw std::invalid_argument("var_segment needs length >= 1");
  if (!(var_coeff >= 0.0 && var_coeff < 1.0)) {
    throw std::invalid_argument("var_coeff must lie in [0, 1)");
  }
  auto cov = linalg::spd_inverse(precision);
  if (!cov) throw SingularMatrixError("var_segment: precision is not PD");
  Eigen::LLT<Matrix> llt(*cov);
  const Matrix chol = llt.matrixL();
  const Index p = precision.rows();
  const double innovation_scale = std::sqrt(1.0 - var_coeff * var_coeff);

  const auto draw = [&] {
    Vector z(p);
    for (Index i = 0; i < p; ++i) z(i) = rng.normal();
    return Vector(chol * z);
  };
  Matrix x(length, p);
  Vector prev = draw();
  x.row(0) = prev.transpose();
  for (int t = 1; t < length; ++t) {
    prev = var_coeff * prev + innovation_scale * draw();
    x.row(t) = prev.transpose();
  }
  return x;
}

Matrix var_segment(const Matrix& precision, int length, double var_coeff, std::uint64_t seed) {
  Rng rng(seed);
  return var_segment(precision, length, var_coeff, rng);
}

std::string to_string(GraphModel model) {
  return model == GraphModel::kBarabasiAlbert ? "ba" : "ws";
}

GraphModel graph_model_from_string(const std::string& name) {
  if (name == "ba") return GraphModel::kBarabasiAlbert;
  if (name == "ws") return GraphModel::kWattsStrogatz;
  throw std::invalid_argument("unknown graph model '" + name + "' (expected ba or ws)");
}

void DatasetSpec::validate() const {
  if (p < 2) throw std::invalid_argument("dataset needs p >= 2");
  if (segments < 1 || seg_len < 1) throw std::invalid_argument("dataset needs segments, seg_len >= 1");
  if (graph == GraphModel::kBarabasiAlbert && (m < 1 || m >= p)) {
    throw std::invalid_argument("barabasi_albert needs 1 <= m < p");
  }
  if (graph == GraphModel::kWattsStrogatz && (k < 2 || k % 2 != 0 || k >= p)) {
    throw std::invalid_argument("watts_strogatz needs even k with 2 <= k < p");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (!(var_coeff >= 0.0 && var_coeff < 1.0)) throw std::invalid_argument("var_coeff must lie in [0, 1)");
}

long GroundTruth::total_length() const {
  long total = 0;
  for (const auto& s : segments) total += s.length;
  return total;
}

std::size_t GroundTruth::segment_at(long t) const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (t >= segments[i].start && t < segments[i].end()) return i;
  }
  throw std::out_of_range("time index " + std::to_string(t) + " outside ground truth");
}

std::vector<long> GroundTruth::change_points() const {
  std::vector<long> out;
  for (std::size_t i = 1; i < segments.size(); ++i) out.push_back(segments[i].start);
  return out;
}

SyntheticDataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  SyntheticDataset ds;
  ds.spec = spec;
  ds.truth.p = spec.p;
  ds.observations.resize(static_cast<Index>(spec.segments) * spec.seg_len, spec.p);

  Rng master(spec.seed);
  long start = 0;
  for (int s = 0; s < spec.segments; ++s) {
    Rng rng(master.next_u64());
    GroundTruthSegment seg;
    seg.start = start;
    seg.length = spec.seg_len;
    seg.graph = spec.graph == GraphModel::kBarabasiAlbert
                    ? barabasi_albert(spec.p, spec.m, rng)
                    : watts_strogatz(spec.p, spec.k, spec.beta, rng);
    auto pair = graph_to_precision(seg.graph, rng, spec.precision);
    seg.precision = std::move(pair.precision);
    seg.covariance = std::move(pair.covariance);
    ds.observations.middleRows(start, spec.seg_len) =
        var_segment(seg.precision, spec.seg_len, spec.var_coeff, rng);
    start += spec.seg_len;
    ds.truth.segments.push_back(std::move(seg));
  }
  return ds;
}

}  // namespace netstream
