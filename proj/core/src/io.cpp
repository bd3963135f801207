#include "netstream/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "json_matrix.hpp"
#include "netstream/linalg.hpp"

namespace netstream::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ParsedRow parse_row(std::string_view line) {
  ParsedRow row;
  std::size_t first = line.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos || line[first] == '#') return row;

  std::vector<double> values;
  std::size_t pos = first;
  const auto is_sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (pos < line.size()) {
    while (pos < line.size() && is_sep(line[pos])) {
      // Two commas in a row mean an empty field.
      if (line[pos] == ',') {
        std::size_t next = pos + 1;
        while (next < line.size() && (line[next] == ' ' || line[next] == '\t')) ++next;
        if (next < line.size() && line[next] == ',') {
          row.kind = RowKind::kMalformed;
          return row;
        }
      }
      ++pos;
    }
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !is_sep(line[end])) ++end;
    double v = 0.0;
    const char* begin = line.data() + pos;
    const char* stop = line.data() + end;
    if (*begin == '+') ++begin;
    const auto res = std::from_chars(begin, stop, v);
    if (res.ec != std::errc() || res.ptr != stop || !std::isfinite(v)) {
      row.kind = RowKind::kMalformed;
      return row;
    }
    values.push_back(v);
    pos = end;
  }
  if (values.empty()) return row;
  row.kind = RowKind::kData;
  row.values = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
  return row;
}

Matrix read_observations(std::istream& is) {
  std::vector<Vector> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto row = parse_row(line);
    if (row.kind == RowKind::kBlank) continue;
    if (row.kind == RowKind::kMalformed) {
      throw std::runtime_error("malformed row at line " + std::to_string(line_no));
    }
    if (!rows.empty() && row.values.size() != rows.front().size()) {
      throw std::runtime_error("row width changes at line " + std::to_string(line_no));
    }
    rows.push_back(std::move(row.values));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix x(static_cast<Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Index>(i)) = rows[i].transpose();
  return x;
}

void write_dataset(std::ostream& os, const SyntheticDataset& ds) {
  const auto& s = ds.spec;
  os << "# p=" << s.p << ",T=" << ds.observations.rows() << ",seed=" << s.seed
     << ",segments=" << s.segments << ",seg_len=" << s.seg_len << ",graph=" << to_string(s.graph)
     << ",m=" << s.m << ",k=" << s.k << ",beta=" << format_double(s.beta)
     << ",var_coeff=" << format_double(s.var_coeff) << ",var_order=1"
     << ",delta=" << format_double(s.precision.delta)
     << ",unit_diagonal=" << (s.precision.unit_diagonal ? 1 : 0) << '\n';
  for (Index t = 0; t < ds.observations.rows(); ++t) {
    for (Index j = 0; j < ds.observations.cols(); ++j) {
      if (j > 0) os << ',';
      os << format_double(ds.observations(t, j));
    }
    os << '\n';
  }
}

void write_ground_truth(std::ostream& os, const SyntheticDataset& ds) {
  nlohmann::ordered_json j;
  const auto& s = ds.spec;
  j["p"] = s.p;
  j["T"] = ds.observations.rows();
  j["seed"] = s.seed;
  j["graph"] = to_string(s.graph);
  j["m"] = s.m;
  j["k"] = s.k;
  j["beta"] = s.beta;
  j["var_coeff"] = s.var_coeff;
  j["var_order"] = 1;
  j["delta"] = s.precision.delta;
  j["unit_diagonal"] = s.precision.unit_diagonal;
  nlohmann::ordered_json segments = nlohmann::ordered_json::array();
  for (const auto& seg : ds.truth.segments) {
    nlohmann::ordered_json js;
    js["start"] = seg.start;
    js["end"] = seg.end();
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const auto& [a, b] : seg.graph.edges) edges.push_back({a, b, seg.precision(a, b)});
    js["edges"] = std::move(edges);
    js["precision"] = detail::to_json(seg.precision);
    segments.push_back(std::move(js));
  }
  j["segments"] = std::move(segments);
  os << j.dump() << '\n';
}

GroundTruth read_ground_truth(std::istream& is) {
  const auto j = nlohmann::json::parse(is);
  GroundTruth truth;
  truth.p = j.at("p").get<int>();
  for (const auto& js : j.at("segments")) {
    GroundTruthSegment seg;
    seg.start = js.at("start").get<long>();
    seg.length = js.at("end").get<long>() - seg.start;
    seg.graph.nodes = truth.p;
    for (const auto& e : js.at("edges")) {
      int a = e.at(0).get<int>(), b = e.at(1).get<int>();
      if (a > b) std::swap(a, b);
      seg.graph.edges.emplace_back(a, b);
    }
    std::sort(seg.graph.edges.begin(), seg.graph.edges.end());
    seg.precision = detail::matrix_from_json(js.at("precision"));
    auto cov = linalg::spd_inverse(seg.precision);
    if (!cov) throw SingularMatrixError("ground truth precision is not positive definite");
    seg.covariance = std::move(*cov);
    truth.segments.push_back(std::move(seg));
  }
  return truth;
}

}  // namespace netstream::io
