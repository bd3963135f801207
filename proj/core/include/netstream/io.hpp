#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netstream/synth.hpp"
#include "netstream/types.hpp"

namespace netstream::io {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

enum class RowKind { kData, kBlank, kMalformed };

struct ParsedRow {
  RowKind kind = RowKind::kBlank;
  Vector values;
};

/// Parses one observation row of comma- and/or whitespace-separated
/// decimals. Blank lines and lines starting with '#' are kBlank.
ParsedRow parse_row(std::string_view line);

/// Reads every data row; throws std::runtime_error on malformed rows or a
/// change in row width.
Matrix read_observations(std::istream& is);

/// Dataset text: a "# key=value,..." header line, then one row per
/// observation.
void write_dataset(std::ostream& os, const SyntheticDataset& ds);

/// Ground-truth sidecar (JSON): metadata, then per-segment spans, weighted
/// edge lists and full precision matrices.
void write_ground_truth(std::ostream& os, const SyntheticDataset& ds);
GroundTruth read_ground_truth(std::istream& is);

}  // namespace netstream::io
