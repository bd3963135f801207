#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace netstream {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Undirected weighted edge, stored with i < j.
struct Edge {
  int i = 0;
  int j = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Unweighted edge support, pairs stored with first < second.
using EdgeSet = std::set<std::pair<int, int>>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace netstream
