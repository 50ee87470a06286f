#pragma once

#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include "decmm/common.hpp"

namespace decmm {

// Undirected connected agent graph. Edges are stored as (i, j) with i < j;
// neighbor lists are sorted and mutually consistent.
struct NetworkTopology {
  int m = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> neighbors;

  bool is_connected() const;
};

// Doubly stochastic symmetric mixing matrix with its second-largest
// eigenvalue magnitude lambda in [0, 1).
struct ConsensusMatrix {
  Mat entries;
  double lambda = 0.0;

  int size() const { return static_cast<int>(entries.rows()); }

  // c1 = (1 - lambda^2) / (1 + lambda^2), used by the step-size checker.
  double c1() const {
    const double l2 = lambda * lambda;
    return (1.0 - l2) / (1.0 + l2);
  }
};

// Draws Erdos-Renyi graphs until a connected one appears, advancing the
// seed between attempts. Deterministic given (m, p_c, seed). Throws after
// 10,000 disconnected draws, or when p_c is not in (0, 1].
NetworkTopology generate_erdos_renyi(int m, double p_c, std::uint64_t seed);

// M = I - (2 / (3 * lambda_max(L))) * L with L the graph Laplacian.
// For m = 1 returns [1] with lambda = 0.
ConsensusMatrix laplacian_consensus_matrix(const NetworkTopology& g);

// Second-largest eigenvalue magnitude of a doubly stochastic symmetric
// matrix. Validates the matrix and throws if lambda >= 1 - 1e-10 for m > 1.
double spectral_gap(const Mat& entries);

// Edge-list dump, one "i j" pair per line, 0-indexed.
void write_edge_list(const NetworkTopology& g, std::ostream& out);

}  // namespace decmm
