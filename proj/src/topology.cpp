#include "decmm/topology.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace decmm {

namespace {

constexpr int kMaxRedraws = 10000;
constexpr double kStochasticTol = 1e-12;

std::vector<std::vector<int>> build_neighbor_lists(
    int m, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> nbrs(m);
  for (const auto& [i, j] : edges) {
    nbrs[i].push_back(j);
    nbrs[j].push_back(i);
  }
  for (auto& list : nbrs) std::sort(list.begin(), list.end());
  return nbrs;
}

}  // namespace

bool NetworkTopology::is_connected() const {
  if (m <= 1) return true;
  std::vector<char> seen(m, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : neighbors[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == m;
}

NetworkTopology generate_erdos_renyi(int m, double p_c, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("generate_erdos_renyi: m must be >= 1");
  if (!(p_c > 0.0) || p_c > 1.0)
    throw std::invalid_argument("generate_erdos_renyi: p_c must be in (0, 1]");

  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(attempt)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    NetworkTopology g;
    g.m = m;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (unif(rng) < p_c) g.edges.emplace_back(i, j);
    g.neighbors = build_neighbor_lists(m, g.edges);
    if (g.is_connected()) return g;
  }
  throw std::runtime_error(
      "generate_erdos_renyi: no connected graph after " +
      std::to_string(kMaxRedraws) + " redraws (p_c too small for m=" +
      std::to_string(m) + ")");
}

ConsensusMatrix laplacian_consensus_matrix(const NetworkTopology& g) {
  if (g.m < 1)
    throw std::invalid_argument("laplacian_consensus_matrix: empty topology");
  if (!g.is_connected())
    throw std::invalid_argument("laplacian_consensus_matrix: graph not connected");

  ConsensusMatrix cm;
  if (g.m == 1) {
    cm.entries = Mat::Ones(1, 1);
    cm.lambda = 0.0;
    return cm;
  }

  const int m = g.m;
  Mat lap = Mat::Zero(m, m);
  for (const auto& [i, j] : g.edges) {
    lap(i, j) -= 1.0;
    lap(j, i) -= 1.0;
    lap(i, i) += 1.0;
    lap(j, j) += 1.0;
  }

  Eigen::SelfAdjointEigenSolver<Mat> lap_eig(lap);
  if (lap_eig.info() != Eigen::Success)
    throw std::runtime_error("laplacian_consensus_matrix: eigensolver failed");
  const double lap_max = lap_eig.eigenvalues().maxCoeff();

  cm.entries = Mat::Identity(m, m) - (2.0 / (3.0 * lap_max)) * lap;
  cm.lambda = spectral_gap(cm.entries);
  return cm;
}

double spectral_gap(const Mat& entries) {
  const int m = static_cast<int>(entries.rows());
  if (m != entries.cols())
    throw std::invalid_argument("spectral_gap: matrix not square");
  if (!entries.isApprox(entries.transpose(), kStochasticTol))
    throw std::invalid_argument("spectral_gap: matrix not symmetric");
  for (int i = 0; i < m; ++i) {
    if (std::abs(entries.row(i).sum() - 1.0) > kStochasticTol ||
        std::abs(entries.col(i).sum() - 1.0) > kStochasticTol)
      throw std::invalid_argument("spectral_gap: matrix not doubly stochastic");
  }
  if (m == 1) return 0.0;

  Eigen::SelfAdjointEigenSolver<Mat> eig(entries);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("spectral_gap: eigensolver failed");
  const Vec evs = eig.eigenvalues();  // ascending
  const double lambda = std::max(std::abs(evs(0)), std::abs(evs(m - 2)));
  if (lambda >= 1.0 - 1e-10)
    throw std::runtime_error("spectral_gap: |lambda_2| >= 1, invalid mixing matrix");
  return lambda;
}

void write_edge_list(const NetworkTopology& g, std::ostream& out) {
  for (const auto& [i, j] : g.edges) out << i << ' ' << j << '\n';
}

}  // namespace decmm
