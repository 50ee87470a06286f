#include <doctest.h>

#include <random>
#include <sstream>

#include "decmm/topology.hpp"

using namespace decmm;

TEST_CASE("erdos-renyi graphs are connected and deterministic") {
  const auto g1 = generate_erdos_renyi(5, 0.6, 42);
  const auto g2 = generate_erdos_renyi(5, 0.6, 42);
  CHECK(g1.m == 5);
  CHECK(g1.is_connected());
  CHECK(g1.edges == g2.edges);

  const auto g20 = generate_erdos_renyi(20, 0.5, 7);
  CHECK(g20.is_connected());
}

TEST_CASE("single-node graph is trivially connected") {
  const auto g = generate_erdos_renyi(1, 0.5, 0);
  CHECK(g.m == 1);
  CHECK(g.edges.empty());
  CHECK(g.is_connected());
}

TEST_CASE("neighbor lists are mutually consistent") {
  const auto g = generate_erdos_renyi(12, 0.4, 3);
  for (int i = 0; i < g.m; ++i) {
    for (int j : g.neighbors[i]) {
      CHECK(j != i);
      const auto& back = g.neighbors[j];
      CHECK(std::find(back.begin(), back.end(), i) != back.end());
    }
  }
  // no duplicate edges
  auto edges = g.edges;
  std::sort(edges.begin(), edges.end());
  CHECK(std::adjacent_find(edges.begin(), edges.end()) == edges.end());
}

TEST_CASE("invalid edge probability is rejected") {
  CHECK_THROWS_AS(generate_erdos_renyi(5, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_erdos_renyi(5, -0.2, 1), std::invalid_argument);
}

TEST_CASE("two-node complete graph mixing matrix") {
  NetworkTopology g;
  g.m = 2;
  g.edges = {{0, 1}};
  g.neighbors = {{1}, {0}};
  const auto cm = laplacian_consensus_matrix(g);
  // L = [[1,-1],[-1,1]], lambda_max = 2, M = I - (1/3) L
  CHECK(cm.entries(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(cm.entries(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(cm.lambda == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("three-node path mixing matrix") {
  NetworkTopology g;
  g.m = 3;
  g.edges = {{0, 1}, {1, 2}};
  g.neighbors = {{1}, {0, 2}, {1}};
  const auto cm = laplacian_consensus_matrix(g);
  // lambda_max(L) = 3, so M = I - (2/9) L with eigenvalues {1, 7/9, 1/3}
  Mat lap(3, 3);
  lap << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  const Mat expect = Mat::Identity(3, 3) - (2.0 / 9.0) * lap;
  CHECK((cm.entries - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(cm.lambda == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("single agent mixing matrix") {
  NetworkTopology g;
  g.m = 1;
  g.neighbors = {{}};
  const auto cm = laplacian_consensus_matrix(g);
  CHECK(cm.entries(0, 0) == 1.0);
  CHECK(cm.lambda == 0.0);
  CHECK(cm.c1() == 1.0);
}

TEST_CASE("spectral gap rejects invalid matrices") {
  CHECK(spectral_gap(Mat::Ones(1, 1)) == 0.0);
  // identity has lambda_2 = 1: disconnected mixing
  CHECK_THROWS(spectral_gap(Mat::Identity(2, 2)));
  Mat bad(2, 2);
  bad << 0.5, 0.4, 0.4, 0.5;
  CHECK_THROWS_AS(spectral_gap(bad), std::invalid_argument);
}

TEST_CASE("consensus matrix invariants on random graphs") {
  std::mt19937_64 seed_rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 3 + static_cast<int>(seed_rng() % 15);
    const auto g = generate_erdos_renyi(m, 0.5, seed_rng());
    const auto cm = laplacian_consensus_matrix(g);
    const Mat& M = cm.entries;
    for (int i = 0; i < m; ++i) {
      CHECK(std::abs(M.row(i).sum() - 1.0) < 1e-12);
      CHECK(std::abs(M.col(i).sum() - 1.0) < 1e-12);
    }
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cm.lambda >= 0.0);
    CHECK(cm.lambda < 1.0);
    // sparsity pattern matches the graph
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const bool adjacent =
            std::find(g.neighbors[i].begin(), g.neighbors[i].end(), j) !=
            g.neighbors[i].end();
        if (adjacent)
          CHECK(M(i, j) > 0.0);
        else
          CHECK(M(i, j) == 0.0);
      }
  }
}

TEST_CASE("mixing contracts disagreement and fixes consensus blocks") {
  std::mt19937_64 rng(5);
  const auto g = generate_erdos_renyi(8, 0.5, 11);
  const auto cm = laplacian_consensus_matrix(g);
  const int m = g.m, d = 4;

  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat z(m, d);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < d; ++k) z(i, k) = gauss(rng);

  const Mat mean = Mat::Ones(m, 1) * (z.colwise().mean());
  const Mat mixed = cm.entries * z;
  CHECK((mixed - mean).norm() <= cm.lambda * (z - mean).norm() + 1e-10);

  const Mat constant = Mat::Ones(m, 1) * z.row(0);
  CHECK((cm.entries * constant - constant).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("edge list dump") {
  NetworkTopology g;
  g.m = 3;
  g.edges = {{0, 1}, {1, 2}};
  g.neighbors = {{1}, {0, 2}, {1}};
  std::ostringstream out;
  write_edge_list(g, out);
  CHECK(out.str() == "0 1\n1 2\n");
}
