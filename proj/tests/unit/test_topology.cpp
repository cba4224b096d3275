#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <set>

#include "nettopo/detect.hpp"
#include "nettopo/topology.hpp"
#include "oracles.hpp"

using namespace nettopo;

namespace {

double max_abs_eigenvalue(const Matrix& w) {
  return Eigen::EigenSolver<Matrix>(w, false).eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXi adjacency(std::initializer_list<std::pair<int, int>> edges, int n) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n, n);
  for (auto [i, j] : edges) a(i, j) = 1;
  return a;
}

}  // namespace

TEST(RandomDigraph, CompleteGraphIsForced) {
  const WeightedDigraph g = generate_random_digraph(2, 1.0, 99);
  EXPECT_EQ(g.adjacency(), adjacency({{0, 1}, {1, 0}}, 2));
}

TEST(RandomDigraph, DeterministicPerSeed) {
  EXPECT_EQ(generate_random_digraph(20, 0.2, 7).adjacency(), generate_random_digraph(20, 0.2, 7).adjacency());
  EXPECT_NE(generate_random_digraph(20, 0.2, 7).adjacency(), generate_random_digraph(20, 0.2, 8).adjacency());
}

TEST(RandomDigraph, NoSelfLoopsAndEveryNodeListens) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const WeightedDigraph g = generate_random_digraph(20, 0.05, s);
    for (Index i = 0; i < 20; ++i) {
      EXPECT_EQ(g.adjacency()(i, i), 0);
      EXPECT_GE(g.in_degree(i), 1);
    }
  }
}

TEST(RandomDigraph, MeanEdgeCountMatchesBinomial) {
  // p = 0.2 leaves a row empty with probability 0.8^19 ~ 0.014; the repair
  // adds at most one edge per such row.
  const int seeds = 1000;
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) total += static_cast<double>(generate_random_digraph(20, 0.2, s).edge_count());
  const double mean = total / seeds;
  const double expected = 0.2 * 20 * 19 + 20 * std::pow(0.8, 19);
  const double sd = std::sqrt(20 * 19 * 0.2 * 0.8 / seeds);
  EXPECT_NEAR(mean, expected, 3.0 * sd);
}

TEST(RandomDigraph, RejectsBadArguments) {
  EXPECT_THROW(generate_random_digraph(1, 0.5, 0), std::invalid_argument);
  EXPECT_THROW(generate_random_digraph(5, 0.0, 0), std::invalid_argument);
  EXPECT_THROW(generate_random_digraph(5, 1.5, 0), std::invalid_argument);
}

TEST(Digraph, ValidatesAdjacency) {
  EXPECT_THROW(WeightedDigraph(Eigen::MatrixXi::Identity(2, 2)), std::invalid_argument);
  Eigen::MatrixXi bad = Eigen::MatrixXi::Zero(2, 2);
  bad(0, 1) = 2;
  EXPECT_THROW(WeightedDigraph{bad}, std::invalid_argument);
  EXPECT_THROW(WeightedDigraph(Eigen::MatrixXi::Zero(2, 3)), std::invalid_argument);
}

TEST(Laplacian, SingleEdge) {
  const TopologyMatrix w = weight_laplacian(WeightedDigraph(adjacency({{0, 1}}, 2)), 1.0);
  Matrix expected(2, 2);
  expected << 0, 1, 0, 1;
  EXPECT_EQ(w.matrix(), expected);
}

TEST(Laplacian, TwoWayEdgeHalfGain) {
  const TopologyMatrix w = weight_laplacian(WeightedDigraph(adjacency({{0, 1}, {1, 0}}, 2)), 0.5);
  EXPECT_EQ(w.matrix(), Matrix::Constant(2, 2, 0.5));
  EXPECT_EQ(w.stability(), StabilityClass::MarginallyStable);
}

TEST(Laplacian, RandomGraphsAreRowStochasticWithUnitRadius) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const TopologyMatrix w = weight_laplacian(generate_random_digraph(20, 0.2, s), 1.0);
    EXPECT_LE((w.matrix().rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_NEAR(max_abs_eigenvalue(w.matrix()), 1.0, 1e-9);
    EXPECT_TRUE(w.row_stochastic());
  }
}

TEST(Laplacian, MatchesFormula) {
  const WeightedDigraph g = generate_random_digraph(12, 0.3, 3);
  const TopologyMatrix w = weight_laplacian(g, 0.8);
  const double dmax = static_cast<double>(g.max_in_degree());
  for (Index i = 0; i < 12; ++i) {
    for (Index j = 0; j < 12; ++j) {
      if (i != j) {
        EXPECT_DOUBLE_EQ(w(i, j), 0.8 * g.adjacency()(i, j) / dmax);
      }
    }
  }
}

TEST(Metropolis, TwoWayEdge) {
  const TopologyMatrix w = weight_metropolis(WeightedDigraph(adjacency({{0, 1}, {1, 0}}, 2)));
  Matrix expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_EQ(w.matrix(), expected);
}

TEST(Metropolis, StarCentre) {
  // Centre 0 listens to three leaves, each leaf listens to the centre.
  const TopologyMatrix w =
      weight_metropolis(WeightedDigraph(adjacency({{0, 1}, {0, 2}, {0, 3}, {1, 0}, {2, 0}, {3, 0}}, 4)));
  for (int leaf = 1; leaf <= 3; ++leaf) {
    EXPECT_DOUBLE_EQ(w(0, leaf), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(w(leaf, 0), 1.0 / 3.0);
  }
}

TEST(Metropolis, RandomGraphsRowStochastic) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const TopologyMatrix w = weight_metropolis(generate_random_digraph(20, 0.2, s));
    EXPECT_LE((w.matrix().rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  }
}

TEST(Scaling, RadiusAndElementwise) {
  std::uint64_t s = 0;
  TopologyMatrix base;
  do base = weight_laplacian(generate_random_digraph(20, 0.2, s++), 0.9);
  while (base.stability() != StabilityClass::MarginallyStable);
  const TopologyMatrix scaled = scale_to_asymptotic(base, 0.9);
  EXPECT_NEAR(max_abs_eigenvalue(scaled.matrix()), 0.9, 1e-9);
  EXPECT_EQ(scaled.stability(), StabilityClass::AsymptoticallyStable);
  EXPECT_LE((scaled.matrix() - 0.9 * base.matrix()).cwiseAbs().maxCoeff(), 0.0);
  // Scaling is not re-applicable to an asymptotically stable matrix, so
  // associativity is checked on the raw products.
  EXPECT_LE((0.5 * (0.8 * base.matrix()) - 0.4 * base.matrix()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(scale_to_asymptotic(scaled, 0.5), std::invalid_argument);
  EXPECT_THROW(scale_to_asymptotic(base, 1.0), std::invalid_argument);
}

TEST(Stability, KnownCases) {
  EXPECT_EQ(classify_stability(0.5 * Matrix::Identity(3, 3)), StabilityClass::AsymptoticallyStable);
  EXPECT_EQ(classify_stability(Matrix::Identity(2, 2)), StabilityClass::Unstable);
  EXPECT_EQ(classify_stability(Matrix::Constant(2, 2, 0.5)), StabilityClass::MarginallyStable);
  EXPECT_EQ(classify_stability(1.1 * Matrix::Identity(2, 2)), StabilityClass::Unstable);
  Matrix rot(2, 2);
  rot << 0, 1, 1, 0;  // eigenvalues +1 and -1, each simple
  EXPECT_EQ(classify_stability(rot), StabilityClass::MarginallyStable);
}

TEST(Stability, DisconnectedLaplacianHasRepeatedUnitEigenvalue) {
  // Two separate 2-cycles give eigenvalue 1 twice.
  const TopologyMatrix w = weight_laplacian(WeightedDigraph(adjacency({{0, 1}, {1, 0}, {2, 3}, {3, 2}}, 4)), 0.5);
  EXPECT_EQ(w.stability(), StabilityClass::Unstable);
}

TEST(TopologyMatrixTest, ValidationAndFloor) {
  Matrix m(2, 2);
  m << 0.7, 0.3, 0.0, 1.0;
  const TopologyMatrix w = TopologyMatrix::from_matrix(m);
  EXPECT_DOUBLE_EQ(w.weight_floor(), 0.3);
  EXPECT_DOUBLE_EQ(w.min_offdiagonal_weight(), 0.3);
  m(1, 0) = -0.1;
  EXPECT_THROW(TopologyMatrix::from_matrix(m), std::invalid_argument);
  EXPECT_THROW(TopologyMatrix::from_matrix(Matrix::Zero(2, 2)), std::invalid_argument);
}

TEST(GammaPowers, RowSumsAndSquaredNorms) {
  const TopologyMatrix w = weight_laplacian(generate_random_digraph(20, 0.15, 4), 0.9);
  for (Index h = 0; h <= 10; ++h) {
    const Matrix g = transition_power(w.matrix(), h);
    EXPECT_LE((g.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_LE(g.rowwise().squaredNorm().maxCoeff(), 1.0 + 1e-12);
  }
}

TEST(HopSets, Chain) {
  const HopSets hs = true_hop_sets(WeightedDigraph(adjacency({{1, 0}, {2, 1}}, 3)), 0, 3);
  EXPECT_EQ(hs.per_hop[0], std::vector<Index>{1});
  EXPECT_EQ(hs.per_hop[1], std::vector<Index>{2});
  EXPECT_TRUE(hs.per_hop[2].empty());
  EXPECT_EQ(hs.hop_of(2), 2);
  EXPECT_EQ(hs.hop_of(0), 0);
}

TEST(HopSets, NoOutEdges) {
  const HopSets hs = true_hop_sets(WeightedDigraph(adjacency({{1, 0}, {2, 1}}, 3)), 2, 3);
  for (const auto& s : hs.per_hop) EXPECT_TRUE(s.empty());
}

TEST(HopSets, DisjointAndDifferenceOfReachable) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const WeightedDigraph g = generate_random_digraph(20, 0.1, s);
    const HopSets hs = true_hop_sets(g, static_cast<Index>(s % 20), 5);
    std::set<Index> seen;
    for (std::size_t h = 0; h < hs.per_hop.size(); ++h) {
      for (Index i : hs.per_hop[h]) EXPECT_TRUE(seen.insert(i).second);
      std::set<Index> reach(hs.reachable[h].begin(), hs.reachable[h].end());
      EXPECT_EQ(reach, seen);
    }
  }
}

TEST(HopSets, MatchMatrixPowerOracle) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const WeightedDigraph g = generate_random_digraph(8, 0.25, s);
    for (int j = 0; j < 8; ++j) {
      const auto dist = oracle::hop_distances_by_powers(g.adjacency(), j, 8);
      const HopSets hs = true_hop_sets(g, j, 8);
      for (Index i = 0; i < 8; ++i) EXPECT_EQ(hs.hop_of(i), dist[static_cast<std::size_t>(i)]) << i << " " << j;
    }
  }
}
