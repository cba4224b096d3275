#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace nettopo {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerance used for every spectral decision (radius, multiplicity).
inline constexpr double kSpectralTolerance = 1e-9;

/// Directed interaction graph. adjacency(i, j) == 1 means node i uses
/// information from node j, i.e. the edge (i, j).
class WeightedDigraph {
public:
  WeightedDigraph() = default;
  explicit WeightedDigraph(Eigen::MatrixXi adjacency);

  Index size() const { return adjacency_.rows(); }
  const Eigen::MatrixXi& adjacency() const { return adjacency_; }
  bool has_edge(Index i, Index j) const { return adjacency_(i, j) != 0; }

  Index in_degree(Index i) const;
  Index out_degree(Index j) const;
  Index max_in_degree() const;
  Index edge_count() const;

  /// Nodes i with a_ij = 1, i.e. the one-hop out-neighbours of j.
  std::vector<Index> out_neighbors(Index j) const;

private:
  Eigen::MatrixXi adjacency_;
};

enum class StabilityClass { AsymptoticallyStable, MarginallyStable, Unstable };

const char* to_string(StabilityClass c);

/// Nonnegative interaction matrix W with its spectral class and the smallest
/// positive entry.
class TopologyMatrix {
public:
  TopologyMatrix() = default;

  /// Validates nonnegativity and classifies the spectrum.
  static TopologyMatrix from_matrix(Matrix w);

  Index size() const { return w_.rows(); }
  const Matrix& matrix() const { return w_; }
  double operator()(Index i, Index j) const { return w_(i, j); }
  StabilityClass stability() const { return stability_; }
  double weight_floor() const { return weight_floor_; }

  /// Smallest positive off-diagonal entry; 0 when W is diagonal.
  double min_offdiagonal_weight() const;
  bool row_stochastic(double tol = 1e-12) const;

private:
  Matrix w_;
  StabilityClass stability_{StabilityClass::Unstable};
  double weight_floor_{0.0};
};

/// Bernoulli(p) off-diagonal digraph. Rows left without an in-edge receive
/// one uniformly drawn in-edge so every node has in-degree >= 1.
WeightedDigraph generate_random_digraph(Index n, double edge_probability, std::uint64_t seed);

/// w_ij = gamma * a_ij / max_i d_i, w_ii closes the row to 1.
TopologyMatrix weight_laplacian(const WeightedDigraph& g, double gamma);

/// w_ij = a_ij / max(d_i, d_j), w_ii closes the row to 1.
TopologyMatrix weight_metropolis(const WeightedDigraph& g);

/// alpha * W for a marginally stable W; the result is asymptotically stable.
TopologyMatrix scale_to_asymptotic(const TopologyMatrix& w, double alpha);

/// Asymptotically stable iff rho(W) < 1 - tol. Marginally stable iff
/// |rho(W) - 1| <= tol and the eigenvalue 1 has geometric multiplicity one.
StabilityClass classify_stability(const Matrix& w, double tol = kSpectralTolerance);

double spectral_radius(const Matrix& w);

/// Exact-hop and cumulative out-neighbour sets of a source node.
/// per_hop[h - 1] holds N_{j,h}^out, reachable[h - 1] holds N_{j,h}^e.
struct HopSets {
  std::vector<std::vector<Index>> per_hop;
  std::vector<std::vector<Index>> reachable;

  /// Hop distance of node i, or 0 when i is not within the horizon.
  Index hop_of(Index i) const;
};

/// Breadth-first search along information flow: from u to every i with
/// a_iu = 1. The source itself never appears in any set.
HopSets true_hop_sets(const WeightedDigraph& g, Index source, Index max_hop);

}  // namespace nettopo
