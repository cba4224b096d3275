#include "nettopo/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace nettopo {

namespace {

// Diagonal closures that land within this distance of zero are snapped to it.
constexpr double kClosureSnap = 1e-14;

void close_rows(Matrix& w) {
  for (Index i = 0; i < w.rows(); ++i) {
    double off = 0.0;
    for (Index j = 0; j < w.cols(); ++j) {
      if (j != i) off += w(i, j);
    }
    double diag = 1.0 - off;
    if (std::abs(diag) < kClosureSnap) diag = 0.0;
    if (diag < 0.0) {
      throw std::logic_error("weight rule produced a negative self-weight in row " +
                             std::to_string(i));
    }
    w(i, i) = diag;
  }
}

}  // namespace

WeightedDigraph::WeightedDigraph(Eigen::MatrixXi adjacency) : adjacency_(std::move(adjacency)) {
  if (adjacency_.rows() != adjacency_.cols()) {
    throw std::invalid_argument("adjacency matrix must be square");
  }
  for (Index i = 0; i < adjacency_.rows(); ++i) {
    for (Index j = 0; j < adjacency_.cols(); ++j) {
      const int a = adjacency_(i, j);
      if (a != 0 && a != 1) throw std::invalid_argument("adjacency entries must be 0 or 1");
      if (i == j && a != 0) throw std::invalid_argument("adjacency diagonal must be zero");
    }
  }
}

Index WeightedDigraph::in_degree(Index i) const { return adjacency_.row(i).sum(); }

Index WeightedDigraph::out_degree(Index j) const { return adjacency_.col(j).sum(); }

Index WeightedDigraph::max_in_degree() const {
  return size() == 0 ? 0 : adjacency_.rowwise().sum().maxCoeff();
}

Index WeightedDigraph::edge_count() const { return adjacency_.sum(); }

std::vector<Index> WeightedDigraph::out_neighbors(Index j) const {
  std::vector<Index> out;
  for (Index i = 0; i < size(); ++i) {
    if (adjacency_(i, j) != 0) out.push_back(i);
  }
  return out;
}

const char* to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::AsymptoticallyStable: return "asymptotically_stable";
    case StabilityClass::MarginallyStable: return "marginally_stable";
    case StabilityClass::Unstable: return "unstable";
  }
  return "unknown";
}

TopologyMatrix TopologyMatrix::from_matrix(Matrix w) {
  if (w.rows() != w.cols() || w.rows() == 0) {
    throw std::invalid_argument("topology matrix must be square and non-empty");
  }
  if (!w.allFinite()) throw std::invalid_argument("topology matrix has non-finite entries");
  if ((w.array() < 0.0).any()) throw std::invalid_argument("topology matrix entries must be >= 0");

  double floor = 0.0;
  for (Index k = 0; k < w.size(); ++k) {
    const double v = w.data()[k];
    if (v > 0.0 && (floor == 0.0 || v < floor)) floor = v;
  }
  if (floor == 0.0) throw std::invalid_argument("topology matrix has no positive entry");

  TopologyMatrix out;
  out.stability_ = classify_stability(w);
  out.weight_floor_ = floor;
  out.w_ = std::move(w);
  return out;
}

double TopologyMatrix::min_offdiagonal_weight() const {
  double floor = 0.0;
  for (Index i = 0; i < w_.rows(); ++i) {
    for (Index j = 0; j < w_.cols(); ++j) {
      const double v = w_(i, j);
      if (i != j && v > 0.0 && (floor == 0.0 || v < floor)) floor = v;
    }
  }
  return floor;
}

bool TopologyMatrix::row_stochastic(double tol) const {
  return ((w_.rowwise().sum().array() - 1.0).abs() <= tol).all();
}

WeightedDigraph generate_random_digraph(Index n, double edge_probability, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random digraph needs n >= 2");
  if (!(edge_probability > 0.0 && edge_probability <= 1.0)) {
    throw std::invalid_argument("edge probability must lie in (0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(edge_probability);
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i != j && coin(rng)) a(i, j) = 1;
    }
  }
  std::uniform_int_distribution<Index> pick(0, n - 2);
  for (Index i = 0; i < n; ++i) {
    if (a.row(i).sum() == 0) {
      Index j = pick(rng);
      if (j >= i) ++j;
      a(i, j) = 1;
    }
  }
  return WeightedDigraph(std::move(a));
}

TopologyMatrix weight_laplacian(const WeightedDigraph& g, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  const Index dmax = g.max_in_degree();
  if (dmax < 1) throw std::invalid_argument("Laplacian rule needs at least one edge");
  Matrix w = g.adjacency().cast<double>() * (gamma / static_cast<double>(dmax));
  close_rows(w);
  return TopologyMatrix::from_matrix(std::move(w));
}

TopologyMatrix weight_metropolis(const WeightedDigraph& g) {
  const Index n = g.size();
  if (g.max_in_degree() < 1) throw std::invalid_argument("Metropolis rule needs at least one edge");
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const Index di = g.in_degree(i);
    for (Index j = 0; j < n; ++j) {
      if (g.has_edge(i, j)) {
        w(i, j) = 1.0 / static_cast<double>(std::max(di, g.in_degree(j)));
      }
    }
  }
  close_rows(w);
  return TopologyMatrix::from_matrix(std::move(w));
}

TopologyMatrix scale_to_asymptotic(const TopologyMatrix& w, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (w.stability() != StabilityClass::MarginallyStable) {
    throw std::invalid_argument("scale_to_asymptotic expects a marginally stable matrix");
  }
  return TopologyMatrix::from_matrix(alpha * w.matrix());
}

double spectral_radius(const Matrix& w) {
  if (w.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(w, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

StabilityClass classify_stability(const Matrix& w, double tol) {
  if (w.rows() != w.cols()) throw std::invalid_argument("stability needs a square matrix");
  const double rho = spectral_radius(w);
  if (rho < 1.0 - tol) return StabilityClass::AsymptoticallyStable;
  if (std::abs(rho - 1.0) > tol) return StabilityClass::Unstable;

  // Geometric multiplicity of eigenvalue 1 = dim ker(W - I).
  const Matrix shifted = w - Matrix::Identity(w.rows(), w.cols());
  Eigen::JacobiSVD<Matrix> svd(shifted);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() > 0 ? s(0) : 0.0);
  Index nullity = 0;
  for (Index k = 0; k < s.size(); ++k) {
    if (s(k) <= tol * scale) ++nullity;
  }
  return nullity == 1 ? StabilityClass::MarginallyStable : StabilityClass::Unstable;
}

Index HopSets::hop_of(Index i) const {
  for (std::size_t h = 0; h < per_hop.size(); ++h) {
    if (std::find(per_hop[h].begin(), per_hop[h].end(), i) != per_hop[h].end()) {
      return static_cast<Index>(h) + 1;
    }
  }
  return 0;
}

HopSets true_hop_sets(const WeightedDigraph& g, Index source, Index max_hop) {
  const Index n = g.size();
  if (source < 0 || source >= n) throw std::out_of_range("source node out of range");
  if (max_hop < 0) throw std::invalid_argument("max hop must be >= 0");

  std::vector<Index> dist(static_cast<std::size_t>(n), -1);
  dist[static_cast<std::size_t>(source)] = 0;
  std::deque<Index> queue{source};
  while (!queue.empty()) {
    const Index u = queue.front();
    queue.pop_front();
    if (dist[static_cast<std::size_t>(u)] == max_hop) continue;
    for (Index i = 0; i < n; ++i) {
      if (g.has_edge(i, u) && dist[static_cast<std::size_t>(i)] < 0) {
        dist[static_cast<std::size_t>(i)] = dist[static_cast<std::size_t>(u)] + 1;
        queue.push_back(i);
      }
    }
  }

  HopSets sets;
  sets.per_hop.resize(static_cast<std::size_t>(max_hop));
  sets.reachable.resize(static_cast<std::size_t>(max_hop));
  for (Index i = 0; i < n; ++i) {
    const Index d = dist[static_cast<std::size_t>(i)];
    if (d >= 1) sets.per_hop[static_cast<std::size_t>(d - 1)].push_back(i);
  }
  std::vector<Index> cumulative;
  for (std::size_t h = 0; h < sets.per_hop.size(); ++h) {
    cumulative.insert(cumulative.end(), sets.per_hop[h].begin(), sets.per_hop[h].end());
    std::sort(cumulative.begin(), cumulative.end());
    sets.reachable[h] = cumulative;
  }
  return sets;
}

}  // namespace nettopo
