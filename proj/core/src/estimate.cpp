#include "nettopo/estimate.hpp"

#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

#include "nettopo/nnls.hpp"

namespace nettopo {

namespace {

struct Stacked {
  Matrix x;  // T x n, row t = y_{t-1}^T
  Matrix y;  // T x n, row t = y_t^T
};

Stacked stack(const LsProblem& p) {
  const Index n = p.nodes();
  const Index rows = static_cast<Index>(p.pairs.size());
  Stacked s{Matrix(rows, n), Matrix(rows, n)};
  for (Index t = 0; t < rows; ++t) {
    s.x.row(t) = p.pairs[static_cast<std::size_t>(t)].before.transpose();
    s.y.row(t) = p.pairs[static_cast<std::size_t>(t)].after.transpose();
  }
  return s;
}

EntryConstraint constraint_of(const LsProblem& p, Index i, Index j) {
  const auto it = p.constraints.find({i, j});
  return it == p.constraints.end() ? EntryConstraint::Free : it->second;
}

}  // namespace

Index LsProblem::nodes() const {
  return pairs.empty() ? 0 : pairs.front().before.size();
}

void LsProblem::validate() const {
  if (pairs.empty()) throw std::invalid_argument("least squares needs at least one observation pair");
  const Index n = nodes();
  if (n < 1) throw std::invalid_argument("observation pairs are empty vectors");
  for (const auto& pr : pairs) {
    if (pr.before.size() != n || pr.after.size() != n) {
      throw std::invalid_argument("observation pairs have inconsistent dimensions");
    }
    if (!pr.before.allFinite() || !pr.after.allFinite()) {
      throw std::invalid_argument("observation pairs must be finite");
    }
  }
  for (const auto& [ij, c] : constraints) {
    (void)c;
    if (ij.first < 0 || ij.first >= n || ij.second < 0 || ij.second >= n) {
      throw std::out_of_range("constraint index out of range");
    }
  }
}

std::vector<ObservationPair> observation_pairs(const Trajectory& traj, Index first, Index last) {
  if (first < 1 || last > traj.horizon() || first > last) {
    throw std::out_of_range("observation pair range outside the trajectory");
  }
  std::vector<ObservationPair> out;
  out.reserve(static_cast<std::size_t>(last - first + 1));
  for (Index t = first; t <= last; ++t) out.push_back({traj.observation(t - 1), traj.observation(t)});
  return out;
}

LsResult ols_estimate(const LsProblem& problem) {
  LsProblem unconstrained{problem.pairs, {}};
  return constrained_estimate(unconstrained);
}

LsResult constrained_estimate(const LsProblem& problem) {
  problem.validate();
  const Index n = problem.nodes();
  const Stacked s = stack(problem);
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(s.x);

  LsResult out;
  out.estimate = Matrix::Zero(n, n);
  out.rank = cod.rank();
  out.rank_deficient = out.rank < n;

  // Rows are independent; n is small enough that a serial loop wins.
  auto solve_row = [&](Index i) {
    std::vector<Index> cols;
    std::vector<bool> nonneg;
    bool constrained = false;
    for (Index j = 0; j < n; ++j) {
      const EntryConstraint c = constraint_of(problem, i, j);
      if (c != EntryConstraint::Free) constrained = true;
      if (c == EntryConstraint::ForcedZero) continue;
      cols.push_back(j);
      nonneg.push_back(c == EntryConstraint::ForcedPositive);
    }
    const Vector b = s.y.col(i);
    if (!constrained) {
      out.estimate.row(i) = cod.solve(b).transpose();
      return;
    }
    if (cols.empty()) return;
    Matrix sub(s.x.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Index>(c)) = s.x.col(cols[c]);
    const Vector w = solve_mixed_nnls(sub, b, nonneg).x;
    for (std::size_t c = 0; c < cols.size(); ++c) out.estimate(i, cols[c]) = w(static_cast<Index>(c));
  };
  for (Index i = 0; i < n; ++i) solve_row(i);

  for (const auto& [ij, c] : problem.constraints) {
    if (c == EntryConstraint::ForcedPositive && out.estimate(ij.first, ij.second) == 0.0) {
      out.zero_at_forced_positive.push_back(ij);
    }
  }
  return out;
}

std::map<std::pair<Index, Index>, EntryConstraint> constraints_from_decision(
    const NeighborDecision& decision, Index n) {
  const Index j = decision.source;
  if (j < 0 || j >= n) throw std::out_of_range("decision source out of range");
  std::map<std::pair<Index, Index>, EntryConstraint> out;
  for (Index i = 0; i < n; ++i) {
    if (i == j) continue;
    out[{i, j}] = decision.contains(1, i) ? EntryConstraint::ForcedPositive : EntryConstraint::ForcedZero;
  }
  return out;
}

ErrorMetrics error_metrics(const Matrix& estimate, const Matrix& truth, double sign_tol) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw std::invalid_argument("error metrics need matrices of the same shape");
  }
  if (!(sign_tol >= 0.0)) throw std::invalid_argument("sign tolerance must be >= 0");
  const double norm = truth.norm();
  if (norm == 0.0) throw std::invalid_argument("relative error against a zero matrix");
  auto sgn = [sign_tol](double v) { return std::abs(v) <= sign_tol ? 0 : (v > 0.0 ? 1 : -1); };
  Index mismatched = 0;
  for (Index i = 0; i < truth.rows(); ++i) {
    for (Index j = 0; j < truth.cols(); ++j) {
      if (sgn(estimate(i, j)) != sgn(truth(i, j))) ++mismatched;
    }
  }
  ErrorMetrics m;
  m.structure_error = static_cast<double>(mismatched) / static_cast<double>(truth.size());
  m.magnitude_error = (estimate - truth).norm() / norm;
  return m;
}

double ls_objective(const LsProblem& problem, const Matrix& w) {
  problem.validate();
  if (w.rows() != problem.nodes() || w.cols() != problem.nodes()) {
    throw std::invalid_argument("matrix does not match the problem size");
  }
  double total = 0.0;
  for (const auto& pr : problem.pairs) total += (pr.after - w * pr.before).squaredNorm();
  return total;
}

}  // namespace nettopo
