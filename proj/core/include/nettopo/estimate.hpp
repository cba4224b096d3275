#pragma once

#include <map>
#include <utility>
#include <vector>

#include "nettopo/dynamics.hpp"
#include "nettopo/infer.hpp"
#include "nettopo/topology.hpp"

namespace nettopo {

enum class EntryConstraint { Free, ForcedPositive, ForcedZero };

/// Observation pairs (y_{t-1}, y_t) and per-entry constraints on W_ij.
struct LsProblem {
  std::vector<ObservationPair> pairs;
  std::map<std::pair<Index, Index>, EntryConstraint> constraints;

  Index nodes() const;
  /// Throws unless there is at least one pair, every pair has the same
  /// dimension and all constraint indices are valid.
  void validate() const;
};

struct LsResult {
  Matrix estimate;
  Index rank{0};
  bool rank_deficient{false};
  /// ForcedPositive entries that came out exactly 0 (the closed program only
  /// enforces W_ij >= 0).
  std::vector<std::pair<Index, Index>> zero_at_forced_positive;
};

struct ErrorMetrics {
  double structure_error{0.0};  ///< eps_1
  double magnitude_error{0.0};  ///< eps_2
};

/// Consecutive observation pairs (y_{t-1}, y_t) for t in [first, last].
std::vector<ObservationPair> observation_pairs(const Trajectory& traj, Index first, Index last);

/// Row-wise minimum-norm least squares; rank deficiency is flagged.
LsResult ols_estimate(const LsProblem& problem);

/// Row-wise least squares with ForcedZero entries removed and ForcedPositive
/// entries kept nonnegative. A row without constraints is solved exactly as in
/// ols_estimate.
LsResult constrained_estimate(const LsProblem& problem);

/// Column-`source` constraints from a one-hop decision: accepted nodes are
/// ForcedPositive, the others ForcedZero. W_jj stays free.
std::map<std::pair<Index, Index>, EntryConstraint> constraints_from_decision(
    const NeighborDecision& decision, Index n);

/// eps_1 = #{sign(est) != sign(truth)} / n^2 with sign(x) = 0 for
/// |x| <= sign_tol, eps_2 = ||est - truth||_F / ||truth||_F.
ErrorMetrics error_metrics(const Matrix& estimate, const Matrix& truth, double sign_tol = 1e-6);

/// Sum of squared one-step residuals sum_t ||y_t - W y_{t-1}||^2.
double ls_objective(const LsProblem& problem, const Matrix& w);

}  // namespace nettopo
