#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "nettopo/dynamics.hpp"
#include "nettopo/topology.hpp"

namespace nettopo {

/// Where the natural-drift bound Delta y^max comes from.
enum class DeviationBoundPolicy {
  Observed,     ///< deviation_bound() of the pre-excitation observation y_t
  SteadyState,  ///< zero: the drift is treated as part of the noise
};

/// Which deviation statistic is compared with the threshold.
enum class Statistic {
  Signed,    ///< sign(e) * (y_after - y_before); the one-sided likelihood-ratio test
  Absolute,  ///< |y_after - y_before|
};

struct DecisionRule {
  DeviationBoundPolicy bound{DeviationBoundPolicy::Observed};
  Statistic statistic{Statistic::Signed};
};

/// Outcome of the neighbour tests for one excited node. Hop keys start at 1.
struct NeighborDecision {
  Index source{0};
  std::map<Index, std::vector<Index>> estimated_per_hop;
  /// (node, hop) -> observed deviation y_{t+h}^i - y_t^i.
  std::map<std::pair<Index, Index>, double> raw_deviations;
  std::map<Index, double> thresholds;
  double deviation_bound{0.0};

  const std::vector<Index>& members(Index hop) const;
  bool contains(Index hop, Index node) const;
  /// Hop at which node was first accepted, 0 if never.
  Index hop_of(Index node) const;
};

/// An observation right before the excitation and one step after it.
struct ObservationPair {
  Vector before;
  Vector after;
};

double apply_statistic(Statistic s, double deviation, double e);

/// Delta y^max under the given policy.
double drift_bound(const Vector& y_before, StabilityClass stability, DeviationBoundPolicy policy);

/// One-hop test: i joins N_j^out iff the statistic of y_after^i - y_before^i
/// reaches Delta y^max + weight_floor |e| / 2 (ties accept). j is never a
/// candidate.
NeighborDecision infer_one_hop(const Vector& y_before, const Vector& y_after, Index source, double e,
                               double weight_floor, StabilityClass stability,
                               const DecisionRule& rule = {});

/// Default Gamma floors for hops 1..H: weight_floor^h.
std::vector<double> default_gamma_floors(double weight_floor, Index max_hop);

/// Within-h tests after the single excitation of `source` recorded in the
/// trajectory. Round h compares y_{t+h}^i - y_t^i with
/// Delta y_t^max + gamma_floors[h-1] |e| / 2 and a node is assigned to the
/// first hop that accepts it.
NeighborDecision infer_within_h(const Trajectory& traj, Index source, double e,
                                std::span<const double> gamma_floors, Index max_hop,
                                StabilityClass stability, const DecisionRule& rule = {});

/// Multi-excitation test: deviations and per-trial drift bounds are averaged
/// over the m trials before applying the one-hop threshold.
NeighborDecision infer_multi_excitation(std::span<const ObservationPair> trials, Index source,
                                        double e, double weight_floor, StabilityClass stability,
                                        const DecisionRule& rule = {});

}  // namespace nettopo
