#include "nettopo/infer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nettopo {

namespace {

const std::vector<Index> kEmpty;

void check_source(Index source, Index n) {
  if (source < 0 || source >= n) throw std::out_of_range("source node out of range");
}

void check_excitation(double e) {
  if (e == 0.0 || !std::isfinite(e)) throw std::invalid_argument("excitation must be finite and non-zero");
}

// Shared by the one-hop and multi-excitation tests so m = 1 reproduces the
// one-hop decision bit for bit.
NeighborDecision decide_one_hop(const Vector& deviation, double bound, Index source, double e,
                                double weight_floor, const DecisionRule& rule) {
  NeighborDecision out;
  out.source = source;
  out.deviation_bound = bound;
  const double threshold = bound + weight_floor * std::abs(e) / 2.0;
  out.thresholds[1] = threshold;
  auto& members = out.estimated_per_hop[1];
  for (Index i = 0; i < deviation.size(); ++i) {
    if (i == source) continue;
    out.raw_deviations[{i, 1}] = deviation(i);
    if (apply_statistic(rule.statistic, deviation(i), e) >= threshold) members.push_back(i);
  }
  return out;
}

}  // namespace

const std::vector<Index>& NeighborDecision::members(Index hop) const {
  const auto it = estimated_per_hop.find(hop);
  return it == estimated_per_hop.end() ? kEmpty : it->second;
}

bool NeighborDecision::contains(Index hop, Index node) const {
  const auto& m = members(hop);
  return std::find(m.begin(), m.end(), node) != m.end();
}

Index NeighborDecision::hop_of(Index node) const {
  for (const auto& [hop, nodes] : estimated_per_hop) {
    if (std::find(nodes.begin(), nodes.end(), node) != nodes.end()) return hop;
  }
  return 0;
}

double apply_statistic(Statistic s, double deviation, double e) {
  return s == Statistic::Absolute ? std::abs(deviation) : (e < 0.0 ? -deviation : deviation);
}

double drift_bound(const Vector& y_before, StabilityClass stability, DeviationBoundPolicy policy) {
  if (policy == DeviationBoundPolicy::SteadyState) return 0.0;
  return deviation_bound(y_before, stability);
}

NeighborDecision infer_one_hop(const Vector& y_before, const Vector& y_after, Index source, double e,
                               double weight_floor, StabilityClass stability,
                               const DecisionRule& rule) {
  check_excitation(e);
  if (y_before.size() != y_after.size()) throw std::invalid_argument("observation sizes differ");
  check_source(source, y_before.size());
  if (!(weight_floor > 0.0)) throw std::invalid_argument("weight floor must be > 0");
  const Vector deviation = y_after - y_before;
  return decide_one_hop(deviation, drift_bound(y_before, stability, rule.bound), source, e,
                        weight_floor, rule);
}

std::vector<double> default_gamma_floors(double weight_floor, Index max_hop) {
  if (!(weight_floor > 0.0)) throw std::invalid_argument("weight floor must be > 0");
  std::vector<double> floors;
  double g = 1.0;
  for (Index h = 1; h <= max_hop; ++h) {
    g *= weight_floor;
    floors.push_back(g);
  }
  return floors;
}

NeighborDecision infer_within_h(const Trajectory& traj, Index source, double e,
                                std::span<const double> gamma_floors, Index max_hop,
                                StabilityClass stability, const DecisionRule& rule) {
  check_excitation(e);
  check_source(source, traj.nodes());
  if (max_hop < 1) throw std::invalid_argument("max hop must be >= 1");
  if (static_cast<Index>(gamma_floors.size()) < max_hop) {
    throw std::invalid_argument("need one gamma floor per hop");
  }

  const ExcitationEvent* event = nullptr;
  for (const auto& ev : traj.excitations) {
    if (ev.node != source) continue;
    if (event) throw std::invalid_argument("trajectory holds more than one excitation of the source");
    event = &ev;
  }
  if (!event) throw std::invalid_argument("trajectory holds no excitation of the source");
  const Index t = event->time;
  if (t + max_hop > traj.horizon()) throw std::out_of_range("max hop exceeds the trajectory");

  const Vector y_t = traj.observation(t);
  NeighborDecision out;
  out.source = source;
  out.deviation_bound = drift_bound(y_t, stability, rule.bound);

  std::vector<bool> assigned(static_cast<std::size_t>(traj.nodes()), false);
  for (Index h = 1; h <= max_hop; ++h) {
    const double threshold =
        out.deviation_bound + gamma_floors[static_cast<std::size_t>(h - 1)] * std::abs(e) / 2.0;
    out.thresholds[h] = threshold;
    auto& members = out.estimated_per_hop[h];
    for (Index i = 0; i < traj.nodes(); ++i) {
      if (i == source) continue;
      const double dev = traj.observations(i, t + h) - y_t(i);
      out.raw_deviations[{i, h}] = dev;
      if (assigned[static_cast<std::size_t>(i)]) continue;
      if (apply_statistic(rule.statistic, dev, e) >= threshold) {
        members.push_back(i);
        assigned[static_cast<std::size_t>(i)] = true;
      }
    }
  }
  return out;
}

NeighborDecision infer_multi_excitation(std::span<const ObservationPair> trials, Index source,
                                        double e, double weight_floor, StabilityClass stability,
                                        const DecisionRule& rule) {
  check_excitation(e);
  if (trials.empty()) throw std::invalid_argument("multi-excitation test needs at least one trial");
  if (!(weight_floor > 0.0)) throw std::invalid_argument("weight floor must be > 0");
  const Index n = trials.front().before.size();
  check_source(source, n);

  Vector deviation = Vector::Zero(n);
  double bound = 0.0;
  for (const auto& trial : trials) {
    if (trial.before.size() != n || trial.after.size() != n) {
      throw std::invalid_argument("trial observations have inconsistent sizes");
    }
    deviation += trial.after - trial.before;
    bound += drift_bound(trial.before, stability, rule.bound);
  }
  const double m = static_cast<double>(trials.size());
  deviation /= m;
  bound /= m;
  return decide_one_hop(deviation, bound, source, e, weight_floor, rule);
}

}  // namespace nettopo
