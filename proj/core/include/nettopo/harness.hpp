#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "nettopo/infer.hpp"
#include "nettopo/io.hpp"
#include "nettopo/topology.hpp"

namespace nettopo {

enum class WeightRule { Laplacian, Metropolis, Scaled };

struct ExperimentConfig {
  Index n{20};
  double edge_probability{0.05};
  std::uint64_t graph_seed{1};
  Index trials{1000};
  NoiseModel noise{};
  WeightRule weight_rule{WeightRule::Laplacian};
  double gamma{0.9};        ///< Laplacian gain
  double scale_alpha{0.9};  ///< factor applied to the Laplacian W for the Scaled rule
  double weight_floor{0.4};
  /// Require every off-diagonal weight of the drawn W to reach weight_floor.
  bool require_floor{true};
  std::vector<double> delta_targets{0.05, 0.1, 0.2, 0.3};
  double alpha{0.05};
  Index max_hop{3};
  /// Fixed excitation magnitude; 0 means design it from the targets.
  double excitation{0.0};
  /// Excited node; -1 picks one automatically.
  Index source{-1};
  Index burn_in{50};
  /// x_0 is drawn uniformly from [-initial_range, initial_range]^n.
  double initial_range{100.0};
  DecisionRule rule{DeviationBoundPolicy::SteadyState, Statistic::Signed};
  std::uint64_t seed{2024};
  std::vector<Index> repetitions{1, 4, 16, 64};
  Index multi_trials{10000};
  double multi_delta{0.5};
  Index multi_burn_in{20};
  /// Number of (y_{t-1}, y_t) pairs for least squares; 0 means n + 5.
  Index ls_length{0};
  Index ls_seeds{50};
  double ls_delta{0.05};
  double sign_tol{1e-6};
  unsigned threads{0};

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
  StabilityClass target_stability() const;
};

/// Applies "key = value" overrides; unknown keys are rejected.
ExperimentConfig config_from_key_values(const io::KeyValues& kv, ExperimentConfig base = {});
io::KeyValues config_to_key_values(const ExperimentConfig& cfg);

struct NetworkSystem {
  std::uint64_t graph_seed{0};
  WeightedDigraph graph;
  TopologyMatrix w;
};

/// Weights a digraph with the configured rule.
TopologyMatrix apply_weight_rule(const WeightedDigraph& g, const ExperimentConfig& cfg);

/// Draws graphs from graph_seed upwards until W has the target stability
/// class, respects the weight floor (when required) and some node has
/// non-empty hop sets 1..max_hop.
NetworkSystem build_system(const ExperimentConfig& cfg, int max_attempts = 10000);

/// Node with the most one-hop out-neighbours (lowest index on ties).
Index pick_onehop_source(const NetworkSystem& sys);
/// Node with non-empty hop sets 1..H and the most nodes within H hops.
Index pick_multihop_source(const NetworkSystem& sys, Index max_hop);

/// sigma_bar_omega for the system's W and noise.
double design_sigma(const NetworkSystem& sys, const NoiseModel& noise);

/// Named numeric columns plus free-form metadata.
struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, std::string> meta;

  std::vector<double> column(const std::string& col) const;
  double at(std::size_t row, const std::string& col) const;
  void write_csv(std::ostream& os) const;
};

/// 1.96 sqrt(p (1 - p) / N) capped at 0.5.
double binomial_half_width(double p, Index count);

/// Columns: delta_target, theoretical, empirical, trials, half_width,
/// excitation, detection_rate, false_alarm_rate, exact_set_rate, decisions.
ResultTable run_onehop_accuracy(const ExperimentConfig& cfg);

/// Columns: hop, theoretical, empirical, trials, half_width, targets,
/// excitation, bound_min.
ResultTable run_multihop_accuracy(const ExperimentConfig& cfg);

/// Columns: repetitions, theoretical, empirical, trials, half_width,
/// false_alarm_rate, missed_detection_rate, excitation, sigma.
ResultTable run_multi_excitation_accuracy(const ExperimentConfig& cfg);

/// Columns: seed, ols_structure, ols_magnitude, constrained_structure,
/// constrained_magnitude, rank_deficient, excitation, accepted.
ResultTable run_ls_improvement(const ExperimentConfig& cfg);

}  // namespace nettopo
