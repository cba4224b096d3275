#include "nettopo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nettopo/detect.hpp"
#include "nettopo/estimate.hpp"
#include "nettopo/parallel.hpp"
#include "nettopo/random.hpp"

namespace nettopo {

namespace {

// Independent seed streams per experiment.
enum : std::uint64_t { kOneHopStream = 1, kMultiHopStream = 2, kMultiStream = 3, kLsStream = 4 };

bool open_unit(double p) { return p > 0.0 && p < 1.0; }

double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument("config " + key + ": not a number: '" + v + "'");
  return out;
}

long long parse_integer(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument("config " + key + ": not an integer: '" + v + "'");
  return out;
}

std::uint64_t parse_seed(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || v.front() == '-') {
    throw std::invalid_argument("config " + key + ": not a seed: '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config " + key + ": not a boolean: '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
  return os.str();
}

std::string real_text(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

const char* rule_name(WeightRule r) {
  switch (r) {
    case WeightRule::Laplacian: return "laplacian";
    case WeightRule::Metropolis: return "metropolis";
    case WeightRule::Scaled: return "scaled";
  }
  return "?";
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, std::uint64_t stream, std::uint64_t k) {
  return derive_seed(derive_seed(cfg.seed, stream), k);
}

Vector initial_state(Index n, double range, std::uint64_t seed) {
  if (range == 0.0) return Vector::Zero(n);
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::uniform_real_distribution<double> u(-range, range);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = u(rng);
  return x;
}

// Burn-in, one excitation of `node` at step `at`, then `after` more steps.
Trajectory excited_run(const NetworkSystem& sys, const ExperimentConfig& cfg, Index node, Index at,
                       Index after, double e, std::uint64_t seed) {
  ExcitationPlan plan{node, at, e, 1};
  return simulate(sys.w, initial_state(sys.w.size(), cfg.initial_range, seed), at + after, cfg.noise,
                  plan, derive_seed(seed, 1));
}

Index resolve_source(const ExperimentConfig& cfg, const NetworkSystem& sys, Index automatic) {
  const Index j = cfg.source >= 0 ? cfg.source : automatic;
  if (j < 0 || j >= sys.w.size()) throw std::invalid_argument("source node out of range");
  return j;
}

double require_excitation(double e) {
  if (e == 0.0) {
    throw std::invalid_argument("designed excitation is zero (noise-free model); set excitation explicitly");
  }
  return e;
}

void add_common_meta(ResultTable& t, const ExperimentConfig& cfg, const NetworkSystem& sys, Index source) {
  t.meta["graph_seed"] = std::to_string(sys.graph_seed);
  t.meta["source"] = std::to_string(source);
  t.meta["n"] = std::to_string(sys.w.size());
  t.meta["weight_rule"] = rule_name(cfg.weight_rule);
  t.meta["stability"] = to_string(sys.w.stability());
  t.meta["deviation_bound"] =
      cfg.rule.bound == DeviationBoundPolicy::Observed ? "observed" : "steady_state";
  t.meta["statistic"] = cfg.rule.statistic == Statistic::Signed ? "signed" : "absolute";
  t.meta["seed"] = std::to_string(cfg.seed);
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  if (n < 2) fail("n must be >= 2");
  if (!(edge_probability > 0.0 && edge_probability <= 1.0)) fail("edge_probability must lie in (0, 1]");
  if (trials < 1) fail("trials must be >= 1");
  noise.validate();
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must lie in (0, 1]");
  if (!open_unit(scale_alpha)) fail("scale_alpha must lie in (0, 1)");
  if (!(weight_floor > 0.0 && weight_floor <= 1.0)) fail("weight_floor must lie in (0, 1]");
  if (delta_targets.empty()) fail("delta_targets must not be empty");
  for (double d : delta_targets) {
    if (!open_unit(d)) fail("every delta target must lie in (0, 1)");
  }
  if (!(alpha > 0.0 && alpha < 0.5)) fail("alpha must lie in (0, 0.5)");
  if (max_hop < 1) fail("max_hop must be >= 1");
  if (!std::isfinite(excitation)) fail("excitation must be finite");
  if (source < -1 || source >= n) fail("source must be -1 or a node index");
  if (burn_in < 0 || multi_burn_in < 0) fail("burn-in must be >= 0");
  if (!(initial_range >= 0.0) || !std::isfinite(initial_range)) fail("initial_range must be >= 0");
  if (repetitions.empty()) fail("repetitions must not be empty");
  for (Index m : repetitions) {
    if (m < 1) fail("every repetition count must be >= 1");
  }
  if (multi_trials < 1) fail("multi_trials must be >= 1");
  if (!open_unit(multi_delta)) fail("multi_delta must lie in (0, 1)");
  if (ls_length < 0) fail("ls_length must be >= 0");
  if (ls_seeds < 1) fail("ls_seeds must be >= 1");
  if (!open_unit(ls_delta)) fail("ls_delta must lie in (0, 1)");
  if (!(sign_tol >= 0.0)) fail("sign_tol must be >= 0");
}

StabilityClass ExperimentConfig::target_stability() const {
  return weight_rule == WeightRule::Scaled ? StabilityClass::AsymptoticallyStable
                                           : StabilityClass::MarginallyStable;
}

ExperimentConfig config_from_key_values(const io::KeyValues& kv, ExperimentConfig cfg) {
  for (const auto& [key, v] : kv) {
    if (key == "n") cfg.n = static_cast<Index>(parse_integer(key, v));
    else if (key == "edge_probability") cfg.edge_probability = parse_real(key, v);
    else if (key == "graph_seed") cfg.graph_seed = parse_seed(key, v);
    else if (key == "trials") cfg.trials = static_cast<Index>(parse_integer(key, v));
    else if (key == "sigma_theta") cfg.noise.sigma_theta = parse_real(key, v);
    else if (key == "sigma_upsilon") cfg.noise.sigma_upsilon = parse_real(key, v);
    else if (key == "weight_rule") {
      if (v == "laplacian") cfg.weight_rule = WeightRule::Laplacian;
      else if (v == "metropolis") cfg.weight_rule = WeightRule::Metropolis;
      else if (v == "scaled") cfg.weight_rule = WeightRule::Scaled;
      else throw std::invalid_argument("config weight_rule: expected laplacian|metropolis|scaled");
    } else if (key == "gamma") cfg.gamma = parse_real(key, v);
    else if (key == "scale_alpha") cfg.scale_alpha = parse_real(key, v);
    else if (key == "weight_floor") cfg.weight_floor = parse_real(key, v);
    else if (key == "require_floor") cfg.require_floor = parse_bool(key, v);
    else if (key == "delta_targets") {
      cfg.delta_targets.clear();
      for (const auto& item : split_list(v)) cfg.delta_targets.push_back(parse_real(key, item));
    } else if (key == "alpha") cfg.alpha = parse_real(key, v);
    else if (key == "max_hop") cfg.max_hop = static_cast<Index>(parse_integer(key, v));
    else if (key == "excitation") cfg.excitation = parse_real(key, v);
    else if (key == "source") cfg.source = static_cast<Index>(parse_integer(key, v));
    else if (key == "burn_in") cfg.burn_in = static_cast<Index>(parse_integer(key, v));
    else if (key == "initial_range") cfg.initial_range = parse_real(key, v);
    else if (key == "deviation_bound") {
      if (v == "observed") cfg.rule.bound = DeviationBoundPolicy::Observed;
      else if (v == "steady_state") cfg.rule.bound = DeviationBoundPolicy::SteadyState;
      else throw std::invalid_argument("config deviation_bound: expected observed|steady_state");
    } else if (key == "statistic") {
      if (v == "signed") cfg.rule.statistic = Statistic::Signed;
      else if (v == "absolute") cfg.rule.statistic = Statistic::Absolute;
      else throw std::invalid_argument("config statistic: expected signed|absolute");
    } else if (key == "seed") cfg.seed = parse_seed(key, v);
    else if (key == "repetitions") {
      cfg.repetitions.clear();
      for (const auto& item : split_list(v)) cfg.repetitions.push_back(static_cast<Index>(parse_integer(key, item)));
    } else if (key == "multi_trials") cfg.multi_trials = static_cast<Index>(parse_integer(key, v));
    else if (key == "multi_delta") cfg.multi_delta = parse_real(key, v);
    else if (key == "multi_burn_in") cfg.multi_burn_in = static_cast<Index>(parse_integer(key, v));
    else if (key == "ls_length") cfg.ls_length = static_cast<Index>(parse_integer(key, v));
    else if (key == "ls_seeds") cfg.ls_seeds = static_cast<Index>(parse_integer(key, v));
    else if (key == "ls_delta") cfg.ls_delta = parse_real(key, v);
    else if (key == "sign_tol") cfg.sign_tol = parse_real(key, v);
    else if (key == "threads") cfg.threads = static_cast<unsigned>(parse_integer(key, v));
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

io::KeyValues config_to_key_values(const ExperimentConfig& cfg) {
  io::KeyValues kv;
  kv["n"] = std::to_string(cfg.n);
  kv["edge_probability"] = real_text(cfg.edge_probability);
  kv["graph_seed"] = std::to_string(cfg.graph_seed);
  kv["trials"] = std::to_string(cfg.trials);
  kv["sigma_theta"] = real_text(cfg.noise.sigma_theta);
  kv["sigma_upsilon"] = real_text(cfg.noise.sigma_upsilon);
  kv["weight_rule"] = rule_name(cfg.weight_rule);
  kv["gamma"] = real_text(cfg.gamma);
  kv["scale_alpha"] = real_text(cfg.scale_alpha);
  kv["weight_floor"] = real_text(cfg.weight_floor);
  kv["require_floor"] = cfg.require_floor ? "true" : "false";
  kv["delta_targets"] = join(cfg.delta_targets);
  kv["alpha"] = real_text(cfg.alpha);
  kv["max_hop"] = std::to_string(cfg.max_hop);
  kv["excitation"] = real_text(cfg.excitation);
  kv["source"] = std::to_string(cfg.source);
  kv["burn_in"] = std::to_string(cfg.burn_in);
  kv["initial_range"] = real_text(cfg.initial_range);
  kv["deviation_bound"] = cfg.rule.bound == DeviationBoundPolicy::Observed ? "observed" : "steady_state";
  kv["statistic"] = cfg.rule.statistic == Statistic::Signed ? "signed" : "absolute";
  kv["seed"] = std::to_string(cfg.seed);
  kv["repetitions"] = join(cfg.repetitions);
  kv["multi_trials"] = std::to_string(cfg.multi_trials);
  kv["multi_delta"] = real_text(cfg.multi_delta);
  kv["multi_burn_in"] = std::to_string(cfg.multi_burn_in);
  kv["ls_length"] = std::to_string(cfg.ls_length);
  kv["ls_seeds"] = std::to_string(cfg.ls_seeds);
  kv["ls_delta"] = real_text(cfg.ls_delta);
  kv["sign_tol"] = real_text(cfg.sign_tol);
  kv["threads"] = std::to_string(cfg.threads);
  return kv;
}

TopologyMatrix apply_weight_rule(const WeightedDigraph& g, const ExperimentConfig& cfg) {
  switch (cfg.weight_rule) {
    case WeightRule::Laplacian: return weight_laplacian(g, cfg.gamma);
    case WeightRule::Metropolis: return weight_metropolis(g);
    case WeightRule::Scaled: return scale_to_asymptotic(weight_laplacian(g, cfg.gamma), cfg.scale_alpha);
  }
  throw std::invalid_argument("unknown weight rule");
}

NetworkSystem build_system(const ExperimentConfig& cfg, int max_attempts) {
  cfg.validate();
  const StabilityClass target = cfg.target_stability();
  for (int k = 0; k < max_attempts; ++k) {
    const std::uint64_t s = cfg.graph_seed + static_cast<std::uint64_t>(k);
    NetworkSystem sys;
    sys.graph_seed = s;
    sys.graph = generate_random_digraph(cfg.n, cfg.edge_probability, s);
    try {
      sys.w = apply_weight_rule(sys.graph, cfg);
    } catch (const std::invalid_argument&) {
      continue;  // e.g. a Laplacian W that is not marginally stable cannot be scaled
    }
    if (sys.w.stability() != target) continue;
    if (cfg.require_floor && sys.w.min_offdiagonal_weight() < cfg.weight_floor) continue;
    if (pick_multihop_source(sys, cfg.max_hop) < 0) continue;
    return sys;
  }
  throw std::runtime_error("no admissible graph found within " + std::to_string(max_attempts) +
                           " seeds from graph_seed");
}

Index pick_onehop_source(const NetworkSystem& sys) {
  Index best = 0;
  for (Index j = 1; j < sys.graph.size(); ++j) {
    if (sys.graph.out_degree(j) > sys.graph.out_degree(best)) best = j;
  }
  return best;
}

Index pick_multihop_source(const NetworkSystem& sys, Index max_hop) {
  Index best = -1;
  std::size_t best_count = 0;
  for (Index u = 0; u < sys.graph.size(); ++u) {
    const HopSets hs = true_hop_sets(sys.graph, u, max_hop);
    const bool all = std::all_of(hs.per_hop.begin(), hs.per_hop.end(), [](const auto& s) { return !s.empty(); });
    if (!all) continue;
    const std::size_t count = hs.reachable.back().size();
    if (best < 0 || count > best_count) {
      best = u;
      best_count = count;
    }
  }
  return best;
}

double design_sigma(const NetworkSystem& sys, const NoiseModel& noise) {
  return sigma_omega_bound(sys.w.size(), noise, sys.w.row_stochastic());
}

std::vector<double> ResultTable::column(const std::string& col) const {
  const auto it = std::find(columns.begin(), columns.end(), col);
  if (it == columns.end()) throw std::out_of_range("no column '" + col + "'");
  const auto k = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(k));
  return out;
}

double ResultTable::at(std::size_t row, const std::string& col) const { return column(col).at(row); }

void ResultTable::write_csv(std::ostream& os) const {
  for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
  os << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
    os << '\n';
  }
  for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
}

double binomial_half_width(double p, Index count) {
  if (count < 1) throw std::invalid_argument("binomial interval needs count >= 1");
  const double q = std::clamp(p, 0.0, 1.0);
  return std::min(0.5, 1.96 * std::sqrt(q * (1.0 - q) / static_cast<double>(count)));
}

ResultTable run_onehop_accuracy(const ExperimentConfig& cfg) {
  const NetworkSystem sys = build_system(cfg);
  const Index n = sys.w.size();
  const Index j = resolve_source(cfg, sys, pick_onehop_source(sys));
  const double sigma = design_sigma(sys, cfg.noise);

  // Pairs with 0 < w_ij < floor are outside the design and not scored.
  std::vector<Index> scored;
  for (Index i = 0; i < n; ++i) {
    const double wij = sys.w(i, j);
    if (i != j && (wij == 0.0 || wij >= cfg.weight_floor)) scored.push_back(i);
  }

  struct Tally {
    Index correct{0}, hits{0}, edges{0}, false_alarms{0}, non_edges{0}, exact{0};
  };

  ResultTable table;
  table.name = "fig1a";
  table.columns = {"delta_target", "theoretical", "empirical", "trials", "half_width",
                   "excitation", "detection_rate", "false_alarm_rate", "exact_set_rate", "decisions"};
  add_common_meta(table, cfg, sys, j);
  table.meta["sigma_bar"] = real_text(sigma);

  for (double delta : cfg.delta_targets) {
    const double e = require_excitation(cfg.excitation != 0.0 ? cfg.excitation
                                                              : critical_excitation(sigma, cfg.weight_floor, delta));
    std::vector<Tally> per_trial(static_cast<std::size_t>(cfg.trials));
    parallel_for(per_trial.size(), [&](std::size_t k) {
      const Trajectory traj = excited_run(sys, cfg, j, cfg.burn_in, 1, e, trial_seed(cfg, kOneHopStream, k));
      const NeighborDecision d = infer_one_hop(traj.observation(cfg.burn_in), traj.observation(cfg.burn_in + 1),
                                               j, e, cfg.weight_floor, sys.w.stability(), cfg.rule);
      Tally t;
      bool exact = true;
      for (Index i : scored) {
        const bool truth = sys.w(i, j) > 0.0;
        const bool said = d.contains(1, i);
        if (truth == said) ++t.correct;
        else exact = false;
        if (truth) {
          ++t.edges;
          if (said) ++t.hits;
        } else {
          ++t.non_edges;
          if (said) ++t.false_alarms;
        }
      }
      t.exact = exact ? 1 : 0;
      per_trial[k] = t;
    }, cfg.threads);

    Tally sum;
    for (const auto& t : per_trial) {
      sum.correct += t.correct;
      sum.hits += t.hits;
      sum.edges += t.edges;
      sum.false_alarms += t.false_alarms;
      sum.non_edges += t.non_edges;
      sum.exact += t.exact;
    }
    const Index decisions = cfg.trials * static_cast<Index>(scored.size());
    const double empirical = decisions ? static_cast<double>(sum.correct) / static_cast<double>(decisions) : 0.0;
    const auto rate = [](Index a, Index b) {
      return b ? static_cast<double>(a) / static_cast<double>(b) : std::numeric_limits<double>::quiet_NaN();
    };
    table.rows.push_back({delta, 1.0 - misjudgement_probability(sigma, cfg.weight_floor, e), empirical,
                          static_cast<double>(cfg.trials), binomial_half_width(empirical, cfg.trials), e,
                          rate(sum.hits, sum.edges), rate(sum.false_alarms, sum.non_edges),
                          rate(sum.exact, cfg.trials), static_cast<double>(decisions)});
  }
  return table;
}

ResultTable run_multihop_accuracy(const ExperimentConfig& cfg) {
  const NetworkSystem sys = build_system(cfg);
  const Index big_h = cfg.max_hop;
  const Index j = resolve_source(cfg, sys, pick_multihop_source(sys, big_h));
  const HopSets hops = true_hop_sets(sys.graph, j, big_h);
  for (Index h = 1; h <= big_h; ++h) {
    if (hops.per_hop[static_cast<std::size_t>(h - 1)].empty()) {
      throw std::invalid_argument("source has no " + std::to_string(h) + "-hop out-neighbours");
    }
  }
  const std::vector<double> floors = default_gamma_floors(cfg.weight_floor, big_h);
  std::vector<Matrix> powers;
  for (Index l = 0; l <= big_h; ++l) powers.push_back(transition_power(sys.w.matrix(), l));

  struct Target {
    Index hop, node;
    double sigma, gamma_min, gamma_max, e_m;
  };
  std::vector<Target> targets;
  double e_design = 0.0;
  for (Index h = 1; h <= big_h; ++h) {
    for (Index i : hops.per_hop[static_cast<std::size_t>(h - 1)]) {
      Target t{h, i, 0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0};
      for (Index l = 1; l <= h; ++l) {
        t.sigma = std::max(t.sigma, sigma_omega_h(sys.w, i, l, cfg.noise));
        t.gamma_min = std::min(t.gamma_min, floors[static_cast<std::size_t>(l - 1)]);
        t.gamma_max = std::max(t.gamma_max, powers[static_cast<std::size_t>(l)](i, j));
      }
      if (t.gamma_max < t.gamma_min) {
        throw std::invalid_argument("true gain of node " + std::to_string(i) +
                                    " is below its Gamma floor; enable require_floor");
      }
      t.e_m = hhop_critical_excitation(t.sigma, t.gamma_min, cfg.alpha);
      e_design = std::max(e_design, t.e_m);
      targets.push_back(t);
    }
  }
  const double e = require_excitation(cfg.excitation != 0.0 ? cfg.excitation : e_design);

  std::vector<std::vector<char>> hit(static_cast<std::size_t>(cfg.trials));
  parallel_for(hit.size(), [&](std::size_t k) {
    const Trajectory traj = excited_run(sys, cfg, j, cfg.burn_in, big_h, e, trial_seed(cfg, kMultiHopStream, k));
    const NeighborDecision d = infer_within_h(traj, j, e, floors, big_h, sys.w.stability(), cfg.rule);
    auto& row = hit[k];
    row.reserve(targets.size());
    for (const auto& t : targets) row.push_back(d.hop_of(t.node) == t.hop ? 1 : 0);
  }, cfg.threads);

  ResultTable table;
  table.name = "fig1b";
  table.columns = {"hop", "theoretical", "empirical", "trials", "half_width", "targets", "excitation", "bound_min"};
  add_common_meta(table, cfg, sys, j);
  table.meta["alpha"] = real_text(cfg.alpha);
  table.meta["design_excitation"] = real_text(e_design);
  if (std::abs(e) < e_design) table.meta["warning"] = "excitation below the design value e_m";

  for (Index h = 1; h <= big_h; ++h) {
    double bound_sum = 0.0;
    double bound_min = std::numeric_limits<double>::infinity();
    Index count = 0;
    Index hits = 0;
    for (std::size_t q = 0; q < targets.size(); ++q) {
      const Target& t = targets[q];
      if (t.hop != h) continue;
      const double b = hhop_lower_bound(t.gamma_min, t.gamma_max, t.e_m, cfg.alpha, t.sigma);
      bound_sum += b;
      bound_min = std::min(bound_min, b);
      ++count;
      for (const auto& row : hit) hits += row[q];
    }
    const double empirical = static_cast<double>(hits) / static_cast<double>(count * cfg.trials);
    table.rows.push_back({static_cast<double>(h), bound_sum / static_cast<double>(count), empirical,
                          static_cast<double>(cfg.trials), binomial_half_width(empirical, cfg.trials),
                          static_cast<double>(count), e, bound_min});
  }
  return table;
}

ResultTable run_multi_excitation_accuracy(const ExperimentConfig& cfg) {
  const NetworkSystem sys = build_system(cfg);
  const Index n = sys.w.size();
  const Index j = resolve_source(cfg, sys, pick_onehop_source(sys));
  const double sigma_bar = design_sigma(sys, cfg.noise);
  const double e = require_excitation(cfg.excitation != 0.0
                                          ? cfg.excitation
                                          : critical_excitation(sigma_bar, cfg.weight_floor, cfg.multi_delta));

  // Exact spread of the one-step deviation, natural drift included.
  const double x0_var = cfg.initial_range * cfg.initial_range / 3.0;
  const Matrix cov = state_covariance(sys.w.matrix(), cfg.noise, x0_var * Matrix::Identity(n, n), cfg.multi_burn_in);
  double sigma = 0.0;
  std::vector<Index> edges, non_edges;
  for (Index i = 0; i < n; ++i) {
    if (i == j) continue;
    sigma = std::max(sigma, deviation_sigma_with_drift(sys.w.matrix(), cov, i, cfg.noise));
    const double wij = sys.w(i, j);
    if (wij == 0.0) non_edges.push_back(i);
    else if (wij >= cfg.weight_floor) edges.push_back(i);
  }

  const Index m_max = *std::max_element(cfg.repetitions.begin(), cfg.repetitions.end());
  const std::size_t levels = cfg.repetitions.size();
  // Per repetition block: false alarms and misses for every m.
  std::vector<std::vector<Index>> fa(static_cast<std::size_t>(cfg.multi_trials));
  std::vector<std::vector<Index>> md(fa.size());
  parallel_for(fa.size(), [&](std::size_t r) {
    const std::uint64_t block = trial_seed(cfg, kMultiStream, r);
    std::vector<ObservationPair> pairs;
    pairs.reserve(static_cast<std::size_t>(m_max));
    for (Index k = 0; k < m_max; ++k) {
      const Trajectory traj = excited_run(sys, cfg, j, cfg.multi_burn_in, 1, e,
                                          derive_seed(block, static_cast<std::uint64_t>(k)));
      pairs.push_back({traj.observation(cfg.multi_burn_in), traj.observation(cfg.multi_burn_in + 1)});
    }
    fa[r].assign(levels, 0);
    md[r].assign(levels, 0);
    for (std::size_t q = 0; q < levels; ++q) {
      const std::span<const ObservationPair> first(pairs.data(), static_cast<std::size_t>(cfg.repetitions[q]));
      const NeighborDecision d = infer_multi_excitation(first, j, e, cfg.weight_floor, sys.w.stability(), cfg.rule);
      for (Index i : non_edges) fa[r][q] += d.contains(1, i) ? 1 : 0;
      for (Index i : edges) md[r][q] += d.contains(1, i) ? 0 : 1;
    }
  }, cfg.threads);

  ResultTable table;
  table.name = "multi";
  table.columns = {"repetitions", "theoretical", "empirical", "trials", "half_width",
                   "false_alarm_rate", "missed_detection_rate", "excitation", "sigma"};
  add_common_meta(table, cfg, sys, j);
  table.meta["sigma_bar"] = real_text(sigma_bar);

  const double reps = static_cast<double>(cfg.multi_trials);
  for (std::size_t q = 0; q < levels; ++q) {
    Index fa_sum = 0, md_sum = 0;
    for (std::size_t r = 0; r < fa.size(); ++r) {
      fa_sum += fa[r][q];
      md_sum += md[r][q];
    }
    const double fa_rate = non_edges.empty() ? 0.0 : static_cast<double>(fa_sum) / (reps * static_cast<double>(non_edges.size()));
    const double md_rate = edges.empty() ? 0.0 : static_cast<double>(md_sum) / (reps * static_cast<double>(edges.size()));
    const double sd = std::sqrt((fa_rate * (1.0 - fa_rate) + md_rate * (1.0 - md_rate)) / reps);
    table.rows.push_back({static_cast<double>(cfg.repetitions[q]),
                          multi_excitation_bound(e, cfg.weight_floor, sigma, cfg.repetitions[q]),
                          fa_rate + md_rate, reps, std::min(0.5, 1.96 * sd), fa_rate, md_rate, e, sigma});
  }
  return table;
}

ResultTable run_ls_improvement(const ExperimentConfig& cfg) {
  const NetworkSystem sys = build_system(cfg);
  const Index n = sys.w.size();
  const Index j = resolve_source(cfg, sys, pick_onehop_source(sys));
  const Index length = cfg.ls_length > 0 ? cfg.ls_length : n + 5;
  const double sigma_bar = design_sigma(sys, cfg.noise);
  const double e = require_excitation(cfg.excitation != 0.0
                                          ? cfg.excitation
                                          : critical_excitation(sigma_bar, cfg.weight_floor, cfg.ls_delta));

  ResultTable table;
  table.name = "fig1c";
  table.columns = {"seed", "ols_structure", "ols_magnitude", "constrained_structure",
                   "constrained_magnitude", "rank_deficient", "excitation", "accepted"};
  add_common_meta(table, cfg, sys, j);
  table.meta["pairs"] = std::to_string(length);
  table.rows.resize(static_cast<std::size_t>(cfg.ls_seeds));

  parallel_for(table.rows.size(), [&](std::size_t s) {
    // Pairs 1..T precede the excitation; the excitation pair only feeds the constraints.
    const Trajectory traj = excited_run(sys, cfg, j, length, 1, e, trial_seed(cfg, kLsStream, s));
    LsProblem problem;
    problem.pairs = observation_pairs(traj, 1, length);
    const LsResult ols = ols_estimate(problem);
    const NeighborDecision d = infer_one_hop(traj.observation(length), traj.observation(length + 1), j, e,
                                             cfg.weight_floor, sys.w.stability(), cfg.rule);
    problem.constraints = constraints_from_decision(d, n);
    const LsResult con = constrained_estimate(problem);
    const ErrorMetrics mo = error_metrics(ols.estimate, sys.w.matrix(), cfg.sign_tol);
    const ErrorMetrics mc = error_metrics(con.estimate, sys.w.matrix(), cfg.sign_tol);
    table.rows[s] = {static_cast<double>(s), mo.structure_error, mo.magnitude_error, mc.structure_error,
                     mc.magnitude_error, ols.rank_deficient ? 1.0 : 0.0, e,
                     static_cast<double>(d.members(1).size())};
  }, cfg.threads);
  return table;
}

}  // namespace nettopo
