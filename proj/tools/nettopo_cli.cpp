// nettopo: simulate networked linear dynamics, design excitations and infer
// out-neighbour topology from the command line.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nettopo/detect.hpp"
#include "nettopo/dynamics.hpp"
#include "nettopo/estimate.hpp"
#include "nettopo/harness.hpp"
#include "nettopo/infer.hpp"
#include "nettopo/io.hpp"
#include "nettopo/random.hpp"
#include "nettopo/topology.hpp"

using namespace nettopo;
using json = nlohmann::ordered_json;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<Index> trials;
  std::string out;  // empty: csv for tables, json for decisions
  std::string output_path;
};

ExperimentConfig load_config(const Globals& g) {
  io::KeyValues kv;
  if (!g.config_path.empty()) {
    std::istringstream in(io::read_file(g.config_path));
    kv = io::read_key_values(in);
  }
  if (g.seed) kv["seed"] = std::to_string(*g.seed);
  if (g.trials) kv["trials"] = std::to_string(*g.trials);
  return config_from_key_values(kv);
}

void emit(const Globals& g, const std::string& text) {
  if (g.output_path.empty()) {
    std::cout << text;
  } else {
    io::write_file(g.output_path, text);
  }
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string table_text(const Globals& g, const ResultTable& t) {
  if (g.out == "json") {
    json j;
    j["name"] = t.name;
    j["columns"] = t.columns;
    json rows = json::array();
    for (const auto& r : t.rows) {
      json row;
      for (std::size_t k = 0; k < t.columns.size(); ++k) row[t.columns[k]] = number(r[k]);
      rows.push_back(row);
    }
    j["rows"] = rows;
    j["meta"] = t.meta;
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  t.write_csv(os);
  return os.str();
}

Matrix load_matrix(const std::string& path) {
  std::istringstream in(io::read_file(path));
  return io::read_matrix(in);
}

Trajectory load_trajectory(const std::string& path) {
  std::istringstream in(io::read_file(path));
  return io::read_trajectory_csv(in);
}

StabilityClass parse_stability(const std::string& s) {
  if (s == "marginal") return StabilityClass::MarginallyStable;
  if (s == "asymptotic") return StabilityClass::AsymptoticallyStable;
  throw std::invalid_argument("stability must be marginal or asymptotic");
}

const ExcitationEvent& source_event(const Trajectory& traj, Index source) {
  const ExcitationEvent* found = nullptr;
  for (const auto& ev : traj.excitations) {
    if (ev.node != source) continue;
    if (found) throw std::invalid_argument("trajectory has several excitations of the source");
    found = &ev;
  }
  if (!found) throw std::invalid_argument("trajectory has no excitation of the source");
  return *found;
}

std::string decisions_text(const Globals& g, const NeighborDecision& d) {
  if (g.out == "csv") {
    std::ostringstream os;
    os << std::setprecision(17) << "source,hop,node,deviation,threshold,accepted\n";
    for (const auto& [key, dev] : d.raw_deviations) {
      const Index hop = key.second;
      os << d.source << ',' << hop << ',' << key.first << ',' << dev << ',' << d.thresholds.at(hop) << ','
         << (d.contains(hop, key.first) ? 1 : 0) << '\n';
    }
    return os.str();
  }
  json records = json::array();
  for (const auto& [hop, threshold] : d.thresholds) {
    json r;
    r["source"] = d.source;
    r["hop"] = hop;
    r["members"] = d.members(hop);
    r["threshold"] = number(threshold);
    json devs = json::object();
    for (const auto& [key, dev] : d.raw_deviations) {
      if (key.second == hop) devs[std::to_string(key.first)] = number(dev);
    }
    r["deviations"] = devs;
    records.push_back(r);
  }
  return (records.size() == 1 ? records.front() : records).dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology inference for noisy networked linear systems"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Flat key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master random seed");
  app.add_option("--trials", g.trials, "Monte Carlo trial count");
  app.add_option("--out", g.out, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("-o,--output", g.output_path, "Write to this file instead of stdout");
  app.fallthrough();

  // generate
  auto* gen = app.add_subcommand("generate", "Draw a random digraph and print its weight matrix");
  std::string adjacency_out;
  gen->add_option("--adjacency", adjacency_out, "Also write the 0/1 adjacency matrix here");
  gen->callback([&] {
    const NetworkSystem sys = build_system(load_config(g));
    if (!adjacency_out.empty()) {
      std::ostringstream os;
      io::write_adjacency(os, sys.graph);
      io::write_file(adjacency_out, os.str());
    }
    std::ostringstream os;
    io::write_matrix(os, sys.w.matrix());
    emit(g, os.str());
    std::cerr << "graph_seed=" << sys.graph_seed << " stability=" << to_string(sys.w.stability()) << '\n';
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a trajectory and write it as CSV");
  std::string matrix_path;
  Index horizon = 60;
  Index excite_node = -1;
  Index excite_time = 50;
  double excite_value = 0.0;
  double x0_range = 100.0;
  sim->add_option("--matrix", matrix_path, "Weight matrix file")->required()->check(CLI::ExistingFile);
  sim->add_option("--horizon", horizon, "Last time index T");
  sim->add_option("--excite-node", excite_node, "Excited node (omit for none)");
  sim->add_option("--excite-time", excite_time, "Excitation step");
  sim->add_option("--excite-value", excite_value, "Excitation magnitude");
  sim->add_option("--x0-range", x0_range, "x_0 ~ U[-r, r]^n");
  sim->callback([&] {
    const ExperimentConfig cfg = load_config(g);
    const TopologyMatrix w = TopologyMatrix::from_matrix(load_matrix(matrix_path));
    std::mt19937_64 rng(derive_seed(cfg.seed, 0));
    std::uniform_real_distribution<double> u(-x0_range, x0_range);
    Vector x0(w.size());
    for (Index i = 0; i < w.size(); ++i) x0(i) = x0_range > 0.0 ? u(rng) : 0.0;
    std::optional<ExcitationPlan> plan;
    if (excite_node >= 0) plan = ExcitationPlan{excite_node, excite_time, excite_value, 1};
    const Trajectory traj = simulate(w, x0, horizon, cfg.noise, plan, derive_seed(cfg.seed, 1));
    std::ostringstream os;
    io::write_trajectory_csv(os, traj);
    emit(g, os.str());
  });

  // design-excitation
  auto* design = app.add_subcommand("design-excitation", "Critical excitation for each target error");
  std::string design_matrix;
  design->add_option("--matrix", design_matrix, "Weight matrix (default: generated from the config)")
      ->check(CLI::ExistingFile);
  design->callback([&] {
    const ExperimentConfig cfg = load_config(g);
    const TopologyMatrix w = design_matrix.empty() ? build_system(cfg).w
                                                   : TopologyMatrix::from_matrix(load_matrix(design_matrix));
    const double sigma = sigma_omega_bound(w.size(), cfg.noise, w.row_stochastic());
    ResultTable t;
    t.name = "design";
    t.columns = {"delta_target", "sigma_bar", "weight_floor", "excitation", "misjudgement"};
    for (double d : cfg.delta_targets) {
      const TestDesign td = design_one_hop_test(sigma, cfg.weight_floor, d);
      t.rows.push_back({d, sigma, cfg.weight_floor, td.critical_excitation,
                        misjudgement_probability(sigma, cfg.weight_floor, td.critical_excitation)});
    }
    t.meta["stability"] = to_string(w.stability());
    emit(g, table_text(g, t));
  });

  // infer
  auto* infer = app.add_subcommand("infer", "Out-neighbour tests from recorded trajectories");
  infer->require_subcommand(1);
  std::vector<std::string> traj_paths;
  Index source = 0;
  double floor = 0.4;
  std::string stability = "marginal";
  std::string bound = "observed";
  std::string statistic = "signed";
  Index max_hop = 3;
  auto add_infer_options = [&](CLI::App* c, bool many) {
    if (many) {
      c->add_option("--trajectory", traj_paths, "Trajectory CSV files, one per trial")->required()
          ->check(CLI::ExistingFile);
    } else {
      c->add_option("--trajectory", traj_paths, "Trajectory CSV file")->required()->expected(1)
          ->check(CLI::ExistingFile);
    }
    c->add_option("--source", source, "Excited node")->required();
    c->add_option("--weight-floor", floor, "Smallest edge weight to detect");
    c->add_option("--stability", stability, "marginal|asymptotic")
        ->check(CLI::IsMember({"marginal", "asymptotic"}));
    c->add_option("--deviation-bound", bound, "observed|steady_state")
        ->check(CLI::IsMember({"observed", "steady_state"}));
    c->add_option("--statistic", statistic, "signed|absolute")->check(CLI::IsMember({"signed", "absolute"}));
  };
  auto rule = [&] {
    DecisionRule r;
    r.bound = bound == "observed" ? DeviationBoundPolicy::Observed : DeviationBoundPolicy::SteadyState;
    r.statistic = statistic == "signed" ? Statistic::Signed : Statistic::Absolute;
    return r;
  };

  auto* one = infer->add_subcommand("onehop", "One-hop test after a single excitation");
  add_infer_options(one, false);
  one->callback([&] {
    const Trajectory traj = load_trajectory(traj_paths.front());
    const ExcitationEvent& ev = source_event(traj, source);
    if (ev.time + 1 > traj.horizon()) throw std::invalid_argument("trajectory ends at the excitation step");
    const NeighborDecision d = infer_one_hop(traj.observation(ev.time), traj.observation(ev.time + 1), source,
                                             ev.magnitude, floor, parse_stability(stability), rule());
    emit(g, decisions_text(g, d));
  });

  auto* multihop = infer->add_subcommand("multihop", "Within-h tests after a single excitation");
  add_infer_options(multihop, false);
  multihop->add_option("--max-hop", max_hop, "Largest hop H");
  multihop->callback([&] {
    const Trajectory traj = load_trajectory(traj_paths.front());
    const ExcitationEvent& ev = source_event(traj, source);
    const auto floors = default_gamma_floors(floor, max_hop);
    const NeighborDecision d =
        infer_within_h(traj, source, ev.magnitude, floors, max_hop, parse_stability(stability), rule());
    emit(g, decisions_text(g, d));
  });

  auto* multi = infer->add_subcommand("multi", "Averaged test over several excitation trials");
  add_infer_options(multi, true);
  multi->callback([&] {
    std::vector<ObservationPair> pairs;
    double e = 0.0;
    for (const auto& path : traj_paths) {
      const Trajectory traj = load_trajectory(path);
      const ExcitationEvent& ev = source_event(traj, source);
      if (ev.time + 1 > traj.horizon()) throw std::invalid_argument(path + ": ends at the excitation step");
      if (!pairs.empty() && ev.magnitude != e) throw std::invalid_argument("trials use different excitations");
      e = ev.magnitude;
      pairs.push_back({traj.observation(ev.time), traj.observation(ev.time + 1)});
    }
    const NeighborDecision d = infer_multi_excitation(pairs, source, e, floor, parse_stability(stability), rule());
    emit(g, decisions_text(g, d));
  });

  // estimate
  auto* est = app.add_subcommand("estimate", "Least-squares estimate of W from a trajectory");
  est->require_subcommand(1);
  std::string est_traj;
  std::string constraints_path;
  std::string truth_path;
  auto add_estimate_options = [&](CLI::App* c) {
    c->add_option("--trajectory", est_traj, "Trajectory CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--truth", truth_path, "True W; prints eps_1/eps_2 to stderr")->check(CLI::ExistingFile);
  };
  auto run_estimate = [&](bool constrained) {
    const ExperimentConfig cfg = load_config(g);
    const Trajectory traj = load_trajectory(est_traj);
    // Pairs up to the first excitation step; the excitation pair is not regressed.
    Index last = traj.horizon();
    for (const auto& ev : traj.excitations) last = std::min(last, ev.time);
    LsProblem problem;
    problem.pairs = observation_pairs(traj, 1, last);
    if (constrained) {
      std::istringstream in(io::read_file(constraints_path));
      problem.constraints = io::read_constraints(in);
    }
    const LsResult r = constrained ? constrained_estimate(problem) : ols_estimate(problem);
    if (r.rank_deficient) std::cerr << "warning: regressors are rank deficient (rank " << r.rank << ")\n";
    for (const auto& [i, j] : r.zero_at_forced_positive) {
      std::cerr << "note: forced-positive entry (" << i << "," << j << ") estimated as 0\n";
    }
    if (!truth_path.empty()) {
      const ErrorMetrics m = error_metrics(r.estimate, load_matrix(truth_path), cfg.sign_tol);
      std::cerr << "eps1=" << m.structure_error << " eps2=" << m.magnitude_error << '\n';
    }
    std::ostringstream os;
    io::write_matrix(os, r.estimate);
    emit(g, os.str());
  };
  auto* ols = est->add_subcommand("ols", "Ordinary least squares");
  add_estimate_options(ols);
  ols->callback([&] { run_estimate(false); });
  auto* con = est->add_subcommand("constrained", "Least squares with excitation-derived constraints");
  add_estimate_options(con);
  con->add_option("--constraints", constraints_path, "Lines 'i j pos|zero'")->required()
      ->check(CLI::ExistingFile);
  con->callback([&] { run_estimate(true); });

  // experiment
  auto* exp = app.add_subcommand("experiment", "Monte Carlo experiments");
  exp->require_subcommand(1);
  exp->add_subcommand("fig1a", "One-hop accuracy against the target error")->callback([&] {
    emit(g, table_text(g, run_onehop_accuracy(load_config(g))));
  });
  exp->add_subcommand("fig1b", "Within-h accuracy against the hop count")->callback([&] {
    emit(g, table_text(g, run_multihop_accuracy(load_config(g))));
  });
  exp->add_subcommand("fig1c", "OLS against constrained least squares")->callback([&] {
    emit(g, table_text(g, run_ls_improvement(load_config(g))));
  });
  exp->add_subcommand("multi", "Misjudgement against the number of repeated excitations")->callback([&] {
    emit(g, table_text(g, run_multi_excitation_accuracy(load_config(g))));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
