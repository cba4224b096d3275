#include "nettopo/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace nettopo::io {

namespace {

constexpr int kDigits = std::numeric_limits<double>::max_digits10;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Index read_header(std::istream& is) {
  long long n = 0;
  if (!(is >> n) || n < 1) throw std::runtime_error("matrix file: bad size header");
  return static_cast<Index>(n);
}

double parse_double(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("cannot parse ") + what + ": '" + s + "'");
  }
  if (used != s.size()) throw std::runtime_error(std::string("cannot parse ") + what + ": '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, const char* what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("cannot parse ") + what + ": '" + s + "'");
  }
  if (used != s.size()) throw std::runtime_error(std::string("cannot parse ") + what + ": '" + s + "'");
  return v;
}

}  // namespace

void write_matrix(std::ostream& os, const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("only square matrices are written");
  os << m.rows() << '\n' << std::setprecision(kDigits);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
    os << '\n';
  }
}

Matrix read_matrix(std::istream& is) {
  const Index n = read_header(is);
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      std::string tok;
      if (!(is >> tok)) throw std::runtime_error("matrix file: too few entries");
      m(i, j) = parse_double(tok, "matrix entry");
    }
  }
  std::string extra;
  if (is >> extra) throw std::runtime_error("matrix file: trailing data");
  return m;
}

void write_adjacency(std::ostream& os, const WeightedDigraph& g) {
  os << g.size() << '\n';
  for (Index i = 0; i < g.size(); ++i) {
    for (Index j = 0; j < g.size(); ++j) os << (j ? " " : "") << g.adjacency()(i, j);
    os << '\n';
  }
}

WeightedDigraph read_adjacency(std::istream& is) {
  const Index n = read_header(is);
  Eigen::MatrixXi a(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      std::string tok;
      if (!(is >> tok)) throw std::runtime_error("adjacency file: too few entries");
      a(i, j) = static_cast<int>(parse_int(tok, "adjacency entry"));
    }
  }
  return WeightedDigraph(a);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,node,state,observation\n" << std::setprecision(kDigits);
  for (Index t = 0; t <= traj.horizon(); ++t) {
    for (Index i = 0; i < traj.nodes(); ++i) {
      os << t << ',' << i << ',' << traj.states(i, t) << ',' << traj.observations(i, t) << '\n';
    }
  }
  for (const auto& ev : traj.excitations) {
    os << "# excite node=" << ev.node << " t=" << ev.time << " e=" << ev.magnitude << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  struct Row {
    Index t, node;
    double state, obs;
  };
  std::vector<Row> rows;
  std::vector<ExcitationEvent> events;
  std::string line;
  bool header = false;
  Index max_t = -1;
  Index max_node = -1;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string word;
      ss >> word;
      if (word != "excite") continue;
      ExcitationEvent ev;
      bool have_node = false, have_t = false, have_e = false;
      while (ss >> word) {
        const auto eq = word.find('=');
        if (eq == std::string::npos) throw std::runtime_error("trajectory: malformed excite line");
        const std::string key = word.substr(0, eq);
        const std::string val = word.substr(eq + 1);
        if (key == "node") ev.node = static_cast<Index>(parse_int(val, "node")), have_node = true;
        else if (key == "t") ev.time = static_cast<Index>(parse_int(val, "time")), have_t = true;
        else if (key == "e") ev.magnitude = parse_double(val, "excitation"), have_e = true;
      }
      if (!(have_node && have_t && have_e)) throw std::runtime_error("trajectory: incomplete excite line");
      events.push_back(ev);
      continue;
    }
    if (!header) {
      if (line != "t,node,state,observation") throw std::runtime_error("trajectory: unexpected header");
      header = true;
      continue;
    }
    std::istringstream ss(line);
    std::string f[4];
    for (auto& field : f) {
      if (!std::getline(ss, field, ',')) throw std::runtime_error("trajectory: short row");
    }
    Row r{static_cast<Index>(parse_int(trim(f[0]), "t")), static_cast<Index>(parse_int(trim(f[1]), "node")),
          parse_double(trim(f[2]), "state"), parse_double(trim(f[3]), "observation")};
    if (r.t < 0 || r.node < 0) throw std::runtime_error("trajectory: negative index");
    max_t = std::max(max_t, r.t);
    max_node = std::max(max_node, r.node);
    rows.push_back(r);
  }
  if (rows.empty()) throw std::runtime_error("trajectory: no rows");
  const Index n = max_node + 1;
  const Index steps = max_t + 1;
  if (static_cast<Index>(rows.size()) != n * steps) throw std::runtime_error("trajectory: missing rows");
  Trajectory traj;
  traj.states = Matrix::Constant(n, steps, std::numeric_limits<double>::quiet_NaN());
  traj.observations = traj.states;
  for (const auto& r : rows) {
    traj.states(r.node, r.t) = r.state;
    traj.observations(r.node, r.t) = r.obs;
  }
  if (!traj.states.allFinite()) throw std::runtime_error("trajectory: duplicate or missing rows");
  for (const auto& ev : events) {
    if (ev.node >= n || ev.time > max_t) throw std::runtime_error("trajectory: excitation out of range");
  }
  traj.excitations = std::move(events);
  return traj;
}

void write_constraints(std::ostream& os,
                       const std::map<std::pair<Index, Index>, EntryConstraint>& constraints) {
  for (const auto& [ij, c] : constraints) {
    if (c == EntryConstraint::Free) continue;
    os << ij.first << ' ' << ij.second << ' ' << (c == EntryConstraint::ForcedPositive ? "pos" : "zero")
       << '\n';
  }
}

std::map<std::pair<Index, Index>, EntryConstraint> read_constraints(std::istream& is) {
  std::map<std::pair<Index, Index>, EntryConstraint> out;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string si, sj, kind, extra;
    if (!(ss >> si >> sj >> kind) || (ss >> extra)) {
      throw std::runtime_error("constraints: expected 'i j pos|zero', got '" + line + "'");
    }
    const Index i = static_cast<Index>(parse_int(si, "row index"));
    const Index j = static_cast<Index>(parse_int(sj, "column index"));
    if (i < 0 || j < 0) throw std::runtime_error("constraints: negative index");
    if (kind == "pos") out[{i, j}] = EntryConstraint::ForcedPositive;
    else if (kind == "zero") out[{i, j}] = EntryConstraint::ForcedZero;
    else throw std::runtime_error("constraints: unknown kind '" + kind + "'");
  }
  return out;
}

KeyValues read_key_values(std::istream& is) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace nettopo::io
