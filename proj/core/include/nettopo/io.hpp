#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>

#include "nettopo/dynamics.hpp"
#include "nettopo/estimate.hpp"
#include "nettopo/topology.hpp"

namespace nettopo::io {

/// Header line n, then n rows of n entries. Weights use 17 significant digits.
void write_matrix(std::ostream& os, const Matrix& m);
Matrix read_matrix(std::istream& is);
void write_adjacency(std::ostream& os, const WeightedDigraph& g);
WeightedDigraph read_adjacency(std::istream& is);

/// CSV with header t,node,state,observation followed by one
/// "# excite node=<j> t=<t> e=<val>" line per excitation.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);

/// Lines "i j pos|zero"; '#' starts a comment.
void write_constraints(std::ostream& os,
                       const std::map<std::pair<Index, Index>, EntryConstraint>& constraints);
std::map<std::pair<Index, Index>, EntryConstraint> read_constraints(std::istream& is);

/// Flat "key = value" text. Blank lines and '#' comments are skipped;
/// repeated keys keep the last value.
using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(std::istream& is);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace nettopo::io
