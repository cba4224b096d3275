#pragma once

#include <vector>

#include "nettopo/topology.hpp"

namespace nettopo {

struct NnlsResult {
  Vector x;
  int iterations{0};
  bool converged{false};
};

/// min ||A x - b||_2 subject to x_k >= 0 for every k with nonnegative[k] set;
/// the other coordinates are free. Lawson-Hanson active set; each passive-set
/// subproblem is solved in the minimum-norm sense so rank-deficient A is fine.
NnlsResult solve_mixed_nnls(const Matrix& a, const Vector& b, const std::vector<bool>& nonnegative,
                            int max_iterations = 0);

/// Plain NNLS, every coordinate constrained.
NnlsResult solve_nnls(const Matrix& a, const Vector& b, int max_iterations = 0);

}  // namespace nettopo
