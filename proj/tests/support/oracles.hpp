#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls the library routine it is meant to check.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Maclaurin series of erf in long double. Accurate to ~1e-17 for |x| <= 2.5.
inline long double erf_series(long double x) {
  long double term = x;  // x^(2k+1) (-1)^k / k!
  long double sum = x;
  for (int k = 1; k < 200; ++k) {
    term *= -x * x / k;
    const long double add = term / (2 * k + 1);
    sum += add;
    if (std::fabs(add) < 1e-22L * std::fabs(sum)) break;
  }
  return sum * 2.0L / std::sqrt(std::numbers::pi_v<long double>);
}

/// Inverse of erf_series by plain bisection; |p| <= 0.999.
inline double erf_inv_bisection(double p) {
  long double lo = 0.0L, hi = 2.5L;
  const long double target = std::fabs(static_cast<long double>(p));
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (erf_series(mid) < target) lo = mid;
    else hi = mid;
  }
  const double x = static_cast<double>(0.5L * (lo + hi));
  return p < 0 ? -x : x;
}

/// Composite Simpson integral of the N(mean, sigma^2) density over [a, mean + 14 sigma].
inline double gaussian_upper_mass(double mean, double sigma, double a, int panels = 20000) {
  const double b = mean + 14.0 * sigma;
  if (a >= b) return 0.0;
  const double lo = std::max(a, mean - 14.0 * sigma);
  const double h = (b - lo) / panels;
  auto pdf = [&](double x) {
    const double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  };
  double s = pdf(lo) + pdf(b);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * pdf(lo + k * h);
  return s * h / 3.0;
}

/// Shortest hop distance from j to every node along a_iu = 1 edges, found by
/// boolean matrix powers: dist(i) = smallest l with (A^l)_ij > 0. 0 for j
/// itself and for unreachable nodes within max_hop.
inline std::vector<int> hop_distances_by_powers(const Eigen::MatrixXi& a, int j, int max_hop) {
  const auto n = a.rows();
  std::vector<int> dist(static_cast<std::size_t>(n), 0);
  Eigen::MatrixXi reach = Eigen::MatrixXi::Identity(n, n);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  seen[static_cast<std::size_t>(j)] = true;
  for (int l = 1; l <= max_hop; ++l) {
    reach = (a * reach).unaryExpr([](int v) { return v > 0 ? 1 : 0; }).eval();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!seen[static_cast<std::size_t>(i)] && reach(i, j) > 0) {
        seen[static_cast<std::size_t>(i)] = true;
        dist[static_cast<std::size_t>(i)] = l;
      }
    }
  }
  return dist;
}

/// Mixed nonnegative least squares by enumerating which constrained
/// coordinates sit at zero; returns the smallest objective over all feasible
/// stationary points.
struct BruteNnls {
  Vector x;
  double objective{std::numeric_limits<double>::infinity()};
};

inline BruteNnls brute_force_nnls(const Matrix& a, const Vector& b, const std::vector<bool>& nonneg) {
  const auto n = a.cols();
  std::vector<Eigen::Index> constrained;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (nonneg[static_cast<std::size_t>(k)]) constrained.push_back(k);
  }
  BruteNnls best;
  const std::size_t subsets = std::size_t{1} << constrained.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index k = 0; k < n; ++k) {
      bool zero = false;
      for (std::size_t c = 0; c < constrained.size(); ++c) {
        if (constrained[c] == k && (mask >> c) & 1U) zero = true;
      }
      if (!zero) cols.push_back(k);
    }
    Vector x = Vector::Zero(n);
    if (!cols.empty()) {
      Matrix sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = a.col(cols[c]);
      const Vector z = sub.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
      for (std::size_t c = 0; c < cols.size(); ++c) x(cols[c]) = z(static_cast<Eigen::Index>(c));
    }
    bool feasible = true;
    for (auto k : constrained) feasible = feasible && x(k) >= -1e-12;
    if (!feasible) continue;
    const double obj = (a * x - b).squaredNorm();
    if (obj < best.objective) {
      best.objective = obj;
      best.x = x;
    }
  }
  return best;
}

}  // namespace oracle
