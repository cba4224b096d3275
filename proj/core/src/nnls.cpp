#include "nettopo/nnls.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <limits>
#include <stdexcept>

namespace nettopo {

namespace {

// Minimum-norm least squares over the passive columns; zero elsewhere.
Vector passive_solve(const Matrix& a, const Vector& b, const std::vector<bool>& passive) {
  std::vector<Index> cols;
  for (Index k = 0; k < a.cols(); ++k) {
    if (passive[static_cast<std::size_t>(k)]) cols.push_back(k);
  }
  Vector z = Vector::Zero(a.cols());
  if (cols.empty()) return z;
  Matrix sub(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Index>(c)) = a.col(cols[c]);
  const Vector zs = Eigen::CompleteOrthogonalDecomposition<Matrix>(sub).solve(b);
  for (std::size_t c = 0; c < cols.size(); ++c) z(cols[c]) = zs(static_cast<Index>(c));
  return z;
}

}  // namespace

NnlsResult solve_mixed_nnls(const Matrix& a, const Vector& b, const std::vector<bool>& nonnegative,
                            int max_iterations) {
  const Index n = a.cols();
  if (a.rows() != b.size()) throw std::invalid_argument("nnls: A and b disagree in rows");
  if (static_cast<Index>(nonnegative.size()) != n) {
    throw std::invalid_argument("nnls: one constraint flag per column required");
  }
  if (!a.allFinite() || !b.allFinite()) throw std::invalid_argument("nnls: non-finite input");
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * n + 10);

  const double eps = std::numeric_limits<double>::epsilon();
  const double scale = std::max<double>(1.0, static_cast<double>(std::max(a.rows(), n)));
  const double grad_tol = 10.0 * eps * scale * a.cwiseAbs().colwise().sum().maxCoeff() *
                          std::max(1.0, b.cwiseAbs().maxCoeff());

  // Free variables are always passive; constrained ones start at the bound.
  std::vector<bool> passive(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) passive[static_cast<std::size_t>(k)] = !nonnegative[static_cast<std::size_t>(k)];

  NnlsResult out;
  Vector x = passive_solve(a, b, passive);
  for (int iter = 0; iter < max_iterations; ++iter) {
    out.iterations = iter + 1;
    const Vector grad = a.transpose() * (b - a * x);
    Index enter = -1;
    double best = grad_tol;
    for (Index k = 0; k < n; ++k) {
      if (!nonnegative[static_cast<std::size_t>(k)] || passive[static_cast<std::size_t>(k)]) continue;
      if (grad(k) > best) {
        best = grad(k);
        enter = k;
      }
    }
    if (enter < 0) {
      out.converged = true;
      break;
    }
    passive[static_cast<std::size_t>(enter)] = true;

    for (;;) {
      Vector z = passive_solve(a, b, passive);
      double step = 1.0;
      bool blocked = false;
      for (Index k = 0; k < n; ++k) {
        if (!nonnegative[static_cast<std::size_t>(k)] || !passive[static_cast<std::size_t>(k)]) continue;
        if (z(k) <= 0.0) {
          blocked = true;
          const double denom = x(k) - z(k);
          if (denom > 0.0) step = std::min(step, x(k) / denom);
          else step = 0.0;
        }
      }
      if (!blocked) {
        x = z;
        break;
      }
      x += step * (z - x);
      const double drop_tol = 16.0 * eps * scale * std::max(1.0, x.cwiseAbs().maxCoeff());
      bool dropped = false;
      for (Index k = 0; k < n; ++k) {
        if (!nonnegative[static_cast<std::size_t>(k)] || !passive[static_cast<std::size_t>(k)]) continue;
        if (x(k) <= drop_tol) {
          x(k) = 0.0;
          passive[static_cast<std::size_t>(k)] = false;
          dropped = true;
        }
      }
      if (!dropped) {
        // Degenerate step: drop the blocking coordinate that hit the bound first.
        Index worst = -1;
        for (Index k = 0; k < n; ++k) {
          if (!nonnegative[static_cast<std::size_t>(k)] || !passive[static_cast<std::size_t>(k)]) continue;
          if (z(k) <= 0.0 && (worst < 0 || x(k) < x(worst))) worst = k;
        }
        x(worst) = 0.0;
        passive[static_cast<std::size_t>(worst)] = false;
      }
    }
  }
  for (Index k = 0; k < n; ++k) {
    if (nonnegative[static_cast<std::size_t>(k)] && x(k) < 0.0) x(k) = 0.0;
  }
  out.x = std::move(x);
  return out;
}

NnlsResult solve_nnls(const Matrix& a, const Vector& b, int max_iterations) {
  return solve_mixed_nnls(a, b, std::vector<bool>(static_cast<std::size_t>(a.cols()), true),
                          max_iterations);
}

}  // namespace nettopo
