#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "nettopo/dynamics.hpp"
#include "nettopo/estimate.hpp"
#include "nettopo/topology.hpp"

using namespace nettopo;

namespace {

TopologyMatrix system_w(std::uint64_t seed, Index n = 20) {
  for (std::uint64_t s = seed;; ++s) {
    const TopologyMatrix w = weight_laplacian(generate_random_digraph(n, 0.1, s), 0.9);
    if (w.stability() == StabilityClass::MarginallyStable) return w;
  }
}

LsProblem basis_problem(const Matrix& w) {
  LsProblem p;
  for (Index k = 0; k < w.rows(); ++k) {
    const Vector e = Vector::Unit(w.rows(), k);
    p.pairs.push_back({e, w * e});
  }
  return p;
}

LsProblem trajectory_problem(const TopologyMatrix& w, Index length, const NoiseModel& noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  Vector x0(w.size());
  for (Index i = 0; i < w.size(); ++i) x0(i) = u(rng);
  const Trajectory traj = simulate(w, x0, length, noise, std::nullopt, seed + 1);
  return {observation_pairs(traj, 1, length), {}};
}

std::map<std::pair<Index, Index>, EntryConstraint> true_column_constraints(const Matrix& w, Index j) {
  std::map<std::pair<Index, Index>, EntryConstraint> c;
  for (Index i = 0; i < w.rows(); ++i) {
    if (i == j) continue;
    c[{i, j}] = w(i, j) > 0.0 ? EntryConstraint::ForcedPositive : EntryConstraint::ForcedZero;
  }
  return c;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST(Ols, ExactFromBasisPairs) {
  const TopologyMatrix w = system_w(1);
  const LsResult r = ols_estimate(basis_problem(w.matrix()));
  EXPECT_FALSE(r.rank_deficient);
  EXPECT_EQ(r.rank, 20);
  EXPECT_LE((r.estimate - w.matrix()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ols, SinglePairIsMinimumNormAndFlagged) {
  Vector before(3), after(3);
  before << 1, 2, 2;
  after << 3, 0, -1;
  const LsResult r = ols_estimate({{{before, after}}, {}});
  EXPECT_TRUE(r.rank_deficient);
  EXPECT_EQ(r.rank, 1);
  // Minimum-norm solution of w_i . before = after_i is after_i before / |before|^2.
  const Matrix expected = after * before.transpose() / before.squaredNorm();
  EXPECT_LE((r.estimate - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Ols, ResidualOrthogonalToRegressors) {
  const TopologyMatrix w = system_w(2);
  const LsProblem p = trajectory_problem(w, 40, NoiseModel{}, 3);
  const LsResult r = ols_estimate(p);
  Matrix x(40, 20), y(40, 20);
  for (Index t = 0; t < 40; ++t) {
    x.row(t) = p.pairs[static_cast<std::size_t>(t)].before.transpose();
    y.row(t) = p.pairs[static_cast<std::size_t>(t)].after.transpose();
  }
  const Matrix resid = y - x * r.estimate.transpose();
  EXPECT_LE((x.transpose() * resid).cwiseAbs().maxCoeff() / x.norm() / std::max(1.0, resid.norm()), 1e-8);
}

TEST(Ols, ErrorShrinksWithLongerTrajectories) {
  const TopologyMatrix w = system_w(4);
  std::vector<double> short_err, long_err;
  for (std::uint64_t s = 0; s < 20; ++s) {
    short_err.push_back(error_metrics(ols_estimate(trajectory_problem(w, 25, NoiseModel{}, s)).estimate,
                                      w.matrix()).magnitude_error);
    long_err.push_back(error_metrics(ols_estimate(trajectory_problem(w, 50, NoiseModel{}, s)).estimate,
                                     w.matrix()).magnitude_error);
  }
  EXPECT_LT(median(long_err), median(short_err));
}

TEST(Ols, RowSeparability) {
  const TopologyMatrix w = system_w(5);
  const LsProblem p = trajectory_problem(w, 30, NoiseModel{}, 9);
  const LsResult joint = ols_estimate(p);
  double rows_total = 0.0;
  for (Index i = 0; i < 20; ++i) {
    for (const auto& pr : p.pairs) rows_total += std::pow(pr.after(i) - joint.estimate.row(i).dot(pr.before), 2);
  }
  EXPECT_NEAR(ls_objective(p, joint.estimate), rows_total, 1e-10 * rows_total);
}

TEST(Constrained, AllFreeIsBitIdenticalToOls) {
  const TopologyMatrix w = system_w(6);
  LsProblem p = trajectory_problem(w, 25, NoiseModel{}, 1);
  const LsResult ols = ols_estimate(p);
  p.constraints[{2, 3}] = EntryConstraint::Free;
  const LsResult con = constrained_estimate(p);
  EXPECT_EQ(con.estimate, ols.estimate);
}

TEST(Constrained, ExactWithTruePatternOnBasisData) {
  const TopologyMatrix w = system_w(7);
  LsProblem p = basis_problem(w.matrix());
  for (Index j = 0; j < 20; ++j) {
    for (const auto& kv : true_column_constraints(w.matrix(), j)) p.constraints.insert(kv);
  }
  const LsResult r = constrained_estimate(p);
  EXPECT_LE((r.estimate - w.matrix()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(r.zero_at_forced_positive.empty());
}

TEST(Constrained, SoundnessAndObjectiveAgainstProjectedOls) {
  const TopologyMatrix w = system_w(8);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> kind(0, 2);
  for (std::uint64_t s = 0; s < 10; ++s) {
    LsProblem p = trajectory_problem(w, 25, NoiseModel{}, s);
    const LsResult ols = ols_estimate(p);
    for (int k = 0; k < 60; ++k) {
      const Index i = static_cast<Index>(rng() % 20), j = static_cast<Index>(rng() % 20);
      p.constraints[{i, j}] = static_cast<EntryConstraint>(kind(rng));
    }
    const LsResult con = constrained_estimate(p);
    Matrix projected = ols.estimate;
    for (const auto& [ij, c] : p.constraints) {
      if (c == EntryConstraint::ForcedZero) {
        EXPECT_EQ(con.estimate(ij.first, ij.second), 0.0);
        projected(ij.first, ij.second) = 0.0;
      } else if (c == EntryConstraint::ForcedPositive) {
        EXPECT_GE(con.estimate(ij.first, ij.second), 0.0);
        projected(ij.first, ij.second) = std::max(0.0, projected(ij.first, ij.second));
      }
    }
    EXPECT_LE(ls_objective(p, con.estimate), ls_objective(p, projected) * (1.0 + 1e-12));
  }
}

TEST(Constrained, DominatesOlsWithCorrectConstraints) {
  // Repeated basis regressors give X^T X = 3 I, where the constrained solution
  // is the Frobenius projection of OLS onto a convex set containing W.
  const TopologyMatrix w = system_w(9);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double sigma : {0.0, 1e-3, 1e-1}) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      LsProblem p;
      for (int rep = 0; rep < 3; ++rep) {
        for (Index k = 0; k < 20; ++k) {
          const Vector e = Vector::Unit(20, k);
          Vector after = w.matrix() * e;
          for (Index i = 0; i < 20; ++i) after(i) += sigma * g(rng);
          p.pairs.push_back({e, after});
        }
      }
      const LsResult ols = ols_estimate(p);
      p.constraints = true_column_constraints(w.matrix(), static_cast<Index>(s % 20));
      const LsResult con = constrained_estimate(p);
      EXPECT_LE((con.estimate - w.matrix()).norm(), (ols.estimate - w.matrix()).norm() + 1e-9) << sigma << " " << s;
    }
  }
}

TEST(Constrained, DominatesOlsInRegressorMetric) {
  // On trajectory data the guarantee holds in the ||(W_hat - W) X^T|| metric.
  const TopologyMatrix w = system_w(9);
  for (std::uint64_t s = 0; s < 20; ++s) {
    LsProblem p = trajectory_problem(w, 25, NoiseModel{}, s);
    const LsResult ols = ols_estimate(p);
    ASSERT_FALSE(ols.rank_deficient);
    p.constraints = true_column_constraints(w.matrix(), static_cast<Index>(s % 20));
    const LsResult con = constrained_estimate(p);
    Matrix x(25, 20);
    for (Index t = 0; t < 25; ++t) x.row(t) = p.pairs[static_cast<std::size_t>(t)].before.transpose();
    const double dc = ((con.estimate - w.matrix()) * x.transpose()).norm();
    const double d0 = ((ols.estimate - w.matrix()) * x.transpose()).norm();
    EXPECT_LE(dc, d0 * (1.0 + 1e-9)) << s;
  }
}

TEST(Constrained, ConstraintsFromDecision) {
  NeighborDecision d;
  d.source = 1;
  d.estimated_per_hop[1] = {0, 3};
  const auto c = constraints_from_decision(d, 4);
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(c.at({0, 1}), EntryConstraint::ForcedPositive);
  EXPECT_EQ(c.at({2, 1}), EntryConstraint::ForcedZero);
  EXPECT_EQ(c.at({3, 1}), EntryConstraint::ForcedPositive);
  EXPECT_EQ(c.count({1, 1}), 0u);
}

TEST(Problem, Validation) {
  EXPECT_THROW(ols_estimate({}), std::invalid_argument);
  LsProblem p{{{Vector::Zero(2), Vector::Zero(2)}}, {}};
  p.constraints[{2, 0}] = EntryConstraint::ForcedZero;
  EXPECT_THROW(constrained_estimate(p), std::out_of_range);
  LsProblem q{{{Vector::Zero(2), Vector::Zero(3)}}, {}};
  EXPECT_THROW(ols_estimate(q), std::invalid_argument);
}

TEST(Metrics, Examples) {
  const TopologyMatrix w = system_w(10);
  const ErrorMetrics same = error_metrics(w.matrix(), w.matrix());
  EXPECT_EQ(same.structure_error, 0.0);
  EXPECT_EQ(same.magnitude_error, 0.0);

  const ErrorMetrics zero = error_metrics(Matrix::Zero(20, 20), w.matrix());
  EXPECT_DOUBLE_EQ(zero.magnitude_error, 1.0);
  EXPECT_DOUBLE_EQ(zero.structure_error, static_cast<double>((w.matrix().array() > 0.0).count()) / 400.0);

  Matrix bumped = w.matrix();
  Index zi = -1, zj = -1;
  for (Index i = 0; i < 20 && zi < 0; ++i)
    for (Index j = 0; j < 20; ++j)
      if (w(i, j) == 0.0) { zi = i; zj = j; break; }
  bumped(zi, zj) = 2e-6;
  EXPECT_DOUBLE_EQ(error_metrics(bumped, w.matrix()).structure_error, 1.0 / 400.0);
  bumped(zi, zj) = 0.5e-6;  // inside the sign tolerance
  EXPECT_DOUBLE_EQ(error_metrics(bumped, w.matrix()).structure_error, 0.0);

  EXPECT_THROW(error_metrics(Matrix::Zero(2, 2), Matrix::Zero(2, 2)), std::invalid_argument);
  EXPECT_THROW(error_metrics(Matrix::Zero(2, 2), Matrix::Identity(3, 3)), std::invalid_argument);
}
