#include "nettopo/dynamics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace nettopo {

void NoiseModel::validate() const {
  if (!(sigma_theta >= 0.0) || !(sigma_upsilon >= 0.0) || !std::isfinite(sigma_theta) ||
      !std::isfinite(sigma_upsilon)) {
    throw std::invalid_argument("noise standard deviations must be finite and >= 0");
  }
}

void ExcitationPlan::validate(Index n) const {
  if (node < 0 || node >= n) throw std::out_of_range("excitation node out of range");
  if (time < 0) throw std::invalid_argument("excitation time must be >= 0");
  if (repetitions < 1) throw std::invalid_argument("excitation repetitions must be >= 1");
  if (!std::isfinite(magnitude)) throw std::invalid_argument("excitation magnitude must be finite");
}

Trajectory simulate(const TopologyMatrix& w, const Vector& x0, Index horizon,
                    const NoiseModel& noise, const std::optional<ExcitationPlan>& plan,
                    std::uint64_t seed) {
  const Index n = w.size();
  if (x0.size() != n) throw std::invalid_argument("initial state has wrong dimension");
  if (!x0.allFinite()) throw std::invalid_argument("initial state must be finite");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  noise.validate();
  if (plan) {
    plan->validate(n);
    if (plan->time >= horizon) throw std::invalid_argument("excitation time must be < horizon");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Matrix& wm = w.matrix();

  Trajectory traj;
  traj.states.resize(n, horizon + 1);
  traj.observations.resize(n, horizon + 1);
  if (plan) traj.excitations.push_back({plan->node, plan->time, plan->magnitude});

  Vector x = x0;
  Vector drive(n);
  for (Index t = 0;; ++t) {
    traj.states.col(t) = x;
    for (Index i = 0; i < n; ++i) traj.observations(i, t) = x(i) + noise.sigma_upsilon * gauss(rng);
    if (t == horizon) break;
    drive = x;
    if (plan && plan->time == t) drive(plan->node) += plan->magnitude;
    x.noalias() = wm * drive;
    for (Index i = 0; i < n; ++i) x(i) += noise.sigma_theta * gauss(rng);
  }
  return traj;
}

double deviation_bound(const Vector& y, StabilityClass stability) {
  if (y.size() == 0) throw std::invalid_argument("deviation bound of an empty vector");
  if (!y.allFinite()) throw std::invalid_argument("deviation bound needs finite observations");
  switch (stability) {
    case StabilityClass::MarginallyStable: return y.maxCoeff() - y.minCoeff();
    case StabilityClass::AsymptoticallyStable: return y.cwiseAbs().maxCoeff();
    case StabilityClass::Unstable: break;
  }
  throw std::invalid_argument("deviation bound is undefined for an unstable topology");
}

double observation_deviation(const Trajectory& traj, Index i, Index t, Index h) {
  if (i < 0 || i >= traj.nodes()) throw std::out_of_range("node index out of range");
  if (t < 0 || h < 0 || t + h > traj.horizon()) throw std::out_of_range("time index out of range");
  return traj.observations(i, t + h) - traj.observations(i, t);
}

Matrix state_covariance(const Matrix& w, const NoiseModel& noise, const Matrix& initial_covariance,
                        Index t) {
  if (t < 0) throw std::invalid_argument("time must be >= 0");
  if (w.rows() != w.cols() || initial_covariance.rows() != w.rows() ||
      initial_covariance.cols() != w.cols()) {
    throw std::invalid_argument("state covariance shapes do not match");
  }
  Matrix cov = initial_covariance;
  const double q = noise.sigma_theta * noise.sigma_theta;
  for (Index k = 0; k < t; ++k) {
    cov = (w * cov * w.transpose()).eval();
    cov.diagonal().array() += q;
  }
  return cov;
}

}  // namespace nettopo
