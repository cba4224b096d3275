#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nettopo/topology.hpp"

namespace nettopo {

/// i.i.d. Gaussian process noise theta_t ~ N(0, sigma_theta^2 I) and
/// measurement noise upsilon_t ~ N(0, sigma_upsilon^2 I).
struct NoiseModel {
  double sigma_theta{1.0};
  double sigma_upsilon{1.0};

  void validate() const;
};

/// A single additive excitation of `magnitude` on `node` at step `time`.
/// `repetitions` is the number of independent trials used by the
/// multi-excitation test; simulate() itself injects once.
struct ExcitationPlan {
  Index node{0};
  Index time{0};
  double magnitude{0.0};
  Index repetitions{1};

  void validate(Index n) const;
};

struct ExcitationEvent {
  Index node{0};
  Index time{0};
  double magnitude{0.0};

  bool operator==(const ExcitationEvent&) const = default;
};

/// States x_0..x_T and observations y_0..y_T stored column-wise.
struct Trajectory {
  Matrix states;
  Matrix observations;
  std::vector<ExcitationEvent> excitations;

  Index nodes() const { return states.rows(); }
  /// Last time index T.
  Index horizon() const { return states.cols() - 1; }
  Vector state(Index t) const { return states.col(t); }
  Vector observation(Index t) const { return observations.col(t); }
};

/// Forward simulation of x_{t+1} = W (x_t + e 1_j [t = t_e]) + theta_t,
/// y_t = x_t + upsilon_t. The observation at the injection step is taken
/// before the excitation. Noise draws do not depend on the excitation, so two
/// runs with the same seed differ only by the propagated excitation.
Trajectory simulate(const TopologyMatrix& w, const Vector& x0, Index horizon,
                    const NoiseModel& noise, const std::optional<ExcitationPlan>& plan,
                    std::uint64_t seed);

/// Delta y^max: largest pairwise gap for a marginally stable W, largest
/// magnitude for an asymptotically stable W.
double deviation_bound(const Vector& y, StabilityClass stability);

/// y_{t+h}^i - y_t^i read off the trajectory.
double observation_deviation(const Trajectory& traj, Index i, Index t, Index h);

/// Cov(x_t) for x_0 with covariance `initial_covariance` and no excitation:
/// W^t S_0 (W^t)^T + sigma_theta^2 sum_{k<t} W^k (W^k)^T.
Matrix state_covariance(const Matrix& w, const NoiseModel& noise, const Matrix& initial_covariance,
                        Index t);

}  // namespace nettopo
