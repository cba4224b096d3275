#pragma once

#include "nettopo/dynamics.hpp"
#include "nettopo/topology.hpp"

namespace nettopo {

/// Gauss error function, 2/sqrt(pi) int_0^z exp(-r^2) dr.
double erf(double z);

/// Inverse of erf on (-1, 1). Newton iteration on erf with a bisection
/// fallback; throws std::domain_error for |p| >= 1.
double erf_inv(double p);

/// Design-level choice of excitation for the one-hop test.
struct TestDesign {
  double weight_floor{0.0};
  double target_error{0.0};
  double sigma_bound{0.0};
  double critical_excitation{0.0};
};

/// Per-node h-step deviation noise sigma_{omega,h}(i).
struct HStepNoise {
  Vector per_node;
  Index horizon{0};
};

/// sigma_bar_omega = sqrt((1 + n) s_u^2 + s_t^2), or sqrt(2 s_u^2 + s_t^2)
/// when W is known to be row-stochastic.
double sigma_omega_bound(Index n, const NoiseModel& noise, bool row_stochastic);

/// Row i of Gamma(h) = W^h.
Vector gamma_row(const Matrix& w, Index i, Index h);

/// Gamma(h) = W^h.
Matrix transition_power(const Matrix& w, Index h);

/// sigma_{omega,h}(i) from the squared row norms of Gamma(0..h):
/// (1 + sum_j Gamma_ij(h)^2) s_u^2 + (sum_{m=1..h} sum_j Gamma_ij(m-1)^2) s_t^2.
double sigma_omega_h(const TopologyMatrix& w, Index i, Index h, const NoiseModel& noise);

HStepNoise h_step_noise(const TopologyMatrix& w, Index h, const NoiseModel& noise);

/// Standard deviation of the one-step deviation y_{t+1}^i - y_t^i when the
/// natural drift [(W - I) x_t]^i is treated as noise rather than bounded:
/// sqrt([(W - I) S (W - I)^T]_ii + s_t^2 + 2 s_u^2) with S = Cov(x_t).
double deviation_sigma_with_drift(const Matrix& w, const Matrix& state_cov, Index i,
                                  const NoiseModel& noise);

/// Smallest |e| reaching misjudgement probability delta_bar against weight w:
/// 2 sqrt(2) sigma erf^-1(1 - delta_bar) / w. Also serves the within-h test
/// with (sigma_{omega,h}, Gamma_ij(h)).
double critical_excitation(double sigma, double weight, double delta_bar);

TestDesign design_one_hop_test(double sigma_bound, double weight_floor, double delta_bar);

/// delta_e = 1 - erf(w |e| / (2 sqrt(2) sigma)), false alarm plus missed
/// detection of the likelihood-ratio test with threshold w e / 2.
double misjudgement_probability(double sigma, double weight, double e);

/// Mass of N(0, sigma^2) above z e / 2.
double f0(double z, double e, double sigma);
/// Mass of N(z e, sigma^2) above z e / 2. f0 + f1 == 1.
double f1(double z, double e, double sigma);

/// e_m = 2 sqrt(2) sigma erf^-1(1 - 2 alpha) / gamma_min.
double hhop_critical_excitation(double sigma, double gamma_min, double alpha);

/// F1(gamma_min, e_m) (2 - alpha - F1(gamma_max, e_m)).
double hhop_lower_bound(double gamma_min, double gamma_max, double e_m, double alpha,
                        double sigma);

/// Misjudgement bound after averaging m independent excitations:
/// 1 - erf(q0 |e| sqrt(m) / (2 sqrt(2) sigma)).
double multi_excitation_bound(double e, double q0, double sigma, Index m);

}  // namespace nettopo
