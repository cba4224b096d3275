#include "nettopo/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nettopo {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kTwoOverSqrtPi = std::numbers::inv_sqrtpi * 2.0;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

// Winitzki's closed-form approximation; a starting point only.
double erf_inv_guess(double a) {
  constexpr double k = 0.147;
  const double ln = std::log1p(-a * a);
  const double t = 2.0 / (std::numbers::pi * k) + 0.5 * ln;
  return std::sqrt(std::sqrt(t * t - ln / k) - t);
}

}  // namespace

double erf(double z) { return std::erf(z); }

double erf_inv(double p) {
  if (std::isnan(p) || !(std::abs(p) < 1.0)) throw std::domain_error("erf_inv needs |p| < 1");
  if (p == 0.0) return 0.0;
  const double a = std::abs(p);
  // For a > 0.5 the complement 1 - a is exact, so match erfc instead of erf.
  const bool use_tail = a > 0.5;
  const double tail = 1.0 - a;
  auto residual = [&](double x) { return use_tail ? tail - std::erfc(x) : std::erf(x) - a; };

  double lo = 0.0;
  double hi = 6.0;  // erf(6) rounds to 1
  double x = std::min(erf_inv_guess(a), hi);
  for (int iter = 0; iter < 100; ++iter) {
    const double r = residual(x);
    if (r == 0.0) break;
    if (r > 0.0) hi = x; else lo = x;
    const double slope = kTwoOverSqrtPi * std::exp(-x * x);
    double next = x - r / slope;
    if (!(next > lo && next < hi) || slope == 0.0) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x)) {
      x = next;
      break;
    }
    x = next;
  }
  return std::copysign(x, p);
}

double sigma_omega_bound(Index n, const NoiseModel& noise, bool row_stochastic) {
  if (n < 1) throw std::invalid_argument("sigma_omega_bound needs n >= 1");
  noise.validate();
  const double su2 = noise.sigma_upsilon * noise.sigma_upsilon;
  const double st2 = noise.sigma_theta * noise.sigma_theta;
  const double factor = row_stochastic ? 2.0 : 1.0 + static_cast<double>(n);
  return std::sqrt(factor * su2 + st2);
}

Vector gamma_row(const Matrix& w, Index i, Index h) {
  if (i < 0 || i >= w.rows()) throw std::out_of_range("node index out of range");
  if (h < 0) throw std::invalid_argument("power must be >= 0");
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Unit(w.cols(), i);
  for (Index l = 0; l < h; ++l) row = (row * w).eval();
  return row.transpose();
}

Matrix transition_power(const Matrix& w, Index h) {
  if (h < 0) throw std::invalid_argument("power must be >= 0");
  Matrix out = Matrix::Identity(w.rows(), w.cols());
  for (Index l = 0; l < h; ++l) out = (out * w).eval();
  return out;
}

double sigma_omega_h(const TopologyMatrix& w, Index i, Index h, const NoiseModel& noise) {
  if (h < 1) throw std::invalid_argument("sigma_omega_h needs h >= 1");
  if (i < 0 || i >= w.size()) throw std::out_of_range("node index out of range");
  noise.validate();
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Unit(w.size(), i);
  double process_gain = 0.0;
  for (Index m = 1; m <= h; ++m) {
    process_gain += row.squaredNorm();  // Gamma(m - 1)
    row = (row * w.matrix()).eval();
  }
  const double measurement_gain = 1.0 + row.squaredNorm();  // Gamma(h)
  const double var = measurement_gain * noise.sigma_upsilon * noise.sigma_upsilon +
                     process_gain * noise.sigma_theta * noise.sigma_theta;
  return std::sqrt(var);
}

HStepNoise h_step_noise(const TopologyMatrix& w, Index h, const NoiseModel& noise) {
  HStepNoise out;
  out.horizon = h;
  out.per_node.resize(w.size());
  for (Index i = 0; i < w.size(); ++i) out.per_node(i) = sigma_omega_h(w, i, h, noise);
  return out;
}

double deviation_sigma_with_drift(const Matrix& w, const Matrix& state_cov, Index i,
                                  const NoiseModel& noise) {
  if (i < 0 || i >= w.rows()) throw std::out_of_range("node index out of range");
  noise.validate();
  Eigen::RowVectorXd drift = w.row(i);
  drift(i) -= 1.0;
  const double drift_var = drift * state_cov * drift.transpose();
  return std::sqrt(drift_var + noise.sigma_theta * noise.sigma_theta +
                   2.0 * noise.sigma_upsilon * noise.sigma_upsilon);
}

double critical_excitation(double sigma, double weight, double delta_bar) {
  require_positive(weight, "weight");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (!(delta_bar > 0.0 && delta_bar <= 1.0)) {
    throw std::invalid_argument("target misjudgement probability must lie in (0, 1]");
  }
  return 2.0 * kSqrt2 * sigma * erf_inv(1.0 - delta_bar) / weight;
}

TestDesign design_one_hop_test(double sigma_bound, double weight_floor, double delta_bar) {
  require_positive(sigma_bound, "sigma bound");
  if (!(delta_bar > 0.0 && delta_bar < 1.0)) {
    throw std::invalid_argument("target misjudgement probability must lie in (0, 1)");
  }
  return {weight_floor, delta_bar, sigma_bound,
          critical_excitation(sigma_bound, weight_floor, delta_bar)};
}

double misjudgement_probability(double sigma, double weight, double e) {
  require_positive(sigma, "sigma");
  require_positive(weight, "weight");
  return std::erfc(weight * std::abs(e) / (2.0 * kSqrt2 * sigma));
}

double f0(double z, double e, double sigma) {
  require_positive(sigma, "sigma");
  const double u = z * e / (2.0 * kSqrt2 * sigma);
  // Evaluate whichever tail is small directly; the other is its complement.
  if (u >= 0.0) return 0.5 * std::erfc(u);
  return 1.0 - 0.5 * std::erfc(-u);
}

double f1(double z, double e, double sigma) { return 1.0 - f0(z, e, sigma); }

double hhop_critical_excitation(double sigma, double gamma_min, double alpha) {
  require_positive(sigma, "sigma");
  require_positive(gamma_min, "gamma_min");
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 0.5)");
  return 2.0 * kSqrt2 * sigma * erf_inv(1.0 - 2.0 * alpha) / gamma_min;
}

double hhop_lower_bound(double gamma_min, double gamma_max, double e_m, double alpha,
                        double sigma) {
  require_positive(gamma_min, "gamma_min");
  if (gamma_max < gamma_min) throw std::invalid_argument("gamma_max must be >= gamma_min");
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 0.5)");
  return f1(gamma_min, e_m, sigma) * (2.0 - alpha - f1(gamma_max, e_m, sigma));
}

double multi_excitation_bound(double e, double q0, double sigma, Index m) {
  if (m < 1) throw std::invalid_argument("repetition count must be >= 1");
  require_positive(q0, "q0");
  require_positive(sigma, "sigma");
  return std::erfc(q0 * std::abs(e) * std::sqrt(static_cast<double>(m)) / (2.0 * kSqrt2 * sigma));
}

}  // namespace nettopo
