#pragma once

#include "heatreg/kernels.hpp"
#include "heatreg/space.hpp"

#include <span>
#include <vector>

namespace heatreg {

/**
 * @brief Reversible Markov generator on a metric-measure space.
 *
 * Off-diagonal rates are nonnegative, rows sum to zero and detailed balance
 * m_i L_ij = m_j L_ji holds (checked to 1e-12 relative at construction).
 */
class Generator {
 public:
  Generator(MetricMeasureSpace space, Matrix L);

  const MetricMeasureSpace& space() const { return space_; }
  const Matrix& L() const { return L_; }
  const Vector& reference() const { return space_.reference(); }
  std::size_t size() const { return space_.size(); }
  /// Points y != x with L(x, y) > 0.
  const std::vector<std::vector<Eigen::Index>>& neighbors() const { return nbrs_; }

 private:
  MetricMeasureSpace space_;
  Matrix L_;
  std::vector<std::vector<Eigen::Index>> nbrs_;
};

/// Second differences on the discretized circle, h = length / n.
Generator cycle_generator(int n, double length);

/// Ornstein-Uhlenbeck birth-death chain on a uniform grid. Rates
/// h^-2 sqrt(m_{i+-1} / m_i) make the chain reversible for the discrete
/// Gaussian weights m_i ~ exp(-x_i^2 / 2) h; points with |x| > radius are
/// dropped.
Generator ou_generator(std::span<const double> positions, double radius);
/// Grid -radius, -radius + h, ..., radius.
Generator ou_generator(double h, double radius);

/// Uniform grid of spacing h covering [-radius, radius] (symmetric about 0).
std::vector<double> symmetric_grid(double h, double radius);

/**
 * Spectral cache of a generator. S = D^{1/2} L D^{-1/2} (D = diag m) is
 * symmetric, so P_t = D^{-1/2} U exp(t Lambda) U^T D^{1/2}.
 */
class Semigroup {
 public:
  explicit Semigroup(const Generator& G);

  /// P_t f.
  Vector apply(double t, const Vector& f) const;
  /// P_t^* mu, the measure with int f dP_t^* mu = int P_t f dmu.
  DiscreteMeasure dual(double t, const DiscreteMeasure& mu) const;
  /// Transition matrix exp(tL), tiny negative round-off clamped to zero.
  Matrix kernel(double t) const;

  const Vector& eigenvalues() const { return lambda_; }
  /// max |L - reconstructed L| relative to max |L| (or absolute below 1).
  double reconstruction_error() const;

 private:
  Matrix L_;
  Vector sqrt_m_;
  Matrix U_;
  Vector lambda_;
};

Vector heat_apply(const Generator& G, double t, const Vector& f);
DiscreteMeasure heat_dual(const Generator& G, double t, const DiscreteMeasure& mu);

/// Carre du champ Gamma(f, g)(x) = 1/2 sum_y L(x,y) (f_y - f_x)(g_y - g_x).
Vector gamma(const Generator& G, const Vector& f, const Vector& g);
Vector gamma(const Generator& G, const Vector& f);
/// Gamma_2(f) = 1/2 L Gamma(f) - Gamma(f, L f).
Vector gamma2(const Generator& G, const Vector& f);

struct CurvatureBound {
  double K = 0.0;    // min over points, -inf when no finite bound exists
  bool finite = true;
  Vector per_point;  // best constant at each point
};

/**
 * Largest K with Gamma_2(f)(x) >= K Gamma(f)(x) for all f and x. At each x
 * both sides are quadratic forms in the values of f on the two-step
 * neighbourhood; K(x) is the smallest generalized eigenvalue on the range of
 * the Gamma form after eliminating its kernel by a Schur complement.
 */
CurvatureBound curvature_lower_bound(const Generator& G, kernels::Exec exec = kernels::Exec::parallel);
CurvatureBound curvature_lower_bound_serial(const Generator& G);

/// (e^{2Kt} - 1) / K, and 2t for K = 0.
double r_k(double K, double t);

/// 1/2 sum_x Gamma(f)(x) m_x = 1/2 <-Lf, f>_m.
double dirichlet_energy(const Generator& G, const Vector& f);

}  // namespace heatreg
