#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace heatreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/**
 * @brief Finite metric space with a strictly positive reference measure.
 *
 * Immutable after construction. The constructor checks symmetry, a zero
 * diagonal, strict positivity off the diagonal and the triangle inequality
 * (O(n^3)), and that every reference weight is positive.
 */
class MetricMeasureSpace {
 public:
  MetricMeasureSpace(Matrix dist, Vector reference);

  std::size_t size() const { return static_cast<std::size_t>(m_.size()); }
  const Matrix& dist() const { return dist_; }
  double dist(std::size_t i, std::size_t j) const {
    return dist_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Vector& reference() const { return m_; }

 private:
  Matrix dist_;
  Vector m_;
};

/// Nonnegative point masses over the points of a space.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(Vector weights);
  static DiscreteMeasure zeros(std::size_t n) { return DiscreteMeasure(Vector::Zero(static_cast<Eigen::Index>(n))); }

  std::size_t size() const { return static_cast<std::size_t>(w_.size()); }
  const Vector& weights() const { return w_; }
  double operator[](std::size_t i) const { return w_(static_cast<Eigen::Index>(i)); }
  double mass() const { return w_.sum(); }

 private:
  Vector w_;
};

/// mu0 = density * mu1 + singular, singular concentrated on {mu1 = 0}.
struct LebesgueDecomposition {
  Vector density;
  DiscreteMeasure singular;
};

MetricMeasureSpace new_space(Matrix dist, Vector reference);

/// n equispaced points on a circle of circumference `length`, uniform
/// probability reference measure, arc-length distance.
MetricMeasureSpace cycle_space(int n, double length);

/// Points on the real line with |x_i - x_j| as distance.
MetricMeasureSpace line_space(std::span<const double> positions, Vector reference);

LebesgueDecomposition lebesgue_decompose(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1);

void require_same_size(const DiscreteMeasure& a, const DiscreteMeasure& b);
void require_on_space(const MetricMeasureSpace& space, const DiscreteMeasure& mu);

}  // namespace heatreg
