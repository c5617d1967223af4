#include "heatreg/space.hpp"

#include "heatreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace heatreg {

namespace {

void validate_metric(const Matrix& d) {
  const Eigen::Index n = d.rows();
  if (d.cols() != n) {
    throw DimensionMismatch("distance matrix must be square");
  }
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = d(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream os;
        os << "distance (" << i << "," << j << ") = " << v << " is not a finite nonnegative number";
        throw MetricViolation(os.str());
      }
      scale = std::max(scale, v);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) {
      std::ostringstream os;
      os << "nonzero diagonal at " << i << ": " << d(i, i);
      throw MetricViolation(os.str());
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (d(i, j) != d(j, i)) {
        std::ostringstream os;
        os << "asymmetric distance: d(" << i << "," << j << ") = " << d(i, j) << " but d(" << j << "," << i
           << ") = " << d(j, i);
        throw MetricViolation(os.str());
      }
      if (d(i, j) <= 0.0) {
        std::ostringstream os;
        os << "distinct points " << i << " and " << j << " at distance 0";
        throw MetricViolation(os.str());
      }
    }
  }
  // Rounding slack for distances built by floating-point arithmetic.
  const double slack = 1e-12 * scale;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dij = d(i, j);
      for (Eigen::Index k = 0; k < n; ++k) {
        if (d(i, k) > dij + d(j, k) + slack) {
          std::ostringstream os;
          os << "triangle inequality fails for (i,j,k) = (" << i << "," << j << "," << k << "): d(i,k) = " << d(i, k)
             << " > d(i,j) + d(j,k) = " << dij + d(j, k);
          throw MetricViolation(os.str());
        }
      }
    }
  }
}

}  // namespace

MetricMeasureSpace::MetricMeasureSpace(Matrix dist, Vector reference) : dist_(std::move(dist)), m_(std::move(reference)) {
  if (dist_.rows() != m_.size()) {
    throw DimensionMismatch("distance matrix and reference measure have different sizes");
  }
  if (m_.size() == 0) {
    throw InvalidArgument("a space needs at least one point");
  }
  validate_metric(dist_);
  for (Eigen::Index i = 0; i < m_.size(); ++i) {
    if (!(m_(i) > 0.0) || !std::isfinite(m_(i))) {
      std::ostringstream os;
      os << "reference weight m[" << i << "] = " << m_(i) << " is not strictly positive";
      throw NonpositiveReference(os.str());
    }
  }
}

DiscreteMeasure::DiscreteMeasure(Vector weights) : w_(std::move(weights)) {
  for (Eigen::Index i = 0; i < w_.size(); ++i) {
    if (!(w_(i) >= 0.0) || !std::isfinite(w_(i))) {
      std::ostringstream os;
      os << "measure weight " << i << " = " << w_(i) << " is not a finite nonnegative number";
      throw InvalidArgument(os.str());
    }
  }
}

MetricMeasureSpace new_space(Matrix dist, Vector reference) {
  return MetricMeasureSpace(std::move(dist), std::move(reference));
}

MetricMeasureSpace cycle_space(int n, double length) {
  if (n < 3) {
    throw InvalidArgument("cycle_space needs n >= 3");
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw InvalidArgument("cycle length must be positive");
  }
  const double h = length / n;
  Matrix d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int k = std::abs(i - j);
      d(i, j) = h * std::min(k, n - k);
    }
  }
  return MetricMeasureSpace(std::move(d), Vector::Constant(n, 1.0 / n));
}

MetricMeasureSpace line_space(std::span<const double> positions, Vector reference) {
  const auto n = static_cast<Eigen::Index>(positions.size());
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      d(i, j) = std::abs(positions[static_cast<std::size_t>(i)] - positions[static_cast<std::size_t>(j)]);
    }
  }
  return MetricMeasureSpace(std::move(d), std::move(reference));
}

void require_same_size(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << "measures have different lengths (" << a.size() << " vs " << b.size() << ")";
    throw DimensionMismatch(os.str());
  }
}

void require_on_space(const MetricMeasureSpace& space, const DiscreteMeasure& mu) {
  if (mu.size() != space.size()) {
    std::ostringstream os;
    os << "measure of length " << mu.size() << " does not live on a space with " << space.size() << " points";
    throw DimensionMismatch(os.str());
  }
}

LebesgueDecomposition lebesgue_decompose(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  require_same_size(mu0, mu1);
  const auto n = static_cast<Eigen::Index>(mu0.size());
  Vector density = Vector::Zero(n);
  Vector singular = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = mu0.weights()(i);
    const double b = mu1.weights()(i);
    if (b > 0.0) {
      density(i) = a / b;
    } else {
      singular(i) = a;
    }
  }
  return {std::move(density), DiscreteMeasure(std::move(singular))};
}

}  // namespace heatreg
