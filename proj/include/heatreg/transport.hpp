#pragma once

#include "heatreg/space.hpp"

#include <span>

namespace heatreg {

/// Coupling of two equal-mass measures; row sums mu0, column sums mu1.
struct TransportPlan {
  Matrix plan;
  double cost = 0.0;  // sum plan(i,j) * cost(i,j)
};

struct TransportSolution {
  TransportPlan plan;
  /// Dual potentials with u(i) + v(j) <= cost(i,j), tight on the plan support.
  Vector u;
  Vector v;
  double dual_value = 0.0;
  double duality_gap = 0.0;
};

/**
 * Exact balanced transportation problem by successive shortest paths
 * (Dijkstra with reduced costs on the dense bipartite residual graph).
 * Supplies and demands must have equal totals (checked to 1e-12 relative).
 */
TransportSolution solve_transport(const Matrix& cost, const Vector& supply, const Vector& demand);

struct Wasserstein {
  double distance = 0.0;  // W_p = cost^{1/p}
  TransportSolution solution;
};

/// Exact p-Wasserstein distance between equal-mass measures on a space.
Wasserstein wasserstein(const MetricMeasureSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                        double p);

/// W_p on the line by the monotone (quantile) coupling.
double wasserstein_1d(std::span<const double> positions, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                      double p);

/// Throws MassMismatch unless |m0 - m1| <= 1e-12 max(m0, m1); throws on zero mass.
void require_equal_mass(double m0, double m1);

}  // namespace heatreg
