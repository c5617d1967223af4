#pragma once

#include "heatreg/kernels.hpp"
#include "heatreg/space.hpp"

#include <vector>

namespace heatreg {

/// ell_alpha(d) = log(1 + tan^2(d / sqrt(alpha))) below the cutoff
/// sqrt(alpha) pi / 2, +inf at and beyond it.
double cost_ell(double alpha, double d);

struct HkOptions {
  std::vector<double> epsilon_schedule{1e-1, 1e-2, 1e-3, 1e-4};
  int max_iter = 20000;  // per epsilon stage
  double tol = 1e-8;     // sup-norm change of the log-scalings
  double relaxation = 1.8;  // over-relaxation factor in (0, 2); 1 is plain scaling
  kernels::Exec exec = kernels::Exec::parallel;
};

/// Result of the Logarithmic-Entropy-Transport problem.
struct LetSolution {
  Matrix gamma;
  double value = 0.0;       // unregularized objective at gamma, i.e. HK^2 from above
  double lower_bound = 0.0; // dual objective of a feasible dual pair, HK^2 from below
  double gap_estimate = 0.0;
  bool converged = false;
  int iterations = 0;

  double distance() const;
};

/// KL(gamma_0 | mu0) + KL(gamma_1 | mu1) + sum gamma ell_alpha(d).
double let_objective(const MetricMeasureSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                     double alpha, const Matrix& gamma);

/**
 * HK_alpha^2 by entropic regularization with a decreasing epsilon schedule.
 * Each stage runs KL-penalized marginal scaling in the log domain followed by
 * the closed-form mass translation of the two potentials. The reported value
 * is the unregularized objective of the final plan; the gap estimate compares
 * it with the dual objective of the c-transformed potentials.
 * Throws InvalidArgument for alpha <= 0. Non-convergence sets converged=false.
 */
LetSolution hk(const MetricMeasureSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, double alpha,
               const HkOptions& opts = {});

/// Direct minimization of the LET objective for spaces with at most three
/// points: dense lattice search, then exact coordinate descent.
double hk_bruteforce(const MetricMeasureSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                     double alpha, int grid_resolution = 12);

}  // namespace heatreg
