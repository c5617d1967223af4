#pragma once

#include "heatreg/space.hpp"

#include <functional>
#include <string>

namespace heatreg {

/**
 * @brief Convex entropy density F : [0, inf) -> [0, inf] with F(1) = 0.
 *
 * `value(0)` is the lower semicontinuous extension lim_{r -> 0} F(r).
 * `conjugate` is F*(phi) = sup_{s >= 0} (s phi - F(s)); its effective domain
 * is contained in (-inf, recession].
 */
struct EntropyFunction {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::function<double(double)> conjugate;
  double recession = 0.0;  // F'(inf), possibly +inf
};

/// 1-homogeneous perspective H(r, s) = s F(r / s), H(r, 0) = r F'(inf).
struct PerspectiveFunction {
  std::string name;
  std::function<double(double, double)> value;
};

/// Power-like entropies E_p (E_1 gives Kullback-Leibler, E_0 the reverse).
EntropyFunction power_entropy(double p);

/// F_p(r) = |r^{1/p} - 1|^p, the density of the p-Hellinger distance.
EntropyFunction hellinger_entropy(double p);

EntropyFunction kl_entropy();

PerspectiveFunction perspective(const EntropyFunction& F);

/// Closed-form perspectives used as independent routes in the tests.
PerspectiveFunction hellinger_perspective(double p);
PerspectiveFunction kl_perspective();

/// Signed power sign(x) |x|^a.
double signed_pow(double x, double a);

/// sum F(rho) dmu1 + F'(inf) * singular mass of mu0.
double csiszar(const EntropyFunction& F, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1);

/// Kullback-Leibler divergence KL(mu0 | mu1).
double kl(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1);

/// integral of H(d mu0/d lambda, d mu1/d lambda) d lambda. Throws
/// NonDominating unless lambda charges every point where mu0 + mu1 > 0.
double perspective_divergence(const PerspectiveFunction& H, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                              const DiscreteMeasure& lambda);

/// The p-Hellinger distance He_p (the p-th root of the integral), p >= 1.
double hellinger(double p, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1);

struct He2ViaKl {
  double value = 0.0;  // KL(argmin | mu0) + KL(argmin | mu1)
  DiscreteMeasure argmin;
};

/// He_2^2 as min_mu KL(mu | mu0) + KL(mu | mu1), minimizer sqrt(mu0 mu1).
He2ViaKl he2_via_kl(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1);

struct StaticDual {
  double value = 0.0;
  Vector phi;
  Vector psi;
  bool attained = true;
};

/**
 * Dual of the Csiszar divergence, solved pointwise: at every point
 * sup_phi (mu0 phi - mu1 F*(phi)), with psi = -F*(phi). Suprema that are only
 * approached report the best value found and clear `attained`; unbounded
 * suprema report +inf.
 */
StaticDual dual_static(const EntropyFunction& F, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1);

/// F_p*(psi) = psi / (1 - psi^{q-1})^{p-1} for psi < 1, +inf otherwise.
double hellinger_conjugate(double p, double psi);

/// zeta0 / (1 + zeta0^{q-1})^{p-1}, the time-one solution of
/// d/dt zeta + (p-1) zeta^q = 0. Requires every entry > -1.
Vector hellinger_dual_flow(double p, const Vector& zeta0);
double hellinger_dual_flow(double p, double zeta0);

struct HellingerDual {
  double value = 0.0;
  Vector zeta0;
  bool attained = true;
};

/// sup over zeta0 > -1 of int flow(zeta0) dmu1 - int zeta0 dmu0, which
/// equals He_p^p. Solved pointwise.
HellingerDual hellinger_dual_value(double p, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1);

}  // namespace heatreg
