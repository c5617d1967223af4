#pragma once

namespace heatreg {

/// Mass times the normal density N(mean, var) on the real line.
struct Gaussian1D {
  double mean = 0.0;
  double var = 1.0;
  double mass = 1.0;

  double sigma() const;
};

/// Validates var > 0 and mass > 0.
Gaussian1D gaussian(double mean, double var, double mass = 1.0);

/// Adjoint Ornstein-Uhlenbeck flow: mean e^{-t}, variance 1 - (1 - var) e^{-2t}.
Gaussian1D ou_flow(const Gaussian1D& g, double t);

/// W_2 = sqrt(mass ((m0 - m1)^2 + (s0 - s1)^2)); masses must agree.
double w2_gauss(const Gaussian1D& g0, const Gaussian1D& g1);

/// He_2 against Lebesgue measure (the distance, not its square).
double he2_gauss(const Gaussian1D& g0, const Gaussian1D& g1);

/// KL(g0 | g1), including the mass term for unequal masses.
double kl_gauss(const Gaussian1D& g0, const Gaussian1D& g1);

}  // namespace heatreg
