#include "heatreg/gaussian.hpp"

#include "heatreg/errors.hpp"
#include "heatreg/transport.hpp"

#include <algorithm>
#include <cmath>

namespace heatreg {

double Gaussian1D::sigma() const { return std::sqrt(var); }

Gaussian1D gaussian(double mean, double var, double mass) {
  if (!std::isfinite(mean) || !(var > 0.0) || !std::isfinite(var) || !(mass > 0.0) || !std::isfinite(mass)) {
    throw InvalidArgument("Gaussian needs finite mean, var > 0 and mass > 0");
  }
  return Gaussian1D{mean, var, mass};
}

Gaussian1D ou_flow(const Gaussian1D& g, double t) {
  if (!(t >= 0.0)) {
    throw InvalidArgument("time must be >= 0");
  }
  gaussian(g.mean, g.var, g.mass);
  return Gaussian1D{g.mean * std::exp(-t), g.var * std::exp(-2.0 * t) - std::expm1(-2.0 * t), g.mass};
}

double w2_gauss(const Gaussian1D& g0, const Gaussian1D& g1) {
  require_equal_mass(g0.mass, g1.mass);
  const double dm = g0.mean - g1.mean;
  const double ds = g0.sigma() - g1.sigma();
  return std::sqrt(g0.mass * (dm * dm + ds * ds));
}

double he2_gauss(const Gaussian1D& g0, const Gaussian1D& g1) {
  const double s0 = g0.sigma();
  const double s1 = g1.sigma();
  const double v = g0.var + g1.var;
  const double dm = g0.mean - g1.mean;
  // log of the Bhattacharyya coefficient sqrt(2 s0 s1 / v) exp(-dm^2 / (4v)),
  // written so that identical Gaussians give exactly 0.
  const double ds = s0 - s1;
  const double log_bc = -0.5 * std::log1p(ds * ds / (2.0 * s0 * s1)) - dm * dm / (4.0 * v);
  const double root_gap = std::sqrt(g0.mass) - std::sqrt(g1.mass);
  const double sq = root_gap * root_gap - 2.0 * std::sqrt(g0.mass * g1.mass) * std::expm1(log_bc);
  return std::sqrt(std::max(0.0, sq));
}

double kl_gauss(const Gaussian1D& g0, const Gaussian1D& g1) {
  const double dm = g0.mean - g1.mean;
  const double unit = std::log(g1.sigma() / g0.sigma()) + (g0.var + dm * dm) / (2.0 * g1.var) - 0.5;
  return g0.mass * (std::log(g0.mass / g1.mass) + unit) - g0.mass + g1.mass;
}

}  // namespace heatreg
