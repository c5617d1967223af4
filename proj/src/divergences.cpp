#include "heatreg/divergences.hpp"

#include "heatreg/errors.hpp"
#include "heatreg/scalar_max.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace heatreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_p(const char* stem, double p) {
  std::ostringstream os;
  os << stem << p;
  return os.str();
}

}  // namespace

double signed_pow(double x, double a) {
  if (x > 0.0) {
    return std::pow(x, a);
  }
  if (x < 0.0) {
    return -std::pow(-x, a);
  }
  return 0.0;
}

EntropyFunction power_entropy(double p) {
  EntropyFunction F;
  F.name = format_p("E", p);
  if (p == 1.0) {
    F.value = [](double r) { return r > 0.0 ? r * std::log(r) - r + 1.0 : 1.0; };
    F.derivative = [](double r) { return std::log(r); };
    F.conjugate = [](double phi) { return std::expm1(phi); };
    F.recession = kInf;
    return F;
  }
  if (p == 0.0) {
    F.value = [](double r) { return r > 0.0 ? r - 1.0 - std::log(r) : kInf; };
    F.derivative = [](double r) { return 1.0 - 1.0 / r; };
    F.conjugate = [](double phi) { return phi < 1.0 ? -std::log1p(-phi) : kInf; };
    F.recession = 1.0;
    return F;
  }
  const double q = p / (p - 1.0);
  F.value = [p](double r) {
    if (r == 0.0) {
      return p > 0.0 ? 1.0 / p : kInf;
    }
    return (std::pow(r, p) - p * (r - 1.0) - 1.0) / (p * (p - 1.0));
  };
  F.derivative = [p](double r) { return (std::pow(r, p - 1.0) - 1.0) / (p - 1.0); };
  // Stationary point s = u^{1/(p-1)} with u = 1 + (p-1) phi gives (u^q - 1)/p.
  F.conjugate = [p, q](double phi) {
    const double u = 1.0 + (p - 1.0) * phi;
    if (u > 0.0) {
      return (std::pow(u, q) - 1.0) / p;
    }
    if (p > 1.0) {
      return -1.0 / p;  // s = 0 is optimal
    }
    if (p < 0.0 && u == 0.0) {
      return -1.0 / p;
    }
    return kInf;
  };
  F.recession = p >= 1.0 ? kInf : 1.0 / (1.0 - p);
  return F;
}

EntropyFunction hellinger_entropy(double p) {
  if (!(p >= 1.0)) {
    throw InvalidArgument("Hellinger entropy needs p >= 1");
  }
  EntropyFunction F;
  F.name = format_p("F", p);
  F.value = [p](double r) { return std::pow(std::abs(std::pow(r, 1.0 / p) - 1.0), p); };
  F.derivative = [p](double r) {
    const double u = std::pow(r, 1.0 / p);
    return signed_pow(u - 1.0, p - 1.0) * std::pow(r, 1.0 / p - 1.0);
  };
  if (p == 1.0) {
    F.conjugate = [](double phi) { return phi <= 1.0 ? std::max(phi, -1.0) : kInf; };
  } else {
    F.conjugate = [p](double psi) { return hellinger_conjugate(p, psi); };
  }
  F.recession = 1.0;
  return F;
}

EntropyFunction kl_entropy() { return power_entropy(1.0); }

PerspectiveFunction perspective(const EntropyFunction& F) {
  PerspectiveFunction H;
  H.name = "H[" + F.name + "]";
  H.value = [value = F.value, rec = F.recession](double r, double s) {
    if (s > 0.0) {
      const double f = value(r / s);
      return std::isinf(f) ? kInf : s * f;
    }
    if (r > 0.0) {
      return std::isinf(rec) ? kInf : r * rec;
    }
    return 0.0;
  };
  return H;
}

PerspectiveFunction hellinger_perspective(double p) {
  if (!(p >= 1.0)) {
    throw InvalidArgument("Hellinger perspective needs p >= 1");
  }
  return {format_p("H_he", p),
          [p](double r, double s) { return std::pow(std::abs(std::pow(r, 1.0 / p) - std::pow(s, 1.0 / p)), p); }};
}

PerspectiveFunction kl_perspective() {
  return {"H_kl", [](double r0, double r1) {
            if (r0 == 0.0) {
              return r1;
            }
            if (r1 == 0.0) {
              return kInf;
            }
            return r0 * (std::log(r0) - std::log(r1)) + r1 - r0;
          }};
}

double csiszar(const EntropyFunction& F, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  const LebesgueDecomposition dec = lebesgue_decompose(mu0, mu1);
  double total = 0.0;
  for (std::size_t i = 0; i < mu1.size(); ++i) {
    const double b = mu1[i];
    if (b > 0.0) {
      const double f = F.value(dec.density(static_cast<Eigen::Index>(i)));
      if (std::isinf(f)) {
        return kInf;
      }
      total += b * f;
    }
  }
  const double singular = dec.singular.mass();
  if (singular > 0.0) {
    if (std::isinf(F.recession)) {
      return kInf;
    }
    total += F.recession * singular;
  }
  return total;
}

double kl(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) { return csiszar(kl_entropy(), mu0, mu1); }

double perspective_divergence(const PerspectiveFunction& H, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                              const DiscreteMeasure& lambda) {
  require_same_size(mu0, mu1);
  require_same_size(mu0, lambda);
  double total = 0.0;
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    const double l = lambda[i];
    const double a = mu0[i];
    const double b = mu1[i];
    if (l > 0.0) {
      if (a == 0.0 && b == 0.0) {
        continue;
      }
      const double h = H.value(a / l, b / l);
      if (std::isinf(h)) {
        return kInf;
      }
      total += l * h;
    } else if (a > 0.0 || b > 0.0) {
      std::ostringstream os;
      os << "reference lambda vanishes at point " << i << " where the measures do not";
      throw NonDominating(os.str());
    }
  }
  return total;
}

double hellinger(double p, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  if (!(p >= 1.0)) {
    throw InvalidArgument("Hellinger distance needs p >= 1");
  }
  require_same_size(mu0, mu1);
  double total = 0.0;
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    if (p == 1.0) {
      total += std::abs(mu0[i] - mu1[i]);
    } else {
      total += std::pow(std::abs(std::pow(mu0[i], 1.0 / p) - std::pow(mu1[i], 1.0 / p)), p);
    }
  }
  return p == 1.0 ? total : std::pow(total, 1.0 / p);
}

He2ViaKl he2_via_kl(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  require_same_size(mu0, mu1);
  const DiscreteMeasure argmin((mu0.weights().array() * mu1.weights().array()).sqrt().matrix());
  return {kl(argmin, mu0) + kl(argmin, mu1), argmin};
}

StaticDual dual_static(const EntropyFunction& F, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  require_same_size(mu0, mu1);
  const auto n = static_cast<Eigen::Index>(mu0.size());
  StaticDual out{0.0, Vector::Zero(n), Vector::Zero(n), true};
  const double f0 = F.value(0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = mu0.weights()(i);
    const double b = mu1.weights()(i);
    if (a == 0.0 && b == 0.0) {
      continue;
    }
    // Unbounded pointwise suprema: mass against an infinite recession slope,
    // or reference mass where F(0) is infinite.
    if ((b == 0.0 && std::isinf(F.recession)) || (a == 0.0 && std::isinf(f0))) {
      out.value = kInf;
      out.attained = false;
      out.phi(i) = b == 0.0 ? kInf : -kInf;
      out.psi(i) = b == 0.0 ? -kInf : kInf;
      continue;
    }
    // No mass of mu0 here: the supremum of -b F*(phi) is approached as
    // phi -> -inf, where F* tends to -F(0). The approach can be as slow as
    // |phi|^{-1/2}, too slow for a truncated search.
    if (a == 0.0) {
      out.value += b * f0;
      out.phi(i) = -kInf;
      out.psi(i) = f0;
      out.attained = false;
      continue;
    }
    auto objective = [&](double phi) {
      const double fs = F.conjugate(phi);
      if (std::isinf(fs) && fs > 0.0) {
        return -kInf;
      }
      return b > 0.0 ? a * phi - b * fs : a * phi;
    };
    const ScalarMax best = maximize_concave(objective, -kInf, F.recession);
    out.phi(i) = best.argmax;
    out.psi(i) = -F.conjugate(best.argmax);
    out.value += best.value;
    out.attained = out.attained && best.attained;
  }
  return out;
}

double hellinger_conjugate(double p, double psi) {
  if (!(p > 1.0)) {
    throw InvalidArgument("hellinger_conjugate needs p > 1");
  }
  if (psi >= 1.0) {
    return kInf;
  }
  const double q = p / (p - 1.0);
  return psi / std::pow(1.0 - signed_pow(psi, q - 1.0), p - 1.0);
}

double hellinger_dual_flow(double p, double zeta0) {
  if (!(p > 1.0)) {
    throw InvalidArgument("hellinger_dual_flow needs p > 1");
  }
  if (!(zeta0 > -1.0)) {
    std::ostringstream os;
    os << "dual flow needs zeta0 > -1, got " << zeta0;
    throw InvalidArgument(os.str());
  }
  const double q = p / (p - 1.0);
  return zeta0 / std::pow(1.0 + signed_pow(zeta0, q - 1.0), p - 1.0);
}

Vector hellinger_dual_flow(double p, const Vector& zeta0) {
  Vector out(zeta0.size());
  for (Eigen::Index i = 0; i < zeta0.size(); ++i) {
    out(i) = hellinger_dual_flow(p, zeta0(i));
  }
  return out;
}

HellingerDual hellinger_dual_value(double p, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  if (!(p > 1.0)) {
    throw InvalidArgument("hellinger_dual_value needs p > 1");
  }
  require_same_size(mu0, mu1);
  const auto n = static_cast<Eigen::Index>(mu0.size());
  HellingerDual out{0.0, Vector::Zero(n), true};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = mu0.weights()(i);
    const double b = mu1.weights()(i);
    if (a == 0.0 && b == 0.0) {
      continue;
    }
    if (a == 0.0) {
      // The flow tends to 1 as zeta0 -> inf.
      out.zeta0(i) = kInf;
      out.value += b;
      out.attained = false;
      continue;
    }
    auto objective = [&](double z) { return b * hellinger_dual_flow(p, z) - a * z; };
    const ScalarMax best = maximize_concave(objective, -1.0, kInf);
    out.zeta0(i) = best.argmax;
    out.value += best.value;
    out.attained = out.attained && best.attained;
  }
  return out;
}

}  // namespace heatreg
