#include "heatreg/transport.hpp"

#include "heatreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace heatreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dual certificate on the final residual graph: shortest-path distances from a
// virtual root (0-cost arcs to every node), seeded with the SSP potentials.
void certify_duals(const Matrix& cost, const Matrix& flow, Vector& d_src, Vector& d_snk) {
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  const double eps = 1e-15 * std::max(1.0, cost.cwiseAbs().maxCoeff());
  for (Eigen::Index round = 0; round < n + m + 1; ++round) {
    bool changed = false;
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double c = cost(i, j);
        if (d_src(i) + c < d_snk(j) - eps) {
          d_snk(j) = d_src(i) + c;
          changed = true;
        }
        if (flow(i, j) > 0.0 && d_snk(j) - c < d_src(i) - eps) {
          d_src(i) = d_snk(j) - c;
          changed = true;
        }
      }
    }
    if (!changed) {
      break;
    }
  }
}

}  // namespace

void require_equal_mass(double m0, double m1) {
  if (!(m0 > 0.0) || !(m1 > 0.0)) {
    throw PreconditionError("transport between measures of zero total mass");
  }
  if (std::abs(m0 - m1) > 1e-12 * std::max(m0, m1)) {
    std::ostringstream os;
    os.precision(17);
    os << "measures have different total mass: " << m0 << " vs " << m1;
    throw MassMismatch(os.str());
  }
}

TransportSolution solve_transport(const Matrix& cost, const Vector& supply, const Vector& demand) {
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  if (supply.size() != n || demand.size() != m) {
    throw DimensionMismatch("cost matrix does not match supply/demand lengths");
  }
  if ((cost.array() < 0.0).any() || !cost.allFinite()) {
    throw InvalidArgument("transport costs must be finite and nonnegative");
  }
  require_equal_mass(supply.sum(), demand.sum());

  const double total = supply.sum();
  const double snap = 1e-14 * total;
  Vector rem_supply = supply;
  Vector rem_demand = demand;
  Matrix flow = Matrix::Zero(n, m);

  // Node layout: sources [0, n), sinks [n, n+m), S = n+m, T = n+m+1.
  const Eigen::Index S = n + m;
  const Eigen::Index T = n + m + 1;
  const Eigen::Index V = n + m + 2;
  std::vector<double> pi(static_cast<std::size_t>(V), 0.0);
  std::vector<double> dist(static_cast<std::size_t>(V));
  std::vector<Eigen::Index> prev(static_cast<std::size_t>(V));
  std::vector<char> done(static_cast<std::size_t>(V));
  auto at = [](auto& v, Eigen::Index k) -> auto& { return v[static_cast<std::size_t>(k)]; };

  const std::size_t max_aug = static_cast<std::size_t>(4 * (n + 1) * (m + 1) + 100);
  std::size_t augmentations = 0;
  while (rem_supply.sum() > snap && rem_demand.sum() > snap) {
    if (++augmentations > max_aug) {
      throw Error("transport solver exceeded its augmentation budget");
    }
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    at(dist, S) = 0.0;
    for (;;) {
      Eigen::Index u = -1;
      double best = kInf;
      for (Eigen::Index k = 0; k < V; ++k) {
        if (!at(done, k) && at(dist, k) < best) {
          best = at(dist, k);
          u = k;
        }
      }
      if (u < 0) {
        break;
      }
      at(done, u) = 1;
      auto relax = [&](Eigen::Index v, double w) {
        const double reduced = std::max(0.0, w + at(pi, u) - at(pi, v));
        if (at(dist, u) + reduced < at(dist, v)) {
          at(dist, v) = at(dist, u) + reduced;
          at(prev, v) = u;
        }
      };
      if (u == S) {
        for (Eigen::Index i = 0; i < n; ++i) {
          if (rem_supply(i) > 0.0) relax(i, 0.0);
        }
      } else if (u < n) {
        for (Eigen::Index j = 0; j < m; ++j) relax(n + j, cost(u, j));
        if (rem_supply(u) < supply(u)) relax(S, 0.0);
      } else if (u < S) {
        const Eigen::Index j = u - n;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (flow(i, j) > 0.0) relax(i, -cost(i, j));
        }
        if (rem_demand(j) > 0.0) relax(T, 0.0);
      } else if (u == T) {
        for (Eigen::Index j = 0; j < m; ++j) {
          if (rem_demand(j) < demand(j)) relax(n + j, 0.0);
        }
      }
    }
    if (!std::isfinite(at(dist, T))) {
      throw Error("transport solver found no augmenting path");
    }
    for (Eigen::Index k = 0; k < V; ++k) {
      at(pi, k) += std::min(at(dist, k), at(dist, T));
    }

    // Bottleneck along T <- ... <- S.
    double delta = kInf;
    for (Eigen::Index v = T; v != S; v = at(prev, v)) {
      const Eigen::Index u = at(prev, v);
      if (u == S) {
        delta = std::min(delta, rem_supply(v));
      } else if (v == T) {
        delta = std::min(delta, rem_demand(u - n));
      } else if (u >= n && v < n) {
        delta = std::min(delta, flow(v, u - n));
      }
    }
    for (Eigen::Index v = T; v != S; v = at(prev, v)) {
      const Eigen::Index u = at(prev, v);
      auto reduce = [&](double& x) {
        x = (x - delta <= snap) ? 0.0 : x - delta;
      };
      if (u == S) {
        reduce(rem_supply(v));
      } else if (v == T) {
        reduce(rem_demand(u - n));
      } else if (u < n) {
        flow(u, v - n) += delta;
      } else {
        reduce(flow(v, u - n));
      }
    }
  }

  TransportSolution out;
  out.plan.plan = flow;
  out.plan.cost = (flow.array() * cost.array()).sum();
  Vector d_src(n);
  Vector d_snk(m);
  for (Eigen::Index i = 0; i < n; ++i) d_src(i) = at(pi, i);
  for (Eigen::Index j = 0; j < m; ++j) d_snk(j) = at(pi, n + j);
  certify_duals(cost, flow, d_src, d_snk);
  out.u = -d_src;
  out.v = d_snk;
  out.dual_value = supply.dot(out.u) + demand.dot(out.v);
  out.duality_gap = out.plan.cost - out.dual_value;
  return out;
}

Wasserstein wasserstein(const MetricMeasureSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                        double p) {
  if (!(p >= 1.0)) {
    throw InvalidArgument("Wasserstein distance needs p >= 1");
  }
  require_on_space(space, mu0);
  require_on_space(space, mu1);
  const double m0 = mu0.mass();
  const double m1 = mu1.mass();
  require_equal_mass(m0, m1);

  const Matrix cost = space.dist().array().pow(p).matrix();
  const Vector a = mu0.weights() / m0;
  const Vector b = mu1.weights() / m1;
  Wasserstein out;
  out.solution = solve_transport(cost, a, b);
  out.solution.plan.plan *= m0;
  out.solution.plan.cost *= m0;
  out.solution.dual_value *= m0;
  out.solution.duality_gap *= m0;
  out.distance = std::pow(std::max(0.0, out.solution.plan.cost), 1.0 / p);
  return out;
}

double wasserstein_1d(std::span<const double> positions, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                      double p) {
  if (!(p >= 1.0)) {
    throw InvalidArgument("Wasserstein distance needs p >= 1");
  }
  require_same_size(mu0, mu1);
  if (positions.size() != mu0.size()) {
    throw DimensionMismatch("positions and measures have different lengths");
  }
  for (std::size_t k = 1; k < positions.size(); ++k) {
    if (!(positions[k] > positions[k - 1])) {
      throw InvalidArgument("positions must be strictly increasing");
    }
  }
  const double m0 = mu0.mass();
  const double m1 = mu1.mass();
  require_equal_mass(m0, m1);

  const std::size_t n = positions.size();
  std::size_t i = 0;
  std::size_t j = 0;
  double ra = mu0[0] / m0;
  double rb = mu1[0] / m1;
  double total = 0.0;
  while (i < n && j < n) {
    const double moved = std::min(ra, rb);
    total += moved * std::pow(std::abs(positions[i] - positions[j]), p);
    ra -= moved;
    rb -= moved;
    if (ra <= rb) {
      if (++i < n) ra = mu0[i] / m0;
    } else {
      if (++j < n) rb = mu1[j] / m1;
    }
  }
  return std::pow(total * m0, 1.0 / p);
}

}  // namespace heatreg
