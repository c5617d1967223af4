#include "heatreg/hk.hpp"

#include "heatreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace heatreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// a F(x / a) for the logarithmic entropy, with the a = 0 case handled by the
// absolute-continuity constraint (only x = 0 is admissible).
double kl_point(double x, double a) {
  if (a == 0.0) {
    return x == 0.0 ? 0.0 : kInf;
  }
  if (x == 0.0) {
    return a;
  }
  return x * std::log(x / a) - x + a;
}

void check_inputs(const MetricMeasureSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                  double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("HK needs alpha > 0");
  }
  require_on_space(space, mu0);
  require_on_space(space, mu1);
}

}  // namespace

double cost_ell(double alpha, double d) {
  if (!(alpha > 0.0)) {
    throw InvalidArgument("cost_ell needs alpha > 0");
  }
  if (!(d >= 0.0)) {
    throw InvalidArgument("cost_ell needs d >= 0");
  }
  const double x = d / std::sqrt(alpha);
  if (!(x < std::numbers::pi / 2)) {
    return kInf;
  }
  const double c = std::cos(x);
  return c > 0.0 ? -2.0 * std::log(c) : kInf;
}

double LetSolution::distance() const { return std::sqrt(std::max(0.0, value)); }

double let_objective(const MetricMeasureSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                     double alpha, const Matrix& gamma) {
  check_inputs(space, mu0, mu1, alpha);
  const auto n = static_cast<Eigen::Index>(space.size());
  if (gamma.rows() != n || gamma.cols() != n) {
    throw DimensionMismatch("plan size does not match the space");
  }
  double transport = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double g = gamma(i, j);
      if (g < 0.0) {
        throw InvalidArgument("plans must be nonnegative");
      }
      if (g > 0.0) {
        const double c = cost_ell(alpha, space.dist(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
        if (std::isinf(c)) {
          return kInf;
        }
        transport += g * c;
      }
    }
  }
  const Vector rows = gamma.rowwise().sum();
  const Vector cols = gamma.colwise().sum().transpose();
  double marginal = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    marginal += kl_point(rows(i), mu0.weights()(i)) + kl_point(cols(i), mu1.weights()(i));
  }
  return marginal + transport;
}

LetSolution hk(const MetricMeasureSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, double alpha,
               const HkOptions& opts) {
  check_inputs(space, mu0, mu1, alpha);
  if (opts.epsilon_schedule.empty()) {
    throw InvalidArgument("epsilon schedule is empty");
  }
  for (double eps : opts.epsilon_schedule) {
    if (!(eps > 0.0)) throw InvalidArgument("epsilon values must be positive");
  }
  if (opts.max_iter < 1 || !(opts.tol > 0.0)) {
    throw InvalidArgument("max_iter must be >= 1 and tol > 0");
  }
  if (!(opts.relaxation > 0.0 && opts.relaxation < 2.0)) {
    throw InvalidArgument("relaxation must lie in (0, 2)");
  }
  const double omega = opts.relaxation;
  const auto n = static_cast<Eigen::Index>(space.size());
  const Vector& a = mu0.weights();
  const Vector& b = mu1.weights();

  // Active rows/columns: positive mass and at least one finite-cost partner.
  auto finite_cost = [&](Eigen::Index i, Eigen::Index j) {
    return std::isfinite(cost_ell(alpha, space.dist(static_cast<std::size_t>(i), static_cast<std::size_t>(j))));
  };
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(a(i) > 0.0)) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (b(j) > 0.0 && finite_cost(i, j)) {
        rows.push_back(i);
        break;
      }
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(b(j) > 0.0)) continue;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (a(i) > 0.0 && finite_cost(i, j)) {
        cols.push_back(j);
        break;
      }
    }
  }

  LetSolution out;
  out.gamma = Matrix::Zero(n, n);
  out.converged = true;
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(cols.size());
  if (nr == 0 || nc == 0) {
    out.value = a.sum() + b.sum();
    out.lower_bound = out.value;
    return out;
  }

  kernels::RowMatrix C(nr, nc);
  kernels::RowMatrix Ct(nc, nr);
  Vector loga(nr);
  Vector logb(nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    loga(r) = std::log(a(rows[static_cast<std::size_t>(r)]));
    for (Eigen::Index c = 0; c < nc; ++c) {
      const double v = cost_ell(alpha, space.dist(static_cast<std::size_t>(rows[static_cast<std::size_t>(r)]),
                                                   static_cast<std::size_t>(cols[static_cast<std::size_t>(c)])));
      C(r, c) = v;
      Ct(c, r) = v;
    }
  }
  for (Eigen::Index c = 0; c < nc; ++c) {
    logb(c) = std::log(b(cols[static_cast<std::size_t>(c)]));
  }
  Vector ar(nr);
  Vector bc(nc);
  for (Eigen::Index r = 0; r < nr; ++r) ar(r) = a(rows[static_cast<std::size_t>(r)]);
  for (Eigen::Index c = 0; c < nc; ++c) bc(c) = b(cols[static_cast<std::size_t>(c)]);

  Vector f = Vector::Zero(nr);
  Vector g = Vector::Zero(nc);
  Vector f_new(nr);
  Vector g_new(nc);
  double eps = opts.epsilon_schedule.front();
  for (double stage_eps : opts.epsilon_schedule) {
    eps = stage_eps;
    const double kappa = 1.0 / (1.0 + eps);
    bool stage_converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
      ++out.iterations;
      kernels::softmin_rows(C, logb, g, eps, f_new, opts.exec);
      f_new = (1.0 - omega) * f + (omega * kappa) * f_new;
      kernels::softmin_rows(Ct, loga, f_new, eps, g_new, opts.exec);
      g_new = (1.0 - omega) * g + (omega * kappa) * g_new;
      // Exact maximization of the dual along (f + tau, g - tau).
      const double mass_a = (ar.array() * (-f_new.array()).exp()).sum();
      const double mass_b = (bc.array() * (-g_new.array()).exp()).sum();
      const double tau = 0.5 * std::log(mass_a / mass_b);
      f_new.array() += tau;
      g_new.array() -= tau;
      const double change = std::max((f_new - f).cwiseAbs().maxCoeff(), (g_new - g).cwiseAbs().maxCoeff());
      f.swap(f_new);
      g.swap(g_new);
      if (change < opts.tol) {
        stage_converged = true;
        break;
      }
    }
    out.converged = stage_converged;
  }

  // Plan from the final scalings.
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index c = 0; c < nc; ++c) {
      if (std::isfinite(C(r, c))) {
        out.gamma(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]) =
            std::exp(loga(r) + logb(c) + (f(r) + g(c) - C(r, c)) / eps);
      }
    }
  }
  out.value = let_objective(space, mu0, mu1, alpha, out.gamma);

  // The geometric-mean plan on the diagonal is feasible for every alpha and
  // optimal as alpha -> 0; keep it when the entropic plan is worse.
  Matrix diagonal = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) diagonal(i, i) = std::sqrt(a(i) * b(i));
  const double diagonal_value = let_objective(space, mu0, mu1, alpha, diagonal);
  if (diagonal_value < out.value) {
    out.gamma = std::move(diagonal);
    out.value = diagonal_value;
  }

  // Feasible dual pair by alternating c-transforms of f.
  Vector psi(nc);
  for (Eigen::Index c = 0; c < nc; ++c) {
    double v = kInf;
    for (Eigen::Index r = 0; r < nr; ++r) v = std::min(v, Ct(c, r) - f(r));
    psi(c) = v;
  }
  Vector phi(nr);
  for (Eigen::Index r = 0; r < nr; ++r) {
    double v = kInf;
    for (Eigen::Index c = 0; c < nc; ++c) v = std::min(v, C(r, c) - psi(c));
    phi(r) = v;
  }
  double lower = a.sum() - ar.sum() + b.sum() - bc.sum();  // inactive mass is paid in full
  for (Eigen::Index r = 0; r < nr; ++r) lower += ar(r) * -std::expm1(-phi(r));
  for (Eigen::Index c = 0; c < nc; ++c) lower += bc(c) * -std::expm1(-psi(c));
  out.lower_bound = lower;
  out.gap_estimate = std::max(0.0, out.value - lower);
  return out;
}

double hk_bruteforce(const MetricMeasureSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                     double alpha, int grid_resolution) {
  check_inputs(space, mu0, mu1, alpha);
  if (space.size() > 3) {
    throw InvalidArgument("hk_bruteforce handles at most three points");
  }
  if (grid_resolution < 2) {
    throw InvalidArgument("grid resolution must be >= 2");
  }
  const auto n = static_cast<Eigen::Index>(space.size());
  const Vector& a = mu0.weights();
  const Vector& b = mu1.weights();

  struct Entry {
    Eigen::Index i;
    Eigen::Index j;
    double cost;
    double upper;
  };
  std::vector<Entry> entries;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double c = cost_ell(alpha, space.dist(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      if (a(i) > 0.0 && b(j) > 0.0 && std::isfinite(c)) {
        entries.push_back({i, j, c, 1.5 * std::max(a(i), b(j))});
      }
    }
  }
  const double trivial = a.sum() + b.sum();
  if (entries.empty()) {
    return trivial;
  }

  Matrix gamma = Matrix::Zero(n, n);
  auto objective = [&](const Matrix& gm) {
    double v = 0.0;
    for (const Entry& e : entries) v += gm(e.i, e.j) * e.cost;
    const Vector rs = gm.rowwise().sum();
    const Vector cs = gm.colwise().sum().transpose();
    for (Eigen::Index k = 0; k < n; ++k) v += kl_point(rs(k), a(k)) + kl_point(cs(k), b(k));
    return v;
  };

  // Dense lattice over all free entries, capped at ~2e6 evaluations.
  const std::size_t k = entries.size();
  int levels = grid_resolution;
  while (levels > 2 && std::pow(static_cast<double>(levels), static_cast<double>(k)) > 2e6) {
    --levels;
  }
  std::vector<int> idx(k, 0);
  double best = kInf;
  Matrix best_gamma = gamma;
  for (;;) {
    for (std::size_t e = 0; e < k; ++e) {
      gamma(entries[e].i, entries[e].j) = entries[e].upper * idx[e] / (levels - 1);
    }
    const double v = objective(gamma);
    if (v < best) {
      best = v;
      best_gamma = gamma;
    }
    std::size_t e = 0;
    while (e < k && ++idx[e] == levels) {
      idx[e] = 0;
      ++e;
    }
    if (e == k) break;
  }

  // Exact cyclic coordinate descent. Along one entry the objective is convex
  // with derivative log(row/a) + log(col/b) + cost.
  gamma = best_gamma;
  for (int sweep = 0; sweep < 200000; ++sweep) {
    double moved = 0.0;
    for (const Entry& e : entries) {
      const double row_rest = gamma.row(e.i).sum() - gamma(e.i, e.j);
      const double col_rest = gamma.col(e.j).sum() - gamma(e.i, e.j);
      auto deriv = [&](double x) {
        return std::log((row_rest + x) / a(e.i)) + std::log((col_rest + x) / b(e.j)) + e.cost;
      };
      double x;
      if (row_rest + col_rest > 0.0 && std::min(row_rest, col_rest) > 0.0 && deriv(0.0) >= 0.0) {
        x = 0.0;
      } else {
        double lo = 0.0;
        double hi = std::max(1.0, 2.0 * std::max(a(e.i), b(e.j)));
        while (deriv(hi) < 0.0) hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
          const double mid = 0.5 * (lo + hi);
          (deriv(mid) < 0.0 ? lo : hi) = mid;
        }
        x = 0.5 * (lo + hi);
      }
      moved = std::max(moved, std::abs(x - gamma(e.i, e.j)));
      gamma(e.i, e.j) = x;
    }
    if (moved < 1e-14) break;
  }
  return std::min({best, objective(gamma), trivial});
}

}  // namespace heatreg
