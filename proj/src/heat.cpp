#include "heatreg/heat.hpp"

#include "heatreg/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace heatreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidArgument("time must be finite and >= 0");
  }
}

void require_length(const Generator& G, const Vector& f) {
  if (static_cast<std::size_t>(f.size()) != G.size()) {
    throw DimensionMismatch("function length does not match the generator");
  }
}

double point_curvature(const Generator& G, Eigen::Index x) {
  const Matrix& L = G.L();
  const auto& nb = G.neighbors();

  // Two-step neighbourhood, x first.
  std::vector<Eigen::Index> idx{x};
  std::unordered_map<Eigen::Index, Eigen::Index> local{{x, 0}};
  auto add = [&](Eigen::Index y) {
    if (local.emplace(y, static_cast<Eigen::Index>(idx.size())).second) idx.push_back(y);
  };
  for (Eigen::Index y : nb[static_cast<std::size_t>(x)]) add(y);
  const std::size_t first_ring = idx.size();
  for (std::size_t k = 1; k < first_ring; ++k) {
    for (Eigen::Index z : nb[static_cast<std::size_t>(idx[k])]) add(z);
  }
  const auto n = static_cast<Eigen::Index>(idx.size());
  if (n == 1) {
    return kInf;  // isolated point: Gamma vanishes identically
  }

  // Gamma form at a point y of the first ring (or x itself).
  auto gamma_form = [&](Eigen::Index y) {
    Matrix A = Matrix::Zero(n, n);
    const Eigen::Index ly = local.at(y);
    for (Eigen::Index z : nb[static_cast<std::size_t>(y)]) {
      const Eigen::Index lz = local.at(z);
      const double w = 0.5 * L(y, z);
      A(ly, ly) += w;
      A(lz, lz) += w;
      A(ly, lz) -= w;
      A(lz, ly) -= w;
    }
    return A;
  };
  // Row y of L restricted to the neighbourhood.
  auto row = [&](Eigen::Index y) {
    Vector r = Vector::Zero(n);
    r(local.at(y)) = L(y, y);
    for (Eigen::Index z : nb[static_cast<std::size_t>(y)]) r(local.at(z)) = L(y, z);
    return r;
  };

  const Matrix A = gamma_form(x);
  const Vector lx = row(x);
  Matrix B = Matrix::Zero(n, n);
  Matrix M = Matrix::Zero(n, n);
  for (Eigen::Index y : nb[static_cast<std::size_t>(x)]) {
    const double w = L(x, y);
    B += 0.5 * w * (gamma_form(y) - A);
    Vector e = Vector::Zero(n);
    e(local.at(y)) = 1.0;
    e(0) = -1.0;
    M += 0.5 * w * e * (row(y) - lx).transpose();
  }
  B -= 0.5 * (M + M.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> ea(A);
  const Vector& s = ea.eigenvalues();
  const double cutoff = 1e-10 * s.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> range;
  std::vector<Eigen::Index> kernel;
  for (Eigen::Index k = 0; k < n; ++k) (s(k) > cutoff ? range : kernel).push_back(k);
  const auto nr = static_cast<Eigen::Index>(range.size());
  const auto nk = static_cast<Eigen::Index>(kernel.size());
  Matrix R(n, nr);
  Matrix Z(n, nk);
  Vector sr(nr);
  for (Eigen::Index k = 0; k < nr; ++k) {
    R.col(k) = ea.eigenvectors().col(range[static_cast<std::size_t>(k)]);
    sr(k) = s(range[static_cast<std::size_t>(k)]);
  }
  for (Eigen::Index k = 0; k < nk; ++k) Z.col(k) = ea.eigenvectors().col(kernel[static_cast<std::size_t>(k)]);

  const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * scale;
  Matrix S = R.transpose() * B * R;
  if (nk > 0) {
    const Matrix B00 = Z.transpose() * B * Z;
    const Matrix B0r = Z.transpose() * B * R;
    Eigen::SelfAdjointEigenSolver<Matrix> e0(B00);
    if (e0.eigenvalues().minCoeff() < -tol) {
      return -kInf;
    }
    Vector inv = Vector::Zero(nk);
    for (Eigen::Index k = 0; k < nk; ++k) {
      if (e0.eigenvalues()(k) > tol) inv(k) = 1.0 / e0.eigenvalues()(k);
    }
    const Matrix V = e0.eigenvectors();
    const Matrix pinv = V * inv.asDiagonal() * V.transpose();
    const Matrix residual = B0r - B00 * (pinv * B0r);
    if (residual.cwiseAbs().maxCoeff() > 1e-7 * scale) {
      return -kInf;
    }
    S -= B0r.transpose() * pinv * B0r;
  }
  const Vector isq = sr.cwiseSqrt().cwiseInverse();
  const Matrix T = isq.asDiagonal() * S * isq.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> et(0.5 * (T + T.transpose()), Eigen::EigenvaluesOnly);
  return et.eigenvalues().minCoeff();
}

CurvatureBound collect(Vector per_point) {
  CurvatureBound out;
  out.K = per_point.size() > 0 ? per_point.minCoeff() : kInf;
  out.finite = std::isfinite(out.K);
  out.per_point = std::move(per_point);
  return out;
}

}  // namespace

Generator::Generator(MetricMeasureSpace space, Matrix L) : space_(std::move(space)), L_(std::move(L)) {
  const auto n = static_cast<Eigen::Index>(space_.size());
  if (L_.rows() != n || L_.cols() != n) {
    throw DimensionMismatch("generator size does not match the space");
  }
  if (!L_.allFinite()) {
    throw InvalidArgument("generator entries must be finite");
  }
  const Vector& m = space_.reference();
  nbrs_.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double row_sum = 0.0;
    double row_abs = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      row_sum += L_(i, j);
      row_abs += std::abs(L_(i, j));
      if (i == j) continue;
      if (L_(i, j) < 0.0) {
        std::ostringstream os;
        os << "negative rate L(" << i << "," << j << ")";
        throw InvalidArgument(os.str());
      }
      if (L_(i, j) > 0.0) nbrs_[static_cast<std::size_t>(i)].push_back(j);
      const double a = m(i) * L_(i, j);
      const double b = m(j) * L_(j, i);
      if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b))) {
        std::ostringstream os;
        os << "detailed balance fails for (" << i << "," << j << ")";
        throw NotReversible(os.str());
      }
    }
    if (std::abs(row_sum) > 1e-12 * std::max(1.0, row_abs)) {
      std::ostringstream os;
      os << "row " << i << " of the generator does not sum to zero";
      throw InvalidArgument(os.str());
    }
  }
}

Generator cycle_generator(int n, double length) {
  MetricMeasureSpace space = cycle_space(n, length);
  const double h = length / n;
  const double w = 1.0 / (h * h);
  Matrix L = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    L(i, (i + 1) % n) += w;
    L(i, (i + n - 1) % n) += w;
    L(i, i) = -2.0 * w;
  }
  return Generator(std::move(space), std::move(L));
}

std::vector<double> symmetric_grid(double h, double radius) {
  if (!(h > 0.0) || !(radius > 0.0)) {
    throw InvalidArgument("grid needs h > 0 and radius > 0");
  }
  const auto k = static_cast<long>(std::floor(radius / h + 1e-9));
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(2 * k + 1));
  for (long i = -k; i <= k; ++i) x.push_back(static_cast<double>(i) * h);
  return x;
}

Generator ou_generator(std::span<const double> positions, double radius) {
  if (!(radius >= 3.0)) {
    throw InvalidArgument("OU truncation radius must be >= 3");
  }
  if (positions.size() < 2) {
    throw InvalidArgument("OU grid needs at least two points");
  }
  const double h = positions[1] - positions[0];
  if (!(h > 0.0)) {
    throw InvalidArgument("OU grid must be increasing");
  }
  for (std::size_t k = 1; k < positions.size(); ++k) {
    if (std::abs(positions[k] - positions[k - 1] - h) > 1e-9 * h) {
      throw InvalidArgument("OU grid must be uniform");
    }
  }
  std::vector<double> x;
  for (double p : positions) {
    if (std::abs(p) <= radius * (1.0 + 1e-12)) x.push_back(p);
  }
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 2) {
    throw InvalidArgument("OU grid has fewer than two points inside the radius");
  }
  Vector m(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    m(i) = std::exp(-0.5 * xi * xi) * h;
  }
  m /= m.sum();
  const double w = 1.0 / (h * h);
  Matrix L = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    // sqrt(m_{i+1} / m_i) from the exponent directly, so detailed balance
    // m_i L(i,i+1) = m_{i+1} L(i+1,i) holds to rounding.
    const double a = x[static_cast<std::size_t>(i)];
    const double b = x[static_cast<std::size_t>(i + 1)];
    const double half_log_ratio = -0.25 * (b * b - a * a);
    L(i, i + 1) = w * std::exp(half_log_ratio);
    L(i + 1, i) = w * std::exp(-half_log_ratio);
  }
  for (Eigen::Index i = 0; i < n; ++i) L(i, i) = -(L.row(i).sum() - L(i, i));
  return Generator(line_space(x, std::move(m)), std::move(L));
}

Generator ou_generator(double h, double radius) {
  const std::vector<double> x = symmetric_grid(h, radius);
  return ou_generator(x, radius);
}

Semigroup::Semigroup(const Generator& G) : L_(G.L()), sqrt_m_(G.reference().cwiseSqrt()) {
  const Matrix S = sqrt_m_.asDiagonal() * L_ * sqrt_m_.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
  if (es.info() != Eigen::Success) {
    throw Error("eigendecomposition of the generator failed");
  }
  U_ = es.eigenvectors();
  lambda_ = es.eigenvalues().cwiseMin(0.0);
}

Matrix Semigroup::kernel(double t) const {
  require_time(t);
  const Vector e = (t * lambda_).array().exp().matrix();
  Matrix P = sqrt_m_.cwiseInverse().asDiagonal() * (U_ * e.asDiagonal() * U_.transpose()) * sqrt_m_.asDiagonal();
  return P.cwiseMax(0.0);
}

Vector Semigroup::apply(double t, const Vector& f) const {
  require_time(t);
  if (f.size() != L_.rows()) {
    throw DimensionMismatch("function length does not match the generator");
  }
  if (t == 0.0 || f.size() == 0) {
    return f;
  }
  const Vector e = (t * lambda_).array().exp().matrix();
  const Vector coeff = e.cwiseProduct(U_.transpose() * sqrt_m_.cwiseProduct(f));
  Vector out = (U_ * coeff).cwiseQuotient(sqrt_m_);
  // P_t is Markov, so the exact result lies in [min f, max f].
  return out.cwiseMax(f.minCoeff()).cwiseMin(f.maxCoeff());
}

DiscreteMeasure Semigroup::dual(double t, const DiscreteMeasure& mu) const {
  require_time(t);
  if (static_cast<Eigen::Index>(mu.size()) != L_.rows()) {
    throw DimensionMismatch("measure length does not match the generator");
  }
  if (t == 0.0) {
    return mu;
  }
  // P^T mu = D^{1/2} U e^{t Lambda} U^T D^{-1/2} mu.
  const Vector e = (t * lambda_).array().exp().matrix();
  const Vector coeff = e.cwiseProduct(U_.transpose() * mu.weights().cwiseQuotient(sqrt_m_));
  return DiscreteMeasure((U_ * coeff).cwiseProduct(sqrt_m_).cwiseMax(0.0));
}

double Semigroup::reconstruction_error() const {
  const Matrix S = U_ * lambda_.asDiagonal() * U_.transpose();
  const Matrix L = sqrt_m_.cwiseInverse().asDiagonal() * S * sqrt_m_.asDiagonal();
  return (L - L_).cwiseAbs().maxCoeff() / std::max(1.0, L_.cwiseAbs().maxCoeff());
}

Vector heat_apply(const Generator& G, double t, const Vector& f) { return Semigroup(G).apply(t, f); }

DiscreteMeasure heat_dual(const Generator& G, double t, const DiscreteMeasure& mu) {
  return Semigroup(G).dual(t, mu);
}

Vector gamma(const Generator& G, const Vector& f, const Vector& g) {
  require_length(G, f);
  require_length(G, g);
  const auto n = static_cast<Eigen::Index>(G.size());
  Vector out = Vector::Zero(n);
  for (Eigen::Index x = 0; x < n; ++x) {
    double s = 0.0;
    for (Eigen::Index y : G.neighbors()[static_cast<std::size_t>(x)]) {
      s += G.L()(x, y) * (f(y) - f(x)) * (g(y) - g(x));
    }
    out(x) = 0.5 * s;
  }
  return out;
}

Vector gamma(const Generator& G, const Vector& f) { return gamma(G, f, f); }

Vector gamma2(const Generator& G, const Vector& f) {
  const Vector Lf = G.L() * f;
  return 0.5 * (G.L() * gamma(G, f)) - gamma(G, f, Lf);
}

CurvatureBound curvature_lower_bound_serial(const Generator& G) {
  const auto n = static_cast<Eigen::Index>(G.size());
  Vector k(n);
  for (Eigen::Index x = 0; x < n; ++x) k(x) = point_curvature(G, x);
  return collect(std::move(k));
}

CurvatureBound curvature_lower_bound(const Generator& G, kernels::Exec exec) {
  if (exec == kernels::Exec::serial) {
    return curvature_lower_bound_serial(G);
  }
  const auto n = static_cast<Eigen::Index>(G.size());
  Vector k(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index x = 0; x < n; ++x) k(x) = point_curvature(G, x);
  return collect(std::move(k));
}

double r_k(double K, double t) {
  require_time(t);
  if (std::isnan(K)) {
    throw InvalidArgument("curvature must not be NaN");
  }
  if (K == 0.0) {
    return 2.0 * t;
  }
  if (K == -kInf) {
    return 0.0;
  }
  return std::expm1(2.0 * K * t) / K;
}

double dirichlet_energy(const Generator& G, const Vector& f) {
  return 0.5 * gamma(G, f).dot(G.reference());
}

}  // namespace heatreg
