#include "heatreg/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <limits>

namespace heatreg::kernels {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double softmin_row(const double* c, const double* logw, const double* g, Eigen::Index m, double eps) {
  double hi = -kInf;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (c[j] < kInf) {
      hi = std::max(hi, logw[j] + (g[j] - c[j]) / eps);
    }
  }
  if (hi == -kInf) {
    return kInf;
  }
  double s = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (c[j] < kInf) {
      s += std::exp(logw[j] + (g[j] - c[j]) / eps - hi);
    }
  }
  return -eps * (hi + std::log(s));
}

}  // namespace

void softmin_rows_serial(const RowMatrix& cost, const Eigen::VectorXd& logw, const Eigen::VectorXd& g, double eps,
                         Eigen::VectorXd& out) {
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  out.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i) = softmin_row(cost.data() + i * m, logw.data(), g.data(), m, eps);
  }
}

void softmin_rows(const RowMatrix& cost, const Eigen::VectorXd& logw, const Eigen::VectorXd& g, double eps,
                  Eigen::VectorXd& out, Exec exec) {
  if (exec == Exec::serial) {
    softmin_rows_serial(cost, logw, g, eps, out);
    return;
  }
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  out.resize(n);
  const double* c = cost.data();
  const double* lw = logw.data();
  const double* gp = g.data();
  double* o = out.data();
#pragma omp parallel for schedule(static) if (n * m > 4096)
  for (Eigen::Index i = 0; i < n; ++i) {
    o[i] = softmin_row(c + i * m, lw, gp, m, eps);
  }
}

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) {
    omp_set_num_threads(n);
  }
}

}  // namespace heatreg::kernels
