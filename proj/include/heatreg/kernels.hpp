#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version and a plain
// serial reference; both run the same per-row arithmetic in the same order,
// so their outputs agree bit for bit.

#include <Eigen/Dense>

namespace heatreg::kernels {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Exec { serial, parallel };

/**
 * out(i) = -eps * log sum_j exp(logw(j) + (g(j) - cost(i,j)) / eps).
 *
 * Entries with cost = +inf are skipped; a row with no finite entry yields
 * +inf. Stabilized by the row maximum.
 */
void softmin_rows(const RowMatrix& cost, const Eigen::VectorXd& logw, const Eigen::VectorXd& g, double eps,
                  Eigen::VectorXd& out, Exec exec = Exec::parallel);

void softmin_rows_serial(const RowMatrix& cost, const Eigen::VectorXd& logw, const Eigen::VectorXd& g, double eps,
                         Eigen::VectorXd& out);

/// Number of OpenMP threads the parallel kernels would use.
int max_threads();
void set_threads(int n);

}  // namespace heatreg::kernels
