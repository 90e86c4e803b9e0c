#pragma once

#include <cmath>

#include <Eigen/Core>

#include "settest/common.hpp"

// Brute-force reference evaluations, written as plain loops on purpose.
// They share no code with the statistics module so that agreement between
// the two is meaningful evidence of correctness.

namespace settest {

/// HSIC as the explicit V-statistic sum
///   (1/N^2) sum_ij K_ij L_ij + (1/N^4) sum_ijqr K_ij L_qr
///   - (2/N^3) sum_ijq K_ij L_iq.
inline double vstat_hsic_oracle(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l) {
  if (k.rows() != k.cols() || l.rows() != l.cols() || k.rows() != l.rows())
    throw validation_error("vstat_hsic_oracle: matrices must be square and equal-sized");
  const Eigen::Index n = k.rows();
  const double dn = static_cast<double>(n);

  double term1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) term1 += k(i, j) * l(i, j);
  term1 /= dn * dn;

  double sum_k = 0.0, sum_l = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      sum_k += k(i, j);
      sum_l += l(i, j);
    }
  const double term2 = sum_k * sum_l / (dn * dn * dn * dn);

  double term3 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double row_k = 0.0, row_l = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) row_k += k(i, j);
    for (Eigen::Index q = 0; q < n; ++q) row_l += l(i, q);
    term3 += row_k * row_l;
  }
  term3 *= 2.0 / (dn * dn * dn);

  return term1 + term2 - term3;
}

/// Exact MMD^2 V-statistic for singleton sets, with the two-level kernel
/// composed in closed form: the RKHS distance between the embeddings of
/// single points x and y is 2 - 2 k(x, y), so
///   K(x, y) = exp(-(2 - 2 k(x, y)) / (2 * sigma2_sq)).
/// Rows of points_x / points_y are the singleton sets.
inline double composed_mmd_oracle(const Eigen::MatrixXd& points_x,
                                  const Eigen::MatrixXd& points_y,
                                  double sigma1_sq, double sigma2_sq) {
  if (points_x.cols() != points_y.cols())
    throw validation_error("composed_mmd_oracle: point dimensions differ");
  if (!(sigma1_sq > 0.0) || !(sigma2_sq > 0.0))
    throw validation_error("composed_mmd_oracle: bandwidths must be positive");
  const Eigen::Index n = points_x.rows();
  const Eigen::Index m = points_y.rows();
  auto composed = [&](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    const double level1 = std::exp(-(a - b).squaredNorm() / (2.0 * sigma1_sq));
    return std::exp(-(2.0 - 2.0 * level1) / (2.0 * sigma2_sq));
  };
  double term_xx = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) term_xx += composed(points_x.row(i), points_x.row(j));
  term_xx /= static_cast<double>(n) * static_cast<double>(n);
  double term_yy = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) term_yy += composed(points_y.row(i), points_y.row(j));
  term_yy /= static_cast<double>(m) * static_cast<double>(m);
  double term_xy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) term_xy += composed(points_x.row(i), points_y.row(j));
  term_xy /= static_cast<double>(n) * static_cast<double>(m);
  return term_xx + term_yy - 2.0 * term_xy;
}

}  // namespace settest
