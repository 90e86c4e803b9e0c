#pragma once

#include <cmath>

#include "settest/rff.hpp"

namespace settest {

/// Gaussian kernel on embedding vectors: exp(-||u - v||^2 / (2 * sigma2_sq)).
inline double gaussian_kernel(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                              double sigma2_sq) {
  if (u.size() != v.size())
    throw validation_error("gaussian_kernel: vectors have different lengths");
  if (!(sigma2_sq > 0.0))
    throw validation_error("gaussian_kernel: bandwidth must be positive");
  return std::exp(-(u - v).squaredNorm() / (2.0 * sigma2_sq));
}

namespace detail {

/// Entry-wise squared distances between the rows of A and B. Computed per
/// entry so identical rows give an exact zero (and a Gram entry of exactly 1).
inline Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd d2(a.rows(), b.rows());
  const bool same = &a == &b;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Eigen::Index jstart = same ? i : 0;
    for (Eigen::Index j = jstart; j < b.rows(); ++j)
      d2(i, j) = (a.row(i) - b.row(j)).squaredNorm();
    if (same)
      for (Eigen::Index j = 0; j < i; ++j) d2(i, j) = d2(j, i);
  }
  return d2;
}

inline Eigen::MatrixXd gaussian_gram_from_d2(const Eigen::MatrixXd& d2, double sigma2_sq) {
  if (!(sigma2_sq > 0.0)) throw validation_error("gram: bandwidth must be positive");
  return (-d2 / (2.0 * sigma2_sq)).array().exp();
}

}  // namespace detail

/// Kernel matrix between two embedded samples, with the weights of both
/// sides carried along.
struct GramMatrix {
  Eigen::MatrixXd values;
  Eigen::VectorXd row_weights;
  Eigen::VectorXd col_weights;
  double lengthscale_sq = 1.0;
};

inline GramMatrix gram(const EmbeddedSample& a, const EmbeddedSample& b, double sigma2_sq) {
  if (a.basis_fingerprint != b.basis_fingerprint)
    throw validation_error("gram: embeddings were built from different bases");
  GramMatrix g;
  g.values = detail::gaussian_gram_from_d2(
      &a == &b ? detail::squared_distances(a.embeddings, a.embeddings)
               : detail::squared_distances(a.embeddings, b.embeddings),
      sigma2_sq);
  g.row_weights = a.weights;
  g.col_weights = b.weights;
  g.lengthscale_sq = sigma2_sq;
  return g;
}

namespace detail {

inline double level2_from_rows(const Eigen::MatrixXd& rows) {
  const double med = median_sq_distance(rows, kDefaultMaxHeuristicPairs, 0);
  if (!(med > 0.0))
    throw degenerate_scale_error("level-2 median heuristic: all embeddings coincide");
  return med / 2.0;
}

}  // namespace detail

/// Level-2 bandwidth sigma2^2 = median squared pairwise distance between
/// embedding rows, divided by two.
inline double median_heuristic_level2(const EmbeddedSample& e) {
  return detail::level2_from_rows(e.embeddings);
}

/// Pools the embeddings of both samples of a test before taking the median.
inline double median_heuristic_level2(const EmbeddedSample& a, const EmbeddedSample& b) {
  Eigen::MatrixXd rows(a.size() + b.size(), a.feature_count());
  rows.topRows(a.size()) = a.embeddings;
  rows.bottomRows(b.size()) = b.embeddings;
  return detail::level2_from_rows(rows);
}

}  // namespace settest
