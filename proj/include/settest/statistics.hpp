#pragma once

#include "settest/kernel.hpp"

namespace settest {

/// Kernel applied on top of the embeddings. The Gaussian kernel is the
/// default; the linear option scores embeddings by plain inner products.
enum class SecondLevelKernel { gaussian, linear };

enum class StatisticKind { rmmd2, rhsic };

struct StatisticValue {
  double value = 0.0;
  StatisticKind kind = StatisticKind::rmmd2;
  Eigen::Index n_x = 0;
  Eigen::Index n_y = 0;
};

namespace detail {

inline Eigen::MatrixXd second_level_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                         double sigma_sq, SecondLevelKernel kind) {
  if (kind == SecondLevelKernel::linear) return a * b.transpose();
  return gaussian_gram_from_d2(squared_distances(a, b), sigma_sq);
}

inline void check_weight_sum(const Eigen::VectorXd& w, const char* what) {
  if (std::abs(w.sum() - 1.0) > 1e-9)
    throw validation_error(std::string(what) + ": weights must sum to 1");
}

/// Row/column-centered copy: (H M H)_ij = M_ij - rowmean_i - colmean_j + mean.
inline Eigen::MatrixXd center_gram(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd rm = m.rowwise().mean();
  const Eigen::RowVectorXd cm = m.colwise().mean();
  const double total = m.mean();
  Eigen::MatrixXd out = m;
  out.colwise() -= rm;
  out.rowwise() -= cm;
  out.array() += total;
  return out;
}

}  // namespace detail

/// Weighted two-sample statistic on embedded samples:
///   RMMD^2 = w'Kxx w + v'Kyy v - 2 w'Kxy v.
/// Nonnegative up to rounding; the raw value is returned so that permutation
/// ranks stay exact.
inline StatisticValue rmmd2(const EmbeddedSample& x, const EmbeddedSample& y,
                            double sigma2_sq,
                            SecondLevelKernel kind = SecondLevelKernel::gaussian) {
  if (x.basis_fingerprint != y.basis_fingerprint)
    throw validation_error("rmmd2: embeddings were built from different bases");
  detail::check_weight_sum(x.weights, "rmmd2 (x side)");
  detail::check_weight_sum(y.weights, "rmmd2 (y side)");
  const Eigen::MatrixXd kxx =
      detail::second_level_gram(x.embeddings, x.embeddings, sigma2_sq, kind);
  const Eigen::MatrixXd kyy =
      detail::second_level_gram(y.embeddings, y.embeddings, sigma2_sq, kind);
  const Eigen::MatrixXd kxy =
      detail::second_level_gram(x.embeddings, y.embeddings, sigma2_sq, kind);
  StatisticValue out;
  out.kind = StatisticKind::rmmd2;
  out.n_x = x.size();
  out.n_y = y.size();
  out.value = x.weights.dot(kxx * x.weights) + y.weights.dot(kyy * y.weights) -
              2.0 * x.weights.dot(kxy * y.weights);
  return out;
}

/// Weighted independence statistic on paired embedded samples:
///   RHSIC = N^2 * Tr(Khat H Lhat H),  Khat_ij = w_i w_j K(mu_i, mu_j).
/// With uniform weights this reduces to Tr(K H L H) / N^2.
inline StatisticValue rhsic(const EmbeddedSample& x, const EmbeddedSample& y,
                            double sigma_k_sq, double sigma_l_sq,
                            SecondLevelKernel kind = SecondLevelKernel::gaussian) {
  if (x.size() != y.size())
    throw validation_error("rhsic: paired samples must have the same number of sets");
  detail::check_weight_sum(x.weights, "rhsic (x side)");
  detail::check_weight_sum(y.weights, "rhsic (y side)");
  const Eigen::Index n = x.size();
  const Eigen::MatrixXd k =
      detail::second_level_gram(x.embeddings, x.embeddings, sigma_k_sq, kind);
  const Eigen::MatrixXd l =
      detail::second_level_gram(y.embeddings, y.embeddings, sigma_l_sq, kind);
  const Eigen::MatrixXd khat =
      k.cwiseProduct(x.weights * x.weights.transpose());
  const Eigen::MatrixXd lhat =
      l.cwiseProduct(y.weights * y.weights.transpose());
  StatisticValue out;
  out.kind = StatisticKind::rhsic;
  out.n_x = n;
  out.n_y = n;
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  out.value = nn * detail::center_gram(khat).cwiseProduct(lhat).sum();
  return out;
}

}  // namespace settest
