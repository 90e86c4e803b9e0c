#pragma once

#include <cmath>
#include <vector>

#include "settest/permutation.hpp"
#include "settest/spline.hpp"

namespace settest {

namespace detail {

inline Eigen::MatrixXd stack_grids(const std::vector<GridSeries>& grids, const char* what) {
  if (grids.empty()) throw validation_error(std::string(what) + ": no series given");
  const Eigen::Index t = grids.front().values.size();
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(grids.size()), t);
  for (std::size_t i = 0; i < grids.size(); ++i) {
    if (grids[i].values.size() != t)
      throw validation_error(std::string(what) + ": series " + std::to_string(i) +
                             " has a different grid length");
    rows.row(static_cast<Eigen::Index>(i)) = grids[i].values;
  }
  return rows;
}

}  // namespace detail

/// Gaussian-kernel MMD^2 V-statistic on fixed-grid vectors with the pooled
/// permutation null. The interpolation baseline for the two-sample problem.
inline TestResult fixed_mmd_test(const std::vector<GridSeries>& grids_x,
                                 const std::vector<GridSeries>& grids_y, double sigma_sq,
                                 int b, double alpha, std::uint64_t seed, int threads = 0) {
  const Eigen::MatrixXd x = detail::stack_grids(grids_x, "fixed_mmd_test (x)");
  const Eigen::MatrixXd y = detail::stack_grids(grids_y, "fixed_mmd_test (y)");
  if (x.cols() != y.cols())
    throw validation_error("fixed_mmd_test: grid lengths differ between samples");
  const Eigen::Index n_x = x.rows(), n_y = y.rows();
  Eigen::MatrixXd pooled(n_x + n_y, x.cols());
  pooled.topRows(n_x) = x;
  pooled.bottomRows(n_y) = y;
  const Eigen::MatrixXd gram = detail::second_level_gram(pooled, pooled, sigma_sq,
                                                         SecondLevelKernel::gaussian);
  Eigen::VectorXd weights(n_x + n_y);
  weights << uniform_weights(n_x), uniform_weights(n_y);
  std::vector<std::uint32_t> identity(static_cast<std::size_t>(n_x + n_y));
  for (std::size_t k = 0; k < identity.size(); ++k)
    identity[k] = static_cast<std::uint32_t>(k);
  const double observed = detail::regrouped_two_sample_stat(
      gram, weights, identity, static_cast<std::size_t>(n_x));
  const auto nulls = detail::two_sample_null_from_gram(
      gram, weights, static_cast<std::size_t>(n_x), b, seed, threads);
  TestResult result;
  result.statistic = clamp_tiny(observed);
  result.p_value = p_value(observed, nulls);
  result.alpha = alpha;
  result.reject = result.p_value <= alpha;
  result.n_permutations = b;
  result.selected_params.sigma2_sq = sigma_sq;
  result.seed = seed;
  return result;
}

/// Uniform-weight HSIC, Tr(K H L H) / N^2, on fixed-grid vectors with the
/// Y-shuffle permutation null.
inline TestResult fixed_hsic_test(const std::vector<GridSeries>& grids_x,
                                  const std::vector<GridSeries>& grids_y, double sigma_k_sq,
                                  double sigma_l_sq, int b, double alpha, std::uint64_t seed,
                                  int threads = 0) {
  const Eigen::MatrixXd x = detail::stack_grids(grids_x, "fixed_hsic_test (x)");
  const Eigen::MatrixXd y = detail::stack_grids(grids_y, "fixed_hsic_test (y)");
  if (x.rows() != y.rows())
    throw validation_error("fixed_hsic_test: need one y series per x series");
  const Eigen::Index n = x.rows();
  const double inv_nn = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  const Eigen::MatrixXd khat =
      detail::second_level_gram(x, x, sigma_k_sq, SecondLevelKernel::gaussian) * inv_nn;
  const Eigen::MatrixXd lhat =
      detail::second_level_gram(y, y, sigma_l_sq, SecondLevelKernel::gaussian) * inv_nn;
  const double observed = static_cast<double>(n) * static_cast<double>(n) *
                          detail::center_gram(khat).cwiseProduct(lhat).sum();
  const auto nulls = detail::independence_null_from_grams(khat, lhat, b, seed, threads);
  TestResult result;
  result.statistic = clamp_tiny(observed);
  result.p_value = p_value(observed, nulls);
  result.alpha = alpha;
  result.reject = result.p_value <= alpha;
  result.n_permutations = b;
  result.selected_params.sigma2_sq = sigma_k_sq;
  result.selected_params.sigma_l_sq = sigma_l_sq;
  result.seed = seed;
  return result;
}

inline double pearson_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw validation_error("pearson_correlation: need equal lengths of at least 3");
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double sx = xc.norm(), sy = yc.norm();
  if (!(sx > 0.0) || !(sy > 0.0))
    throw degenerate_scale_error("pearson_correlation: zero variance");
  return xc.dot(yc) / (sx * sy);
}

/// Pearson correlation with an add-one shuffle null. The permutation ranks
/// use |rho| so both correlation signs count as dependence; the reported
/// statistic keeps the sign.
inline TestResult pcc_perm_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int m,
                                double alpha, std::uint64_t seed) {
  if (m < 1) throw validation_error("pcc_perm_test: need at least one shuffle");
  const double rho = pearson_correlation(x, y);
  const std::size_t n = static_cast<std::size_t>(x.size());
  std::vector<double> nulls(static_cast<std::size_t>(m));
  for (int b = 0; b < m; ++b) {
    auto rng = make_engine(derive_seed(seed, fnv1a("pcc-null"), static_cast<std::uint64_t>(b)));
    const auto pi = detail::random_permutation(n, rng);
    Eigen::VectorXd shuffled(x.size());
    for (std::size_t k = 0; k < n; ++k)
      shuffled(static_cast<Eigen::Index>(k)) = y(pi[k]);
    nulls[static_cast<std::size_t>(b)] = std::abs(pearson_correlation(x, shuffled));
  }
  TestResult result;
  result.statistic = rho;
  result.p_value = p_value(std::abs(rho), nulls);
  result.alpha = alpha;
  result.reject = result.p_value <= alpha;
  result.n_permutations = m;
  result.seed = seed;
  return result;
}

/// Per-series scalar used by the PCC baseline: the mean of the grid values.
inline double grid_mean_summary(const GridSeries& g) { return g.values.mean(); }

}  // namespace settest
