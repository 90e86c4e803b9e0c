#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "settest/statistics.hpp"

namespace settest {

/// Selected kernel bandwidths. sigma2_sq doubles as the K-side bandwidth for
/// independence tests; sigma_l_sq is NaN for two-sample results.
struct SelectedParams {
  double sigma1_sq = std::numeric_limits<double>::quiet_NaN();
  double sigma2_sq = std::numeric_limits<double>::quiet_NaN();
  double sigma_l_sq = std::numeric_limits<double>::quiet_NaN();
};

/// Outcome of one permutation-calibrated hypothesis test.
struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
  int n_permutations = 0;
  std::vector<double> null_stats;  // retained only on request
  SelectedParams selected_params;
  std::uint64_t seed = 0;
  // replay/audit trail
  std::uint64_t basis_fingerprint = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

/// Add-one permutation p-value: (1 + #{null >= observed}) / (B + 1).
/// Ties count toward the null.
inline double p_value(double observed, const std::vector<double>& nulls) {
  if (nulls.empty()) throw validation_error("p_value: empty null sample");
  std::size_t count = 0;
  for (double v : nulls)
    if (v >= observed) ++count;
  return static_cast<double>(1 + count) / static_cast<double>(nulls.size() + 1);
}

/// Statistics are reported as 0 when within rounding of it; permutation
/// ranks always use the raw value.
inline double clamp_tiny(double v) { return std::abs(v) < 1e-12 ? 0.0 : v; }

namespace detail {

inline std::vector<std::uint32_t> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
  if (n < 2) return order;
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  return order;
}

/// Two-sample statistic for one regrouping of the pooled rows, evaluated on
/// the precomputed pooled Gram. With s holding the renormalized group-x
/// weights (positive) and group-y weights (negated), the statistic is s'Ps.
inline double regrouped_two_sample_stat(const Eigen::MatrixXd& pooled_gram,
                                        const Eigen::VectorXd& pooled_weights,
                                        const std::vector<std::uint32_t>& order,
                                        std::size_t n_x) {
  const std::size_t n = order.size();
  double sum_x = 0.0, sum_y = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    (k < n_x ? sum_x : sum_y) += pooled_weights(order[k]);
  if (!(sum_x > 0.0) || !(sum_y > 0.0))
    throw validation_error("permutation regrouping produced a zero-weight group");
  Eigen::VectorXd s(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k)
    s(order[k]) = k < n_x ? pooled_weights(order[k]) / sum_x
                          : -pooled_weights(order[k]) / sum_y;
  return s.dot(pooled_gram * s);
}

/// Null replicates from a precomputed pooled Gram. Replicate b draws its
/// permutation from a stream derived from (seed, b), so the output is
/// independent of scheduling.
inline std::vector<double> two_sample_null_from_gram(const Eigen::MatrixXd& pooled_gram,
                                                     const Eigen::VectorXd& pooled_weights,
                                                     std::size_t n_x, int b,
                                                     std::uint64_t seed, int threads = 0) {
  if (b < 1) throw validation_error("permutation null: need at least one replicate");
  const std::size_t n = static_cast<std::size_t>(pooled_gram.rows());
  std::vector<double> nulls(static_cast<std::size_t>(b));
  parallel_for(
      static_cast<std::size_t>(b),
      [&](std::size_t rep) {
        auto rng = make_engine(derive_seed(seed, fnv1a("two-sample-null"), rep));
        const auto order = random_permutation(n, rng);
        nulls[rep] = regrouped_two_sample_stat(pooled_gram, pooled_weights, order, n_x);
      },
      threads);
  return nulls;
}

/// Independence null replicates: the y side's rows and weights are permuted
/// together, which on the weighted Grams amounts to index relabeling of Lhat.
inline std::vector<double> independence_null_from_grams(const Eigen::MatrixXd& khat,
                                                        const Eigen::MatrixXd& lhat,
                                                        int b, std::uint64_t seed,
                                                        int threads = 0) {
  if (b < 1) throw validation_error("permutation null: need at least one replicate");
  const Eigen::Index n = khat.rows();
  const Eigen::MatrixXd centered_k = center_gram(khat);
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  std::vector<double> nulls(static_cast<std::size_t>(b));
  parallel_for(
      static_cast<std::size_t>(b),
      [&](std::size_t rep) {
        auto rng = make_engine(derive_seed(seed, fnv1a("independence-null"), rep));
        const auto pi = random_permutation(static_cast<std::size_t>(n), rng);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j)
            acc += centered_k(i, j) * lhat(pi[static_cast<std::size_t>(i)],
                                           pi[static_cast<std::size_t>(j)]);
        nulls[rep] = nn * acc;
      },
      threads);
  return nulls;
}

}  // namespace detail

/// Permutation null for the two-sample problem: pool the (embedding, weight)
/// rows of both samples, re-split uniformly into groups of the original
/// sizes, renormalize weights within each group, and re-evaluate the
/// statistic. Kernels are evaluated once on the pooled rows; each replicate
/// only re-indexes the pooled Gram.
inline std::vector<double> two_sample_null(const EmbeddedSample& x, const EmbeddedSample& y,
                                           double sigma2_sq, int b, std::uint64_t seed,
                                           SecondLevelKernel kind = SecondLevelKernel::gaussian,
                                           int threads = 0) {
  if (x.basis_fingerprint != y.basis_fingerprint)
    throw validation_error("two_sample_null: embeddings were built from different bases");
  Eigen::MatrixXd pooled(x.size() + y.size(), x.feature_count());
  pooled.topRows(x.size()) = x.embeddings;
  pooled.bottomRows(y.size()) = y.embeddings;
  Eigen::VectorXd weights(x.size() + y.size());
  weights << x.weights, y.weights;
  const Eigen::MatrixXd gram = detail::second_level_gram(pooled, pooled, sigma2_sq, kind);
  return detail::two_sample_null_from_gram(gram, weights, static_cast<std::size_t>(x.size()),
                                           b, seed, threads);
}

/// Permutation null for the independence problem: the y side's rows and
/// weights are permuted by a uniform random permutation, the x side is left
/// untouched.
inline std::vector<double> independence_null(const EmbeddedSample& x, const EmbeddedSample& y,
                                             double sigma_k_sq, double sigma_l_sq, int b,
                                             std::uint64_t seed,
                                             SecondLevelKernel kind = SecondLevelKernel::gaussian,
                                             int threads = 0) {
  if (x.size() != y.size())
    throw validation_error("independence_null: paired samples must have equal size");
  const Eigen::MatrixXd k =
      detail::second_level_gram(x.embeddings, x.embeddings, sigma_k_sq, kind);
  const Eigen::MatrixXd l =
      detail::second_level_gram(y.embeddings, y.embeddings, sigma_l_sq, kind);
  const Eigen::MatrixXd khat = k.cwiseProduct(x.weights * x.weights.transpose());
  const Eigen::MatrixXd lhat = l.cwiseProduct(y.weights * y.weights.transpose());
  return detail::independence_null_from_grams(khat, lhat, b, seed, threads);
}

}  // namespace settest
