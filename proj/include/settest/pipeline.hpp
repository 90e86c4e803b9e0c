#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "settest/io.hpp"
#include "settest/tuning.hpp"

namespace settest {

/// Everything needed to run one two-sample or independence test end to end.
struct TestConfig {
  double alpha = 0.05;
  int permutations = 400;
  int features = 50;
  ParamGrid grid;
  Weighting weighting = Weighting::set_size;
  bool tune = true;  // power-proxy selection on a train split; median heuristics otherwise
  int b_inner = 50;  // inner replicates for the independence criterion
  std::uint64_t seed = 0;
  int threads = 0;
  SecondLevelKernel second_level = SecondLevelKernel::gaussian;
  bool keep_null_stats = false;
};

namespace detail {

inline void check_disjoint_ids(const std::vector<ObservationSet>& train,
                               const std::vector<ObservationSet>& test) {
  std::unordered_set<std::string> seen;
  for (const auto& s : train) seen.insert(s.id);
  for (const auto& s : test)
    if (seen.count(s.id))
      throw validation_error("train/test split is not disjoint: set '" + s.id + "'");
}

inline Eigen::VectorXd weights_for(Weighting mode, const Eigen::VectorXd& current,
                                   Eigen::Index n) {
  return mode == Weighting::uniform ? uniform_weights(n) : current;
}

inline void collect_ids(const std::vector<ObservationSet>& sets, const std::string& prefix,
                        std::vector<std::string>& out) {
  for (const auto& s : sets) out.push_back(prefix + s.id);
}

}  // namespace detail

/// load -> split -> tune on the training part -> embed, test and permute on
/// the held-out part. Without tuning, bandwidths come from the median
/// heuristics on the full data and no split happens.
inline TestResult run_two_sample_test(const Sample& x, const Sample& y,
                                      const TestConfig& config) {
  validate(x);
  validate(y);
  if (x.dim() != y.dim())
    throw validation_error("two-sample test: samples have different point dimensions");

  TestResult result;
  result.alpha = config.alpha;
  result.seed = config.seed;
  result.n_permutations = config.permutations;

  Sample test_x = x, test_y = y;
  double sigma1 = 0.0, sigma2 = 0.0;
  std::uint64_t basis_seed = derive_seed(config.seed, fnv1a("basis"));
  if (config.tune) {
    // one split seed for both samples: equal-sized identical inputs then
    // stay identical on the held-out part
    const std::uint64_t split_seed = derive_seed(config.seed, fnv1a("split"));
    auto [train_x, held_x] = split(x, config.grid.split_fraction, split_seed);
    auto [train_y, held_y] = split(y, config.grid.split_fraction, split_seed);
    detail::check_disjoint_ids(train_x.sets, held_x.sets);
    detail::check_disjoint_ids(train_y.sets, held_y.sets);
    const std::uint64_t tune_seed = derive_seed(config.seed, fnv1a("tune"));
    TuningReport report = select_params_two_sample(train_x, train_y, config.grid,
                                                   config.features, tune_seed);
    report.split_seed = split_seed;
    sigma1 = report.best().sigma1_sq;
    sigma2 = report.best().sigma2_sq;
    // the learned kernel includes the feature basis the bandwidths were
    // selected for
    basis_seed = derive_seed(tune_seed, fnv1a("tuning-basis"));
    detail::collect_ids(train_x.sets, "x:", result.train_ids);
    detail::collect_ids(train_y.sets, "y:", result.train_ids);
    test_x = std::move(held_x);
    test_y = std::move(held_y);
  } else {
    sigma1 = median_heuristic_level1(x, y);
  }
  detail::collect_ids(test_x.sets, "x:", result.test_ids);
  detail::collect_ids(test_y.sets, "y:", result.test_ids);

  test_x.weights = detail::weights_for(config.weighting, test_x.weights, test_x.size());
  test_y.weights = detail::weights_for(config.weighting, test_y.weights, test_y.size());

  const RffBasis basis =
      sample_basis(config.features, static_cast<int>(test_x.dim()), sigma1, basis_seed);
  const EmbeddedSample emb_x = embed_sample(test_x, basis);
  const EmbeddedSample emb_y = embed_sample(test_y, basis);
  if (!config.tune) sigma2 = median_heuristic_level2(emb_x, emb_y);

  const double observed = rmmd2(emb_x, emb_y, sigma2, config.second_level).value;
  const auto nulls =
      two_sample_null(emb_x, emb_y, sigma2, config.permutations,
                      derive_seed(config.seed, fnv1a("null")), config.second_level,
                      config.threads);
  result.statistic = clamp_tiny(observed);
  result.p_value = p_value(observed, nulls);
  result.reject = result.p_value <= config.alpha;
  result.selected_params.sigma1_sq = sigma1;
  result.selected_params.sigma2_sq = sigma2;
  result.basis_fingerprint = basis.fingerprint();
  if (config.keep_null_stats) result.null_stats = nulls;
  return result;
}

inline TestResult run_independence_test(const PairedSample& pairs, const TestConfig& config) {
  validate(pairs);

  TestResult result;
  result.alpha = config.alpha;
  result.seed = config.seed;
  result.n_permutations = config.permutations;

  PairedSample test = pairs;
  double sigma1 = 0.0, sigma_k = 0.0, sigma_l = 0.0;
  std::uint64_t basis_seed_x = derive_seed(config.seed, fnv1a("basis-x"));
  std::uint64_t basis_seed_y = derive_seed(config.seed, fnv1a("basis-y"));
  if (config.tune) {
    const std::uint64_t split_seed = derive_seed(config.seed, fnv1a("split"));
    auto [train, held] = split(pairs, config.grid.split_fraction, split_seed);
    detail::check_disjoint_ids(train.x_sets, held.x_sets);
    const std::uint64_t tune_seed = derive_seed(config.seed, fnv1a("tune"));
    TuningReport report = select_params_independence(train, config.grid, config.features,
                                                     config.b_inner, tune_seed);
    report.split_seed = split_seed;
    sigma1 = report.best().sigma1_sq;
    sigma_k = report.best().sigma2_sq;
    sigma_l = report.best().sigma_l_sq;
    basis_seed_x = derive_seed(tune_seed, fnv1a("tuning-basis-x"));
    basis_seed_y = derive_seed(tune_seed, fnv1a("tuning-basis-y"));
    detail::collect_ids(train.x_sets, "", result.train_ids);
    test = std::move(held);
  } else {
    sigma1 = median_heuristic_level1(pairs);
  }
  detail::collect_ids(test.x_sets, "", result.test_ids);

  Sample side_x{test.x_sets, detail::weights_for(config.weighting, test.weights_x, test.size())};
  Sample side_y{test.y_sets, detail::weights_for(config.weighting, test.weights_y, test.size())};

  const RffBasis basis_x =
      sample_basis(config.features, static_cast<int>(test.dim_x()), sigma1, basis_seed_x);
  const RffBasis basis_y =
      sample_basis(config.features, static_cast<int>(test.dim_y()), sigma1, basis_seed_y);
  const EmbeddedSample emb_x = embed_sample(side_x, basis_x);
  const EmbeddedSample emb_y = embed_sample(side_y, basis_y);
  if (!config.tune) {
    sigma_k = median_heuristic_level2(emb_x);
    sigma_l = median_heuristic_level2(emb_y);
  }

  const double observed = rhsic(emb_x, emb_y, sigma_k, sigma_l, config.second_level).value;
  const auto nulls =
      independence_null(emb_x, emb_y, sigma_k, sigma_l, config.permutations,
                        derive_seed(config.seed, fnv1a("null")), config.second_level,
                        config.threads);
  result.statistic = clamp_tiny(observed);
  result.p_value = p_value(observed, nulls);
  result.reject = result.p_value <= config.alpha;
  result.selected_params.sigma1_sq = sigma1;
  result.selected_params.sigma2_sq = sigma_k;
  result.selected_params.sigma_l_sq = sigma_l;
  result.basis_fingerprint = basis_x.fingerprint();
  if (config.keep_null_stats) result.null_stats = nulls;
  return result;
}

/// Versioned JSON form of a test result; key order is fixed so identical
/// runs serialize to identical bytes.
inline nlohmann::ordered_json result_to_json(const TestResult& result) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["statistic"] = result.statistic;
  j["p_value"] = result.p_value;
  j["reject"] = result.reject;
  j["alpha"] = result.alpha;
  j["n_permutations"] = result.n_permutations;
  nlohmann::ordered_json params;
  if (!std::isnan(result.selected_params.sigma1_sq))
    params["sigma1_sq"] = result.selected_params.sigma1_sq;
  params["sigma2_sq"] = result.selected_params.sigma2_sq;
  if (!std::isnan(result.selected_params.sigma_l_sq))
    params["sigma_l_sq"] = result.selected_params.sigma_l_sq;
  j["selected_params"] = std::move(params);
  j["seed"] = result.seed;
  j["basis_fingerprint"] = result.basis_fingerprint;
  j["train_ids"] = result.train_ids;
  j["test_ids"] = result.test_ids;
  if (!result.null_stats.empty()) j["null_stats"] = result.null_stats;
  return j;
}

}  // namespace settest
