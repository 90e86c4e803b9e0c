#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "settest/common.hpp"

namespace settest {

inline constexpr double kWeightSumTol = 1e-12;

/// How per-set weights are assigned when running a test.
enum class Weighting { set_size, uniform };

/// One bag of observations treated as a draw from a single latent
/// distribution. Rows of `points` are individual d-dimensional observations.
struct ObservationSet {
  std::string id;
  Eigen::MatrixXd points;  // n x d

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

/// A collection of observation sets with per-set weights summing to one.
struct Sample {
  std::vector<ObservationSet> sets;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return static_cast<Eigen::Index>(sets.size()); }
  Eigen::Index dim() const { return sets.empty() ? 0 : sets.front().dim(); }
};

/// Index-aligned pairs of observation sets. The x and y sides may have
/// different point dimensions and carry independently normalized weights.
struct PairedSample {
  std::vector<ObservationSet> x_sets;
  std::vector<ObservationSet> y_sets;
  Eigen::VectorXd weights_x;
  Eigen::VectorXd weights_y;

  Eigen::Index size() const {
    return static_cast<Eigen::Index>(x_sets.size());
  }
  Eigen::Index dim_x() const { return x_sets.empty() ? 0 : x_sets.front().dim(); }
  Eigen::Index dim_y() const { return y_sets.empty() ? 0 : y_sets.front().dim(); }
};

inline void validate(const ObservationSet& set) {
  if (set.points.rows() < 1)
    throw validation_error("set '" + set.id + "' is empty");
  if (set.points.cols() < 1)
    throw validation_error("set '" + set.id + "' has zero-dimensional points");
  if (!set.points.allFinite())
    throw validation_error("set '" + set.id + "' contains a non-finite coordinate");
}

/// Confidence weights proportional to set size: w_i = n_i / sum_j n_j.
inline Eigen::VectorXd compute_weights(const std::vector<Eigen::Index>& set_sizes) {
  if (set_sizes.empty()) throw validation_error("compute_weights: no set sizes given");
  Eigen::VectorXd w(static_cast<Eigen::Index>(set_sizes.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < set_sizes.size(); ++i) {
    if (set_sizes[i] < 1)
      throw validation_error("compute_weights: set size must be at least 1");
    w(static_cast<Eigen::Index>(i)) = static_cast<double>(set_sizes[i]);
    total += static_cast<double>(set_sizes[i]);
  }
  return w / total;
}

inline Eigen::VectorXd uniform_weights(Eigen::Index n) {
  if (n < 1) throw validation_error("uniform_weights: need at least one set");
  return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
}

inline std::vector<Eigen::Index> set_sizes(const std::vector<ObservationSet>& sets) {
  std::vector<Eigen::Index> sizes;
  sizes.reserve(sets.size());
  for (const auto& s : sets) sizes.push_back(s.size());
  return sizes;
}

/// Rescales nonnegative weights to sum to one.
inline Eigen::VectorXd renormalize_weights(Eigen::VectorXd w) {
  if (w.size() == 0) throw validation_error("cannot normalize an empty weight vector");
  if ((w.array() < 0.0).any())
    throw validation_error("weights must be nonnegative");
  const double total = w.sum();
  if (!(total > 0.0)) throw validation_error("weights must have a positive sum");
  return w / total;
}

namespace detail {

inline void check_common_dim(const std::vector<ObservationSet>& sets,
                             const char* what) {
  const Eigen::Index d = sets.front().dim();
  for (const auto& s : sets) {
    validate(s);
    if (s.dim() != d)
      throw validation_error(std::string(what) + ": set '" + s.id + "' has dimension " +
                             std::to_string(s.dim()) + ", expected " + std::to_string(d));
  }
}

inline void check_unique_ids(const std::vector<ObservationSet>& sets) {
  std::unordered_set<std::string> seen;
  for (const auto& s : sets)
    if (!seen.insert(s.id).second)
      throw validation_error("duplicate set id '" + s.id + "'");
}

inline void check_weights_sum_to_one(const Eigen::VectorXd& w, const char* what) {
  if ((w.array() < 0.0).any())
    throw validation_error(std::string(what) + ": weights must be nonnegative");
  if (std::abs(w.sum() - 1.0) > 1e-9)
    throw validation_error(std::string(what) + ": weights must sum to 1");
}

}  // namespace detail

inline void validate(const Sample& sample) {
  if (sample.size() < 2)
    throw validation_error("a sample needs at least 2 sets");
  detail::check_common_dim(sample.sets, "sample");
  detail::check_unique_ids(sample.sets);
  if (sample.weights.size() != sample.size())
    throw validation_error("sample: weight count does not match set count");
  detail::check_weights_sum_to_one(sample.weights, "sample");
}

inline void validate(const PairedSample& sample) {
  if (sample.x_sets.size() != sample.y_sets.size())
    throw validation_error("paired sample: x and y sides have different pair counts");
  if (sample.size() < 2)
    throw validation_error("a paired sample needs at least 2 pairs");
  detail::check_common_dim(sample.x_sets, "paired sample (x side)");
  detail::check_common_dim(sample.y_sets, "paired sample (y side)");
  detail::check_unique_ids(sample.x_sets);
  if (sample.weights_x.size() != sample.size() || sample.weights_y.size() != sample.size())
    throw validation_error("paired sample: weight count does not match pair count");
  detail::check_weights_sum_to_one(sample.weights_x, "paired sample (x side)");
  detail::check_weights_sum_to_one(sample.weights_y, "paired sample (y side)");
}

/// Assembles and validates a Sample. Without explicit weights the set-size
/// rule applies; explicit weights are normalized to sum to one.
inline Sample make_sample(std::vector<ObservationSet> sets,
                          std::optional<Eigen::VectorXd> weights = std::nullopt) {
  Sample sample;
  sample.sets = std::move(sets);
  if (weights) {
    if (weights->size() != sample.size())
      throw validation_error("make_sample: weight count does not match set count");
    sample.weights = renormalize_weights(std::move(*weights));
  } else {
    sample.weights = compute_weights(set_sizes(sample.sets));
  }
  validate(sample);
  return sample;
}

inline PairedSample make_paired_sample(
    std::vector<ObservationSet> x_sets, std::vector<ObservationSet> y_sets,
    std::optional<Eigen::VectorXd> weights_x = std::nullopt,
    std::optional<Eigen::VectorXd> weights_y = std::nullopt) {
  PairedSample sample;
  sample.x_sets = std::move(x_sets);
  sample.y_sets = std::move(y_sets);
  sample.weights_x = weights_x ? renormalize_weights(std::move(*weights_x))
                               : compute_weights(set_sizes(sample.x_sets));
  sample.weights_y = weights_y ? renormalize_weights(std::move(*weights_y))
                               : compute_weights(set_sizes(sample.y_sets));
  validate(sample);
  return sample;
}

/// Stacks the points of all sets into one matrix (rows are observations).
inline Eigen::MatrixXd pooled_points(const std::vector<ObservationSet>& sets) {
  Eigen::Index total = 0;
  for (const auto& s : sets) total += s.size();
  if (sets.empty() || total == 0) return Eigen::MatrixXd();
  Eigen::MatrixXd out(total, sets.front().dim());
  Eigen::Index row = 0;
  for (const auto& s : sets) {
    out.middleRows(row, s.size()) = s.points;
    row += s.size();
  }
  return out;
}

}  // namespace settest
