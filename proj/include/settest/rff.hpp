#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <json.hpp>

#include "settest/data.hpp"

namespace settest {

/// Random Fourier feature basis approximating the level-1 Gaussian kernel
/// k(x, y) = exp(-||x - y||^2 / (2 * lengthscale_sq)). Frequencies follow the
/// kernel's spectral measure, N(0, 1/lengthscale_sq) per coordinate.
struct RffBasis {
  Eigen::MatrixXd omegas;  // m x d frequencies
  Eigen::VectorXd phases;  // m phases in [0, 2*pi)
  double lengthscale_sq = 1.0;
  std::uint64_t seed = 0;

  Eigen::Index feature_count() const { return omegas.rows(); }
  Eigen::Index input_dim() const { return omegas.cols(); }

  /// 64-bit hash of (seed, m, d, lengthscale_sq) used to reject mixing
  /// embeddings built from different bases.
  std::uint64_t fingerprint() const {
    return derive_seed(seed, static_cast<std::uint64_t>(feature_count()),
                       static_cast<std::uint64_t>(input_dim()),
                       seed_bits(lengthscale_sq), fnv1a("rff-fingerprint"));
  }
};

/// Finite-dimensional mean embeddings of a sample's sets: row i is the
/// averaged feature map of set i. Every row has Euclidean norm at most
/// sqrt(2) by construction of the cosine features.
struct EmbeddedSample {
  Eigen::MatrixXd embeddings;  // N x m
  Eigen::VectorXd weights;     // N, sums to 1
  std::uint64_t basis_fingerprint = 0;

  Eigen::Index size() const { return embeddings.rows(); }
  Eigen::Index feature_count() const { return embeddings.cols(); }
};

inline RffBasis sample_basis(int m, int d, double lengthscale_sq, std::uint64_t seed) {
  if (m < 1) throw validation_error("sample_basis: feature count must be at least 1");
  if (d < 1) throw validation_error("sample_basis: input dimension must be at least 1");
  if (!(lengthscale_sq > 0.0))
    throw validation_error("sample_basis: lengthscale must be positive");
  RffBasis basis;
  basis.lengthscale_sq = lengthscale_sq;
  basis.seed = seed;
  auto rng = make_engine(derive_seed(seed, fnv1a("rff-basis")));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(lengthscale_sq);
  basis.omegas.resize(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) basis.omegas(i, j) = scale * gauss(rng);
  std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);
  basis.phases.resize(m);
  for (int i = 0; i < m; ++i) basis.phases(i) = unif(rng);
  return basis;
}

/// phi(x) with entries sqrt(2/m) * cos(<omega_j, x> + b_j).
inline Eigen::VectorXd feature_map(const Eigen::VectorXd& x, const RffBasis& basis) {
  if (x.size() != basis.input_dim())
    throw validation_error("feature_map: point dimension does not match basis");
  const double norm = std::sqrt(2.0 / static_cast<double>(basis.feature_count()));
  return norm * (basis.omegas * x + basis.phases).array().cos();
}

/// Arithmetic mean of the feature map over a set's points.
inline Eigen::VectorXd mean_embed(const ObservationSet& set, const RffBasis& basis) {
  if (set.size() < 1) throw validation_error("mean_embed: set '" + set.id + "' is empty");
  if (set.dim() != basis.input_dim())
    throw validation_error("mean_embed: set '" + set.id + "' dimension does not match basis");
  const double norm = std::sqrt(2.0 / static_cast<double>(basis.feature_count()));
  Eigen::MatrixXd proj = basis.omegas * set.points.transpose();  // m x n
  proj.colwise() += basis.phases;
  return norm * proj.array().cos().rowwise().mean();
}

inline EmbeddedSample embed_sample(const Sample& sample, const RffBasis& basis) {
  if (sample.size() < 1) throw validation_error("embed_sample: empty sample");
  EmbeddedSample out;
  out.embeddings.resize(sample.size(), basis.feature_count());
  for (Eigen::Index i = 0; i < sample.size(); ++i)
    out.embeddings.row(i) = mean_embed(sample.sets[static_cast<std::size_t>(i)], basis);
  out.weights = sample.weights;
  out.basis_fingerprint = basis.fingerprint();
  return out;
}

namespace detail {

/// Median of squared pairwise Euclidean distances between rows, estimated
/// from at most max_pairs pairs. Enumerates all pairs when feasible.
inline double median_sq_distance(const Eigen::MatrixXd& rows, std::size_t max_pairs,
                                 std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(rows.rows());
  if (n < 2) throw validation_error("median heuristic needs at least 2 points");
  const std::size_t total = n * (n - 1) / 2;
  std::vector<double> d2;
  if (total <= max_pairs) {
    d2.reserve(total);
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        d2.push_back((rows.row(static_cast<Eigen::Index>(i)) -
                      rows.row(static_cast<Eigen::Index>(j)))
                         .squaredNorm());
  } else {
    auto rng = make_engine(derive_seed(seed, fnv1a("median-pairs")));
    std::uniform_int_distribution<std::size_t> pick_i(0, n - 1);
    std::uniform_int_distribution<std::size_t> pick_j(0, n - 2);
    d2.reserve(max_pairs);
    for (std::size_t k = 0; k < max_pairs; ++k) {
      const std::size_t i = pick_i(rng);
      std::size_t j = pick_j(rng);
      if (j >= i) ++j;
      d2.push_back((rows.row(static_cast<Eigen::Index>(i)) -
                    rows.row(static_cast<Eigen::Index>(j)))
                       .squaredNorm());
    }
  }
  const std::size_t mid = d2.size() / 2;
  std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(mid), d2.end());
  double med = d2[mid];
  if (d2.size() % 2 == 0) {
    // even count: midpoint of the two central order statistics
    const double hi = med;
    const double lo = *std::max_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (lo + hi);
  }
  return med;
}

inline double level1_from_points(const Eigen::MatrixXd& pooled, std::size_t max_pairs,
                                 std::uint64_t seed) {
  const double med = median_sq_distance(pooled, max_pairs, seed);
  if (!(med > 0.0))
    throw degenerate_scale_error("level-1 median heuristic: all pooled points coincide");
  return med / 2.0;
}

}  // namespace detail

inline constexpr std::size_t kDefaultMaxHeuristicPairs = 1'000'000;

/// Level-1 bandwidth sigma1^2 = median squared pairwise distance of the
/// pooled points, divided by two.
inline double median_heuristic_level1(const Sample& sample,
                                      std::size_t max_pairs = kDefaultMaxHeuristicPairs,
                                      std::uint64_t seed = 0) {
  return detail::level1_from_points(pooled_points(sample.sets), max_pairs, seed);
}

/// Pools the points of both samples of a two-sample problem.
inline double median_heuristic_level1(const Sample& x, const Sample& y,
                                      std::size_t max_pairs = kDefaultMaxHeuristicPairs,
                                      std::uint64_t seed = 0) {
  if (x.dim() != y.dim())
    throw validation_error("median heuristic: samples have different dimensions");
  const Eigen::MatrixXd px = pooled_points(x.sets);
  const Eigen::MatrixXd py = pooled_points(y.sets);
  Eigen::MatrixXd pooled(px.rows() + py.rows(), x.dim());
  pooled.topRows(px.rows()) = px;
  pooled.bottomRows(py.rows()) = py;
  return detail::level1_from_points(pooled, max_pairs, seed);
}

/// Shared level-1 bandwidth for a paired sample: pooled over both sides when
/// their dimensions match, otherwise the geometric mean of per-side values.
inline double median_heuristic_level1(const PairedSample& sample,
                                      std::size_t max_pairs = kDefaultMaxHeuristicPairs,
                                      std::uint64_t seed = 0) {
  const Eigen::MatrixXd px = pooled_points(sample.x_sets);
  const Eigen::MatrixXd py = pooled_points(sample.y_sets);
  if (px.cols() == py.cols()) {
    Eigen::MatrixXd pooled(px.rows() + py.rows(), px.cols());
    pooled.topRows(px.rows()) = px;
    pooled.bottomRows(py.rows()) = py;
    return detail::level1_from_points(pooled, max_pairs, seed);
  }
  const double sx = detail::level1_from_points(px, max_pairs, seed);
  const double sy = detail::level1_from_points(py, max_pairs, seed);
  return std::sqrt(sx * sy);
}

inline void to_json(nlohmann::ordered_json& j, const EmbeddedSample& e) {
  j = nlohmann::ordered_json::object();
  j["basis_fingerprint"] = e.basis_fingerprint;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < e.embeddings.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index k = 0; k < e.embeddings.cols(); ++k) row.push_back(e.embeddings(i, k));
    rows.push_back(std::move(row));
  }
  j["embeddings"] = std::move(rows);
  nlohmann::ordered_json w = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < e.weights.size(); ++i) w.push_back(e.weights(i));
  j["weights"] = std::move(w);
}

inline void from_json(const nlohmann::ordered_json& j, EmbeddedSample& e) {
  e.basis_fingerprint = j.at("basis_fingerprint").get<std::uint64_t>();
  const auto& rows = j.at("embeddings");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = n > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  e.embeddings.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < m; ++k)
      e.embeddings(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  const auto& w = j.at("weights");
  e.weights.resize(static_cast<Eigen::Index>(w.size()));
  for (Eigen::Index i = 0; i < e.weights.size(); ++i)
    e.weights(i) = w[static_cast<std::size_t>(i)].get<double>();
}

}  // namespace settest
