#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <json.hpp>

#include "settest/permutation.hpp"

namespace settest {

/// Bandwidth search space: multipliers applied to the level-1 and level-2
/// median heuristics of the training part.
struct ParamGrid {
  std::vector<double> level1_multipliers{0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> level2_multipliers{0.25, 0.5, 1.0, 2.0, 4.0};
  double split_fraction = 0.5;
  double ridge = 1e-8;
  Weighting criterion_weighting = Weighting::uniform;
};

struct TuningRow {
  double sigma1_sq = 0.0;
  double sigma2_sq = 0.0;  // K-side bandwidth for independence
  double sigma_l_sq = std::numeric_limits<double>::quiet_NaN();
  double mult1 = 1.0;
  double mult2 = 1.0;
  double mult_l = std::numeric_limits<double>::quiet_NaN();
  double criterion = 0.0;
};

struct TuningReport {
  std::vector<TuningRow> table;
  std::size_t argmax_index = 0;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;  // filled by the caller that performed the split

  const TuningRow& best() const { return table.at(argmax_index); }
};

inline void to_json(nlohmann::ordered_json& j, const TuningReport& r) {
  j = nlohmann::ordered_json::object();
  j["argmax_index"] = r.argmax_index;
  j["seed"] = r.seed;
  j["split_seed"] = r.split_seed;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.table) {
    nlohmann::ordered_json o;
    o["sigma1_sq"] = row.sigma1_sq;
    o["sigma2_sq"] = row.sigma2_sq;
    if (!std::isnan(row.sigma_l_sq)) o["sigma_l_sq"] = row.sigma_l_sq;
    o["mult1"] = row.mult1;
    o["mult2"] = row.mult2;
    if (!std::isnan(row.mult_l)) o["mult_l"] = row.mult_l;
    o["criterion"] = row.criterion;
    rows.push_back(std::move(o));
  }
  j["table"] = std::move(rows);
}

namespace detail {

inline std::vector<Eigen::Index> sorted_subset(const std::vector<std::uint32_t>& order,
                                               std::size_t from, std::size_t to) {
  std::vector<Eigen::Index> idx;
  idx.reserve(to - from);
  for (std::size_t k = from; k < to; ++k) idx.push_back(static_cast<Eigen::Index>(order[k]));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline std::vector<ObservationSet> subset_sets(const std::vector<ObservationSet>& sets,
                                               const std::vector<Eigen::Index>& idx) {
  std::vector<ObservationSet> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(sets[static_cast<std::size_t>(i)]);
  return out;
}

inline Eigen::VectorXd subset_weights(const Eigen::VectorXd& w,
                                      const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = w(idx[k]);
  return out;
}

}  // namespace detail

/// Disjoint uniform split at the set level; weights are renormalized within
/// each part. Both parts must keep at least 2 sets.
inline std::pair<Sample, Sample> split(const Sample& sample, double fraction,
                                       std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(sample.size());
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * fraction));
  if (n_train < 2 || n - n_train < 2)
    throw validation_error("split: parts too small (need at least 2 sets each)");
  auto rng = make_engine(derive_seed(seed, fnv1a("split")));
  const auto order = detail::random_permutation(n, rng);
  const auto train_idx = detail::sorted_subset(order, 0, n_train);
  const auto test_idx = detail::sorted_subset(order, n_train, n);
  Sample train{detail::subset_sets(sample.sets, train_idx),
               renormalize_weights(detail::subset_weights(sample.weights, train_idx))};
  Sample test{detail::subset_sets(sample.sets, test_idx),
              renormalize_weights(detail::subset_weights(sample.weights, test_idx))};
  return {std::move(train), std::move(test)};
}

/// Pair-level split of a paired sample.
inline std::pair<PairedSample, PairedSample> split(const PairedSample& sample,
                                                   double fraction, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(sample.size());
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * fraction));
  if (n_train < 2 || n - n_train < 2)
    throw validation_error("split: parts too small (need at least 2 pairs each)");
  auto rng = make_engine(derive_seed(seed, fnv1a("split")));
  const auto order = detail::random_permutation(n, rng);
  const auto train_idx = detail::sorted_subset(order, 0, n_train);
  const auto test_idx = detail::sorted_subset(order, n_train, n);
  auto part = [&](const std::vector<Eigen::Index>& idx) {
    PairedSample p;
    p.x_sets = detail::subset_sets(sample.x_sets, idx);
    p.y_sets = detail::subset_sets(sample.y_sets, idx);
    p.weights_x = renormalize_weights(detail::subset_weights(sample.weights_x, idx));
    p.weights_y = renormalize_weights(detail::subset_weights(sample.weights_y, idx));
    return p;
  };
  return {part(train_idx), part(test_idx)};
}

/// Second-order estimate of the variance of the two-sample statistic under
/// the alternative, from aligned N x N kernel blocks:
///   H_ij = Kxx_ij + Kyy_ij - Kxy_ij - Kxy_ji
///   sigma^2 = (4/N^3) sum_i (sum_j H_ij)^2 - (4/N^4) (sum_ij H_ij)^2
inline double mmd_variance_h1(const Eigen::MatrixXd& kxx, const Eigen::MatrixXd& kyy,
                              const Eigen::MatrixXd& kxy) {
  const Eigen::Index n = kxx.rows();
  if (kxx.cols() != n || kyy.rows() != n || kyy.cols() != n || kxy.rows() != n ||
      kxy.cols() != n)
    throw validation_error("mmd_variance_h1: blocks must be square and equal-sized");
  const Eigen::MatrixXd h = kxx + kyy - kxy - kxy.transpose();
  const double dn = static_cast<double>(n);
  const double row_term = h.rowwise().sum().squaredNorm();
  const double total = h.sum();
  const double var = 4.0 / (dn * dn * dn) * row_term - 4.0 / (dn * dn * dn * dn) * total * total;
  return std::max(var, 0.0);
}

namespace detail {

inline double median_of_upper_triangle(const Eigen::MatrixXd& d2) {
  const Eigen::Index n = d2.rows();
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2);
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) vals.push_back(d2(i, j));
  const std::size_t mid = vals.size() / 2;
  std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid), vals.end());
  double med = vals[mid];
  if (vals.size() % 2 == 0) {
    const double lo =
        *std::max_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (lo + med);
  }
  return med;
}

// Criterion ties resolve toward the cell closest to the plain median
// heuristics (multipliers nearest 1), then lexicographically smaller
// bandwidths.
inline bool better_row(const TuningRow& a, const TuningRow& b) {
  if (a.criterion != b.criterion) return a.criterion > b.criterion;
  auto dist = [](const TuningRow& r) {
    double d = std::abs(std::log2(r.mult1)) + std::abs(std::log2(r.mult2));
    if (!std::isnan(r.mult_l)) d += std::abs(std::log2(r.mult_l));
    return d;
  };
  const double da = dist(a), db = dist(b);
  if (da != db) return da < db;
  if (a.sigma1_sq != b.sigma1_sq) return a.sigma1_sq < b.sigma1_sq;
  if (a.sigma2_sq != b.sigma2_sq) return a.sigma2_sq < b.sigma2_sq;
  return a.sigma_l_sq < b.sigma_l_sq;
}

inline std::size_t argmax_row(const std::vector<TuningRow>& rows) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (better_row(rows[i], rows[best])) best = i;
  return best;
}

inline Eigen::MatrixXd embed_matrix(const std::vector<ObservationSet>& sets,
                                    const RffBasis& basis) {
  Eigen::MatrixXd e(static_cast<Eigen::Index>(sets.size()), basis.feature_count());
  for (std::size_t i = 0; i < sets.size(); ++i)
    e.row(static_cast<Eigen::Index>(i)) = mean_embed(sets[i], basis);
  return e;
}

inline std::vector<Eigen::Index> variance_subsample(std::size_t from, std::size_t want,
                                                    std::uint64_t seed) {
  auto rng = make_engine(seed);
  const auto order = random_permutation(from, rng);
  auto idx = sorted_subset(order, 0, want);
  return idx;
}

/// Statistic of a pair-level resample: rows and columns of the weighted
/// Grams gathered by index, then centered.
inline double gathered_hsic(const Eigen::MatrixXd& khat, const Eigen::MatrixXd& lhat,
                            const std::vector<std::uint32_t>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd kb(n, n), lb(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      kb(i, j) = khat(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
      lb(i, j) = lhat(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return nn * center_gram(kb).cwiseProduct(lb).sum();
}

/// Diagonal-removed two-sample numerator for the power criterion. The plain
/// V-statistic keeps a positive within-sample diagonal bias that survives as
/// the kernel shrinks while the variance estimate collapses to zero, which
/// would make vanishing bandwidths the argmax. Removing the diagonal kills
/// that bias; with uniform weights this is the usual unbiased estimator.
inline double criterion_numerator_two_sample(const Eigen::MatrixXd& pooled_gram,
                                             const Eigen::VectorXd& wx,
                                             const Eigen::VectorXd& wy) {
  const Eigen::Index n_x = wx.size();
  const Eigen::Index n_y = wy.size();
  const auto kxx = pooled_gram.topLeftCorner(n_x, n_x);
  const auto kyy = pooled_gram.bottomRightCorner(n_y, n_y);
  const auto kxy = pooled_gram.topRightCorner(n_x, n_y);
  auto within = [](const Eigen::VectorXd& w, const auto& k) {
    const double full = w.dot(k * w);
    double diag = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) diag += w(i) * w(i) * k(i, i);
    const double mass = std::max(1.0 - w.squaredNorm(), 1e-12);
    return (full - diag) / mass;
  };
  return within(wx, kxx) + within(wy, kyy) - 2.0 * wx.dot(kxy * wy);
}

}  // namespace detail

/// Scans the bandwidth grid on the training parts and returns the cell
/// maximizing the power proxy: the diagonal-removed two-sample statistic
/// over sqrt(variance) + ridge. Level-2 medians are recomputed from the
/// embeddings of each level-1 cell. The variance estimator needs aligned
/// sides, so the larger side is subsampled once (seeded) when the training
/// parts differ in size.
inline TuningReport select_params_two_sample(const Sample& train_x, const Sample& train_y,
                                             const ParamGrid& grid, int m,
                                             std::uint64_t seed) {
  validate(train_x);
  validate(train_y);
  if (train_x.dim() != train_y.dim())
    throw validation_error("select_params_two_sample: samples have different dimensions");
  if (grid.level1_multipliers.empty() || grid.level2_multipliers.empty())
    throw validation_error("select_params_two_sample: empty multiplier grid");
  const Eigen::Index n_x = train_x.size();
  const Eigen::Index n_y = train_y.size();
  const double med1 = median_heuristic_level1(train_x, train_y);

  Eigen::VectorXd wx, wy;
  if (grid.criterion_weighting == Weighting::uniform) {
    wx = uniform_weights(n_x);
    wy = uniform_weights(n_y);
  } else {
    wx = train_x.weights;
    wy = train_y.weights;
  }
  // one aligned index pair for the variance blocks, shared by all cells
  const auto q = static_cast<std::size_t>(std::min(n_x, n_y));
  const std::uint64_t sub_seed = derive_seed(seed, fnv1a("variance-subsample"));
  auto identity_or_subsample = [&](Eigen::Index side, std::uint64_t s) {
    std::vector<Eigen::Index> idx;
    if (static_cast<std::size_t>(side) == q) {
      idx.resize(q);
      for (std::size_t k = 0; k < q; ++k) idx[k] = static_cast<Eigen::Index>(k);
    } else {
      idx = detail::variance_subsample(static_cast<std::size_t>(side), q, s);
    }
    return idx;
  };
  const auto ix = identity_or_subsample(n_x, sub_seed);
  const auto iy = identity_or_subsample(n_y, derive_seed(sub_seed, 1));

  TuningReport report;
  report.seed = seed;
  const std::uint64_t basis_seed = derive_seed(seed, fnv1a("tuning-basis"));
  for (double mult1 : grid.level1_multipliers) {
    const double sigma1 = mult1 * med1;
    const RffBasis basis =
        sample_basis(m, static_cast<int>(train_x.dim()), sigma1, basis_seed);
    Eigen::MatrixXd pooled(n_x + n_y, basis.feature_count());
    pooled.topRows(n_x) = detail::embed_matrix(train_x.sets, basis);
    pooled.bottomRows(n_y) = detail::embed_matrix(train_y.sets, basis);
    const Eigen::MatrixXd d2 = detail::squared_distances(pooled, pooled);
    const double med2_raw = detail::median_of_upper_triangle(d2);
    if (!(med2_raw > 0.0))
      throw degenerate_scale_error("select_params_two_sample: training embeddings coincide");
    const double med2 = med2_raw / 2.0;
    for (double mult2 : grid.level2_multipliers) {
      const double sigma2 = mult2 * med2;
      const Eigen::MatrixXd g = detail::gaussian_gram_from_d2(d2, sigma2);
      const double stat = detail::criterion_numerator_two_sample(g, wx, wy);
      const auto qi = static_cast<Eigen::Index>(q);
      Eigen::MatrixXd kxx(qi, qi), kyy(qi, qi), kxy(qi, qi);
      for (Eigen::Index r = 0; r < qi; ++r)
        for (Eigen::Index c = 0; c < qi; ++c) {
          const Eigen::Index xr = ix[static_cast<std::size_t>(r)];
          const Eigen::Index xc = ix[static_cast<std::size_t>(c)];
          const Eigen::Index yr = n_x + iy[static_cast<std::size_t>(r)];
          const Eigen::Index yc = n_x + iy[static_cast<std::size_t>(c)];
          kxx(r, c) = g(xr, xc);
          kyy(r, c) = g(yr, yc);
          kxy(r, c) = g(xr, yc);
        }
      const double var = mmd_variance_h1(kxx, kyy, kxy);
      TuningRow row;
      row.sigma1_sq = sigma1;
      row.sigma2_sq = sigma2;
      row.mult1 = mult1;
      row.mult2 = mult2;
      row.criterion = stat / (std::sqrt(var) + grid.ridge);
      report.table.push_back(row);
    }
  }
  report.argmax_index = detail::argmax_row(report.table);
  return report;
}

/// Grid selection for the independence test. The level-1 bandwidth is shared
/// by both sides; the K- and L-side level-2 bandwidths scan their own
/// multipliers. Each cell's score is the training statistic's margin over
/// the within-train shuffle threshold, standardized by a pair-level
/// bootstrap spread.
inline TuningReport select_params_independence(const PairedSample& train, const ParamGrid& grid,
                                               int m, int b_inner, std::uint64_t seed) {
  validate(train);
  if (b_inner < 20)
    throw validation_error("select_params_independence: need at least 20 inner replicates");
  if (grid.level1_multipliers.empty() || grid.level2_multipliers.empty())
    throw validation_error("select_params_independence: empty multiplier grid");
  const Eigen::Index n = train.size();
  const double med1 = median_heuristic_level1(train);

  Eigen::VectorXd wx, wy;
  if (grid.criterion_weighting == Weighting::uniform) {
    wx = uniform_weights(n);
    wy = uniform_weights(n);
  } else {
    wx = train.weights_x;
    wy = train.weights_y;
  }

  // permutation and bootstrap draws shared across cells so cells differ
  // only through bandwidths
  std::vector<std::vector<std::uint32_t>> perms(static_cast<std::size_t>(b_inner));
  std::vector<std::vector<std::uint32_t>> boots(static_cast<std::size_t>(b_inner));
  for (int b = 0; b < b_inner; ++b) {
    auto rng = make_engine(derive_seed(seed, fnv1a("tuning-inner-perm"),
                                       static_cast<std::uint64_t>(b)));
    perms[static_cast<std::size_t>(b)] =
        detail::random_permutation(static_cast<std::size_t>(n), rng);
    auto boot_rng = make_engine(derive_seed(seed, fnv1a("tuning-inner-boot"),
                                            static_cast<std::uint64_t>(b)));
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
    auto& draw = boots[static_cast<std::size_t>(b)];
    draw.resize(static_cast<std::size_t>(n));
    for (auto& v : draw) v = pick(boot_rng);
  }

  TuningReport report;
  report.seed = seed;
  const std::uint64_t basis_seed_x = derive_seed(seed, fnv1a("tuning-basis-x"));
  const std::uint64_t basis_seed_y = derive_seed(seed, fnv1a("tuning-basis-y"));
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  for (double mult1 : grid.level1_multipliers) {
    const double sigma1 = mult1 * med1;
    const RffBasis basis_x =
        sample_basis(m, static_cast<int>(train.dim_x()), sigma1, basis_seed_x);
    const RffBasis basis_y =
        sample_basis(m, static_cast<int>(train.dim_y()), sigma1, basis_seed_y);
    const Eigen::MatrixXd ex = detail::embed_matrix(train.x_sets, basis_x);
    const Eigen::MatrixXd ey = detail::embed_matrix(train.y_sets, basis_y);
    const Eigen::MatrixXd dx = detail::squared_distances(ex, ex);
    const Eigen::MatrixXd dy = detail::squared_distances(ey, ey);
    const double med_k_raw = detail::median_of_upper_triangle(dx);
    const double med_l_raw = detail::median_of_upper_triangle(dy);
    if (!(med_k_raw > 0.0) || !(med_l_raw > 0.0))
      throw degenerate_scale_error("select_params_independence: training embeddings coincide");
    for (double mult_k : grid.level2_multipliers) {
      const double sigma_k = mult_k * med_k_raw / 2.0;
      const Eigen::MatrixXd khat = detail::gaussian_gram_from_d2(dx, sigma_k)
                                       .cwiseProduct(wx * wx.transpose());
      const Eigen::MatrixXd centered_k = detail::center_gram(khat);
      for (double mult_l : grid.level2_multipliers) {
        const double sigma_l = mult_l * med_l_raw / 2.0;
        const Eigen::MatrixXd lhat = detail::gaussian_gram_from_d2(dy, sigma_l)
                                         .cwiseProduct(wy * wy.transpose());
        const double observed = nn * centered_k.cwiseProduct(lhat).sum();
        // shuffle replicates give the rejection threshold the test will use
        std::vector<double> replicates(static_cast<std::size_t>(b_inner));
        for (int b = 0; b < b_inner; ++b) {
          const auto& pi = perms[static_cast<std::size_t>(b)];
          double acc = 0.0;
          for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
              acc += centered_k(i, j) *
                     lhat(pi[static_cast<std::size_t>(i)], pi[static_cast<std::size_t>(j)]);
          replicates[static_cast<std::size_t>(b)] = nn * acc;
        }
        const auto upper_index = static_cast<std::size_t>(
            std::min<double>(b_inner - 1, std::floor(0.95 * b_inner)));
        std::nth_element(replicates.begin(),
                         replicates.begin() + static_cast<std::ptrdiff_t>(upper_index),
                         replicates.end());
        const double threshold = replicates[upper_index];
        // pair-level bootstrap estimates the statistic's spread under the
        // alternative, which is what limits power; the shuffle spread only
        // describes the null and misranks wide kernels
        double boot_mean = 0.0, boot_sq = 0.0;
        for (int b = 0; b < b_inner; ++b) {
          const auto& idx = boots[static_cast<std::size_t>(b)];
          const double rep = detail::gathered_hsic(khat, lhat, idx);
          boot_mean += rep;
          boot_sq += rep * rep;
        }
        boot_mean /= b_inner;
        const double boot_var =
            std::max(0.0, (boot_sq - b_inner * boot_mean * boot_mean) / (b_inner - 1));
        TuningRow row;
        row.sigma1_sq = sigma1;
        row.sigma2_sq = sigma_k;
        row.sigma_l_sq = sigma_l;
        row.mult1 = mult1;
        row.mult2 = mult_k;
        row.mult_l = mult_l;
        row.criterion = (observed - threshold) / (std::sqrt(boot_var) + grid.ridge);
        report.table.push_back(row);
      }
    }
  }
  report.argmax_index = detail::argmax_row(report.table);
  return report;
}

}  // namespace settest
