#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "settest/baselines.hpp"
#include "settest/pipeline.hpp"
#include "settest/synthetic.hpp"

namespace settest {

/// One sweep of (method x parameter value) cells, each repeated for a number
/// of independently seeded trials.
struct BenchmarkSpec {
  std::string problem = "two_sample";  // "two_sample" | "independence"
  std::string sweep_name = "amplitude_difference";
  std::vector<double> sweep_values;
  int trials = 200;
  int n_sets = 100;
  std::array<int, 2> set_size_range{5, 50};
  double alpha = 0.05;
  int permutations = 200;
  int features = 50;
  std::vector<std::string> methods;
  std::uint64_t seed = 0;
  // two-sample design parameters
  double amplitude = 1.0;
  double baseline_variance = 0.1;
  double invgamma_shape = 3.0;
  double amplitude_difference = 0.25;  // fixed offset used by the dimension sweep
  std::vector<std::pair<double, int>> size_mixture;
  // independence design parameters
  double noise = 0.2;
  std::string link = "random";  // per-trial random draw, or a fixed link name
  bool dependent = true;
  int dims = 1;
  // pipeline settings
  ParamGrid grid;
  bool tune = true;
  int b_inner = 50;
  int grid_size = 20;  // spline grid for the fixed-dimensional baselines
  bool measure_wall_time = false;
  int threads = 0;
};

struct BenchmarkRow {
  std::string method;
  std::string sweep_param;
  double sweep_value = 0.0;
  double rejection_rate = 0.0;
  double standard_error = 0.0;
  int trials = 0;
  double wall_time_seconds = 0.0;
  int successes = 0;
  int failures = 0;
};

inline const std::vector<std::string>& valid_methods(const std::string& problem) {
  static const std::vector<std::string> two_sample{"rmmd", "rmmd_unweighted", "fixed_mmd"};
  static const std::vector<std::string> independence{"rhsic", "rhsic_unweighted",
                                                     "fixed_hsic", "pcc"};
  if (problem == "two_sample") return two_sample;
  if (problem == "independence") return independence;
  throw validation_error("unknown problem '" + problem +
                         "' (two_sample, independence)");
}

inline void validate(const BenchmarkSpec& spec) {
  const auto& methods = valid_methods(spec.problem);
  if (spec.methods.empty()) throw validation_error("benchmark spec: no methods given");
  for (const auto& m : spec.methods) {
    if (std::find(methods.begin(), methods.end(), m) == methods.end()) {
      std::string valid;
      for (const auto& v : methods) valid += (valid.empty() ? "" : ", ") + v;
      throw validation_error("unknown method '" + m + "' for problem '" + spec.problem +
                             "' (valid: " + valid + ")");
    }
  }
  const bool two_sample = spec.problem == "two_sample";
  const std::vector<std::string> sweeps =
      two_sample ? std::vector<std::string>{"amplitude_difference", "variance_difference",
                                            "dimension"}
                 : std::vector<std::string>{"sigma", "dimension"};
  if (std::find(sweeps.begin(), sweeps.end(), spec.sweep_name) == sweeps.end()) {
    std::string valid;
    for (const auto& v : sweeps) valid += (valid.empty() ? "" : ", ") + v;
    throw validation_error("unknown sweep '" + spec.sweep_name + "' for problem '" +
                           spec.problem + "' (valid: " + valid + ")");
  }
  if (spec.sweep_values.empty()) throw validation_error("benchmark spec: no sweep values");
  if (spec.trials < 1) throw validation_error("benchmark spec: trials must be at least 1");
  if (spec.link != "random") parse_link(spec.link);  // throws on bad names
}

namespace detail {

inline std::vector<GridSeries> grids_of(const std::vector<ObservationSet>& sets,
                                        int grid_size) {
  std::vector<GridSeries> out;
  out.reserve(sets.size());
  for (const auto& s : sets) out.push_back(spline_to_grid(s, grid_size));
  return out;
}

inline std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(
    std::size_t n, double fraction, std::uint64_t seed) {
  const auto n_train =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction));
  if (n_train < 2 || n - n_train < 2)
    throw validation_error("split: parts too small (need at least 2 series each)");
  auto rng = make_engine(derive_seed(seed, fnv1a("split")));
  const auto order = random_permutation(n, rng);
  return {sorted_subset(order, 0, n_train), sorted_subset(order, n_train, n)};
}

template <typename T>
std::vector<T> take(const std::vector<T>& items, const std::vector<Eigen::Index>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(items[static_cast<std::size_t>(i)]);
  return out;
}

/// Bandwidth selection and held-out testing for the fixed-grid MMD baseline,
/// using the same power proxy as the embedded pipeline.
inline TestResult fixed_mmd_pipeline(const std::vector<GridSeries>& grids_x,
                                     const std::vector<GridSeries>& grids_y,
                                     const ParamGrid& grid, bool tune, int b, double alpha,
                                     std::uint64_t seed, int threads) {
  if (!tune) {
    const Eigen::MatrixXd pooled = stack_grids(grids_x, "fixed_mmd (x)");
    const Eigen::MatrixXd pooled_y = stack_grids(grids_y, "fixed_mmd (y)");
    Eigen::MatrixXd all(pooled.rows() + pooled_y.rows(), pooled.cols());
    all.topRows(pooled.rows()) = pooled;
    all.bottomRows(pooled_y.rows()) = pooled_y;
    const double med = median_sq_distance(all, kDefaultMaxHeuristicPairs, 0);
    if (!(med > 0.0)) throw degenerate_scale_error("fixed_mmd: all grid vectors coincide");
    return fixed_mmd_test(grids_x, grids_y, med / 2.0, b, alpha,
                          derive_seed(seed, fnv1a("fixed-null")), threads);
  }
  const auto [train_ix, test_ix] =
      split_indices(grids_x.size(), grid.split_fraction, derive_seed(seed, fnv1a("fx")));
  const auto [train_iy, test_iy] =
      split_indices(grids_y.size(), grid.split_fraction, derive_seed(seed, fnv1a("fy")));
  const auto train_x = take(grids_x, train_ix);
  const auto train_y = take(grids_y, train_iy);
  const Eigen::MatrixXd tx = stack_grids(train_x, "fixed_mmd (train x)");
  const Eigen::MatrixXd ty = stack_grids(train_y, "fixed_mmd (train y)");
  Eigen::MatrixXd pooled(tx.rows() + ty.rows(), tx.cols());
  pooled.topRows(tx.rows()) = tx;
  pooled.bottomRows(ty.rows()) = ty;
  const Eigen::MatrixXd d2 = squared_distances(pooled, pooled);
  const double med_raw = median_of_upper_triangle(d2);
  if (!(med_raw > 0.0))
    throw degenerate_scale_error("fixed_mmd: training grid vectors coincide");
  const Eigen::Index n_x = tx.rows(), n_y = ty.rows();
  const Eigen::VectorXd wx = uniform_weights(n_x);
  const Eigen::VectorXd wy = uniform_weights(n_y);
  const auto q = static_cast<Eigen::Index>(std::min(n_x, n_y));

  double best_sigma = 0.0, best_criterion = 0.0, best_mult = 0.0;
  bool have_best = false;
  for (double mult : grid.level2_multipliers) {
    const double sigma = mult * med_raw / 2.0;
    const Eigen::MatrixXd g = gaussian_gram_from_d2(d2, sigma);
    const double stat = criterion_numerator_two_sample(g, wx, wy);
    const Eigen::MatrixXd kxx = g.topLeftCorner(q, q);
    const Eigen::MatrixXd kyy = g.block(n_x, n_x, q, q);
    const Eigen::MatrixXd kxy = g.block(0, n_x, q, q);
    const double criterion = stat / (std::sqrt(mmd_variance_h1(kxx, kyy, kxy)) + grid.ridge);
    const bool better =
        !have_best || criterion > best_criterion ||
        (criterion == best_criterion &&
         std::abs(std::log2(mult)) < std::abs(std::log2(best_mult)));
    if (better) {
      best_sigma = sigma;
      best_criterion = criterion;
      best_mult = mult;
      have_best = true;
    }
  }
  return fixed_mmd_test(take(grids_x, test_ix), take(grids_y, test_iy), best_sigma, b, alpha,
                        derive_seed(seed, fnv1a("fixed-null")), threads);
}

/// Same idea for the fixed-grid HSIC baseline; the criterion divides by the
/// spread of within-train shuffle replicates.
inline TestResult fixed_hsic_pipeline(const std::vector<GridSeries>& grids_x,
                                      const std::vector<GridSeries>& grids_y,
                                      const ParamGrid& grid, bool tune, int b, int b_inner,
                                      double alpha, std::uint64_t seed, int threads) {
  if (grids_x.size() != grids_y.size())
    throw validation_error("fixed_hsic: need one y series per x series");
  if (!tune) {
    const Eigen::MatrixXd x = stack_grids(grids_x, "fixed_hsic (x)");
    const Eigen::MatrixXd y = stack_grids(grids_y, "fixed_hsic (y)");
    const double med_k = median_sq_distance(x, kDefaultMaxHeuristicPairs, 0);
    const double med_l = median_sq_distance(y, kDefaultMaxHeuristicPairs, 0);
    if (!(med_k > 0.0) || !(med_l > 0.0))
      throw degenerate_scale_error("fixed_hsic: all grid vectors coincide");
    return fixed_hsic_test(grids_x, grids_y, med_k / 2.0, med_l / 2.0, b, alpha,
                           derive_seed(seed, fnv1a("fixed-null")), threads);
  }
  const auto [train_idx, test_idx] =
      split_indices(grids_x.size(), grid.split_fraction, derive_seed(seed, fnv1a("fp")));
  const Eigen::MatrixXd tx = stack_grids(take(grids_x, train_idx), "fixed_hsic (train x)");
  const Eigen::MatrixXd ty = stack_grids(take(grids_y, train_idx), "fixed_hsic (train y)");
  const Eigen::Index n = tx.rows();
  const Eigen::MatrixXd dx = squared_distances(tx, tx);
  const Eigen::MatrixXd dy = squared_distances(ty, ty);
  const double med_k_raw = median_of_upper_triangle(dx);
  const double med_l_raw = median_of_upper_triangle(dy);
  if (!(med_k_raw > 0.0) || !(med_l_raw > 0.0))
    throw degenerate_scale_error("fixed_hsic: training grid vectors coincide");
  std::vector<std::vector<std::uint32_t>> perms(static_cast<std::size_t>(b_inner));
  std::vector<std::vector<std::uint32_t>> boots(static_cast<std::size_t>(b_inner));
  for (int rep = 0; rep < b_inner; ++rep) {
    auto rng = make_engine(derive_seed(seed, fnv1a("fixed-inner-perm"),
                                       static_cast<std::uint64_t>(rep)));
    perms[static_cast<std::size_t>(rep)] =
        random_permutation(static_cast<std::size_t>(n), rng);
    auto boot_rng = make_engine(derive_seed(seed, fnv1a("fixed-inner-boot"),
                                            static_cast<std::uint64_t>(rep)));
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
    auto& draw = boots[static_cast<std::size_t>(rep)];
    draw.resize(static_cast<std::size_t>(n));
    for (auto& v : draw) v = pick(boot_rng);
  }
  const double inv_nn = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  double best_k = 0.0, best_l = 0.0, best_criterion = 0.0, best_dist = 0.0;
  bool have_best = false;
  for (double mult_k : grid.level2_multipliers) {
    const double sigma_k = mult_k * med_k_raw / 2.0;
    const Eigen::MatrixXd khat = gaussian_gram_from_d2(dx, sigma_k) * inv_nn;
    const Eigen::MatrixXd centered_k = center_gram(khat);
    for (double mult_l : grid.level2_multipliers) {
      const double sigma_l = mult_l * med_l_raw / 2.0;
      const Eigen::MatrixXd lhat = gaussian_gram_from_d2(dy, sigma_l) * inv_nn;
      const double nn = static_cast<double>(n) * static_cast<double>(n);
      const double observed = nn * centered_k.cwiseProduct(lhat).sum();
      std::vector<double> replicates(static_cast<std::size_t>(b_inner));
      for (int rep = 0; rep < b_inner; ++rep) {
        const auto& pi = perms[static_cast<std::size_t>(rep)];
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j)
            acc += centered_k(i, j) *
                   lhat(pi[static_cast<std::size_t>(i)], pi[static_cast<std::size_t>(j)]);
        replicates[static_cast<std::size_t>(rep)] = nn * acc;
      }
      const auto upper_index = static_cast<std::size_t>(
          std::min<double>(b_inner - 1, std::floor(0.95 * b_inner)));
      std::nth_element(replicates.begin(),
                       replicates.begin() + static_cast<std::ptrdiff_t>(upper_index),
                       replicates.end());
      double boot_mean = 0.0, boot_sq = 0.0;
      for (int rep = 0; rep < b_inner; ++rep) {
        const double rep_val = gathered_hsic(khat, lhat, boots[static_cast<std::size_t>(rep)]);
        boot_mean += rep_val;
        boot_sq += rep_val * rep_val;
      }
      boot_mean /= b_inner;
      const double boot_var =
          std::max(0.0, (boot_sq - b_inner * boot_mean * boot_mean) / (b_inner - 1));
      const double criterion =
          (observed - replicates[upper_index]) / (std::sqrt(boot_var) + grid.ridge);
      const double dist = std::abs(std::log2(mult_k)) + std::abs(std::log2(mult_l));
      const bool better = !have_best || criterion > best_criterion ||
                          (criterion == best_criterion && dist < best_dist);
      if (better) {
        best_k = sigma_k;
        best_l = sigma_l;
        best_criterion = criterion;
        best_dist = dist;
        have_best = true;
      }
    }
  }
  return fixed_hsic_test(take(grids_x, test_idx), take(grids_y, test_idx), best_k, best_l, b,
                         alpha, derive_seed(seed, fnv1a("fixed-null")), threads);
}

inline bool run_two_sample_trial(const BenchmarkSpec& spec, const std::string& method,
                                 double value, std::uint64_t trial_seed) {
  TwoSampleDesign dx;
  dx.amplitude = spec.amplitude;
  dx.baseline_variance = spec.baseline_variance;
  dx.invgamma_shape = spec.invgamma_shape;
  dx.n_sets = spec.n_sets;
  dx.set_size_range = spec.set_size_range;
  dx.dims = spec.dims;
  dx.size_mixture = spec.size_mixture;
  TwoSampleDesign dy = dx;
  if (spec.sweep_name == "amplitude_difference") {
    dy.amplitude = spec.amplitude + value;
  } else if (spec.sweep_name == "variance_difference") {
    dy.baseline_variance = spec.baseline_variance + value;
  } else {  // dimension
    dx.dims = dy.dims = static_cast<int>(value);
    dy.amplitude = spec.amplitude + spec.amplitude_difference;
  }
  dx.seed = derive_seed(trial_seed, fnv1a("design-x"));
  dy.seed = derive_seed(trial_seed, fnv1a("design-y"));
  const Sample x = gen_two_sample(dx);
  const Sample y = gen_two_sample(dy);

  if (method == "fixed_mmd") {
    const auto gx = grids_of(x.sets, spec.grid_size);
    const auto gy = grids_of(y.sets, spec.grid_size);
    return fixed_mmd_pipeline(gx, gy, spec.grid, spec.tune, spec.permutations, spec.alpha,
                              derive_seed(trial_seed, fnv1a("test")), 1)
        .reject;
  }
  TestConfig config;
  config.alpha = spec.alpha;
  config.permutations = spec.permutations;
  config.features = spec.features;
  config.grid = spec.grid;
  config.weighting =
      method == "rmmd_unweighted" ? Weighting::uniform : Weighting::set_size;
  config.tune = spec.tune;
  config.seed = derive_seed(trial_seed, fnv1a("test"));
  config.threads = 1;
  return run_two_sample_test(x, y, config).reject;
}

inline bool run_independence_trial(const BenchmarkSpec& spec, const std::string& method,
                                   double value, std::uint64_t trial_seed) {
  IndependenceDesign design;
  design.noise = spec.noise;
  design.n_sets = spec.n_sets;
  design.set_size_range = spec.set_size_range;
  design.dims = spec.dims;
  if (spec.sweep_name == "sigma")
    design.noise = value;
  else  // dimension
    design.dims = static_cast<int>(value);
  if (spec.link == "random") {
    auto rng = make_engine(derive_seed(trial_seed, fnv1a("link")));
    std::uniform_int_distribution<int> pick(0, 3);
    design.link = static_cast<LinkFn>(pick(rng));
  } else {
    design.link = parse_link(spec.link);
  }
  design.seed = derive_seed(trial_seed, fnv1a("design"));
  const PairedSample pairs = gen_independence(design, spec.dependent);

  if (method == "pcc") {
    Eigen::VectorXd sx(pairs.size()), sy(pairs.size());
    for (Eigen::Index i = 0; i < pairs.size(); ++i) {
      sx(i) = grid_mean_summary(
          spline_to_grid(pairs.x_sets[static_cast<std::size_t>(i)], spec.grid_size));
      sy(i) = grid_mean_summary(
          spline_to_grid(pairs.y_sets[static_cast<std::size_t>(i)], spec.grid_size));
    }
    return pcc_perm_test(sx, sy, spec.permutations, spec.alpha,
                         derive_seed(trial_seed, fnv1a("test")))
        .reject;
  }
  if (method == "fixed_hsic") {
    const auto gx = grids_of(pairs.x_sets, spec.grid_size);
    const auto gy = grids_of(pairs.y_sets, spec.grid_size);
    return fixed_hsic_pipeline(gx, gy, spec.grid, spec.tune, spec.permutations, spec.b_inner,
                               spec.alpha, derive_seed(trial_seed, fnv1a("test")), 1)
        .reject;
  }
  TestConfig config;
  config.alpha = spec.alpha;
  config.permutations = spec.permutations;
  config.features = spec.features;
  config.grid = spec.grid;
  config.weighting =
      method == "rhsic_unweighted" ? Weighting::uniform : Weighting::set_size;
  config.tune = spec.tune;
  config.b_inner = spec.b_inner;
  config.seed = derive_seed(trial_seed, fnv1a("test"));
  config.threads = 1;
  return run_independence_test(pairs, config).reject;
}

}  // namespace detail

/// Runs every (method, sweep value) cell for the requested number of trials.
/// Trial seeds derive from (seed, method, value, trial index), so any cell
/// can be reproduced in isolation. Per-trial failures are excluded from the
/// rejection rate and reported in the row's failure count.
inline std::vector<BenchmarkRow> run_benchmark(
    const BenchmarkSpec& spec,
    const std::function<void(const BenchmarkRow&)>& on_cell = nullptr) {
  validate(spec);
  const bool two_sample = spec.problem == "two_sample";
  std::vector<BenchmarkRow> rows;
  rows.reserve(spec.methods.size() * spec.sweep_values.size());
  for (const auto& method : spec.methods) {
    for (const double value : spec.sweep_values) {
      const auto start = std::chrono::steady_clock::now();
      std::vector<signed char> outcomes(static_cast<std::size_t>(spec.trials), -1);
      parallel_for(
          static_cast<std::size_t>(spec.trials),
          [&](std::size_t trial) {
            const std::uint64_t trial_seed =
                derive_seed(spec.seed, fnv1a(method), seed_bits(value),
                            static_cast<std::uint64_t>(trial));
            try {
              const bool reject =
                  two_sample
                      ? detail::run_two_sample_trial(spec, method, value, trial_seed)
                      : detail::run_independence_trial(spec, method, value, trial_seed);
              outcomes[trial] = reject ? 1 : 0;
            } catch (const std::exception&) {
              outcomes[trial] = -1;
            }
          },
          spec.threads);
      BenchmarkRow row;
      row.method = method;
      row.sweep_param = spec.sweep_name;
      row.sweep_value = value;
      row.trials = spec.trials;
      for (const signed char o : outcomes) {
        if (o < 0) {
          ++row.failures;
        } else {
          ++row.successes;
          if (o == 1) row.rejection_rate += 1.0;
        }
      }
      if (row.successes == 0)
        throw validation_error("benchmark cell '" + method + "' failed on every trial");
      row.rejection_rate /= static_cast<double>(row.successes);
      row.standard_error = std::sqrt(row.rejection_rate * (1.0 - row.rejection_rate) /
                                     static_cast<double>(row.trials));
      if (spec.measure_wall_time)
        row.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (on_cell) on_cell(row);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// CSV with one row per cell in (method, sweep value) order. Wall time stays
/// 0 unless the spec asked for measurement, so default output is
/// byte-reproducible.
inline void write_csv(const std::vector<BenchmarkRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << "method,sweep_param,sweep_value,rejection_rate,standard_error,trials,"
         "wall_time_seconds\n";
  char buffer[256];
  for (const auto& row : rows) {
    std::snprintf(buffer, sizeof(buffer), "%s,%s,%.10g,%.10g,%.10g,%d,%.6f\n",
                  row.method.c_str(), row.sweep_param.c_str(), row.sweep_value,
                  row.rejection_rate, row.standard_error, row.trials,
                  row.wall_time_seconds);
    out << buffer;
  }
}

/// JSON mirror of the CSV, with the success/failure accounting included.
inline void write_rows_json(const std::vector<BenchmarkRow>& rows, const std::string& path) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json o;
    o["method"] = row.method;
    o["sweep_param"] = row.sweep_param;
    o["sweep_value"] = row.sweep_value;
    o["rejection_rate"] = row.rejection_rate;
    o["standard_error"] = row.standard_error;
    o["trials"] = row.trials;
    o["wall_time_seconds"] = row.wall_time_seconds;
    o["successes"] = row.successes;
    o["failures"] = row.failures;
    arr.push_back(std::move(o));
  }
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << arr.dump(2) << '\n';
}

/// Parses a benchmark spec from its JSON form; unknown keys are rejected so
/// typos fail loudly.
inline BenchmarkSpec benchmark_spec_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{
      "problem",        "sweep",       "trials",          "n_sets",
      "set_size_range", "alpha",       "permutations",    "features",
      "methods",        "seed",        "amplitude",       "baseline_variance",
      "invgamma_shape", "amplitude_difference",           "size_mixture",
      "noise",          "link",        "dependent",       "dims",
      "level1_multipliers", "level2_multipliers", "split_fraction",
      "tune",           "b_inner",     "grid_size",       "measure_wall_time",
      "threads"};
  if (!j.is_object()) throw validation_error("benchmark spec must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw validation_error("benchmark spec: unknown key '" + key + "'");
  BenchmarkSpec spec;
  if (j.contains("problem")) spec.problem = j["problem"].get<std::string>();
  if (j.contains("sweep")) {
    const auto& sweep = j["sweep"];
    if (!sweep.is_object() || !sweep.contains("name") || !sweep.contains("values"))
      throw validation_error("benchmark spec: 'sweep' needs 'name' and 'values'");
    spec.sweep_name = sweep["name"].get<std::string>();
    spec.sweep_values = sweep["values"].get<std::vector<double>>();
  }
  if (j.contains("trials")) spec.trials = j["trials"].get<int>();
  if (j.contains("n_sets")) spec.n_sets = j["n_sets"].get<int>();
  if (j.contains("set_size_range")) {
    const auto range = j["set_size_range"].get<std::vector<int>>();
    if (range.size() != 2) throw validation_error("set_size_range must be [low, high]");
    spec.set_size_range = {range[0], range[1]};
  }
  if (j.contains("alpha")) spec.alpha = j["alpha"].get<double>();
  if (j.contains("permutations")) spec.permutations = j["permutations"].get<int>();
  if (j.contains("features")) spec.features = j["features"].get<int>();
  if (j.contains("methods")) spec.methods = j["methods"].get<std::vector<std::string>>();
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("amplitude")) spec.amplitude = j["amplitude"].get<double>();
  if (j.contains("baseline_variance"))
    spec.baseline_variance = j["baseline_variance"].get<double>();
  if (j.contains("invgamma_shape")) spec.invgamma_shape = j["invgamma_shape"].get<double>();
  if (j.contains("amplitude_difference"))
    spec.amplitude_difference = j["amplitude_difference"].get<double>();
  if (j.contains("size_mixture")) {
    for (const auto& bucket : j["size_mixture"]) {
      if (!bucket.is_array() || bucket.size() != 2)
        throw validation_error("size_mixture entries must be [probability, size]");
      spec.size_mixture.emplace_back(bucket[0].get<double>(), bucket[1].get<int>());
    }
  }
  if (j.contains("noise")) spec.noise = j["noise"].get<double>();
  if (j.contains("link")) spec.link = j["link"].get<std::string>();
  if (j.contains("dependent")) spec.dependent = j["dependent"].get<bool>();
  if (j.contains("dims")) spec.dims = j["dims"].get<int>();
  if (j.contains("level1_multipliers"))
    spec.grid.level1_multipliers = j["level1_multipliers"].get<std::vector<double>>();
  if (j.contains("level2_multipliers"))
    spec.grid.level2_multipliers = j["level2_multipliers"].get<std::vector<double>>();
  if (j.contains("split_fraction")) spec.grid.split_fraction = j["split_fraction"].get<double>();
  if (j.contains("tune")) spec.tune = j["tune"].get<bool>();
  if (j.contains("b_inner")) spec.b_inner = j["b_inner"].get<int>();
  if (j.contains("grid_size")) spec.grid_size = j["grid_size"].get<int>();
  if (j.contains("measure_wall_time"))
    spec.measure_wall_time = j["measure_wall_time"].get<bool>();
  if (j.contains("threads")) spec.threads = j["threads"].get<int>();
  validate(spec);
  return spec;
}

}  // namespace settest
