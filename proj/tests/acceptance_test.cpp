// Acceptance suite: end-to-end calibration, oracle and trend checks at desk
// scale, plus CLI reproducibility. Each test prints one PASS/FAIL line.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <settest/settest.hpp>

#include "test_helpers.hpp"

using namespace settest;

namespace {

constexpr int kTrials = 200;
constexpr int kSets = 100;
constexpr int kPermutations = 200;
constexpr int kFeatures = 50;
constexpr double kAlpha = 0.05;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[criterion %2d] %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

TestConfig pipeline_config(std::uint64_t seed, Weighting weighting = Weighting::set_size) {
  TestConfig config;
  config.alpha = kAlpha;
  config.permutations = kPermutations;
  config.features = kFeatures;
  config.weighting = weighting;
  config.seed = seed;
  config.threads = 1;
  return config;
}

TwoSampleDesign base_design() {
  TwoSampleDesign design;
  design.amplitude = 1.0;
  design.baseline_variance = 0.1;
  design.invgamma_shape = 3.0;
  design.n_sets = kSets;
  design.set_size_range = {5, 50};
  return design;
}

/// Tuned two-sample pipeline p-values under a given amplitude difference.
std::vector<double> two_sample_pvalues(double amplitude_difference, std::uint64_t master,
                                       int trials = kTrials) {
  std::vector<double> pvalues(static_cast<std::size_t>(trials));
  parallel_for(
      static_cast<std::size_t>(trials),
      [&](std::size_t trial) {
        const std::uint64_t trial_seed = derive_seed(master, static_cast<std::uint64_t>(trial));
        TwoSampleDesign dx = base_design();
        dx.seed = derive_seed(trial_seed, fnv1a("design-x"));
        TwoSampleDesign dy = base_design();
        dy.amplitude += amplitude_difference;
        dy.seed = derive_seed(trial_seed, fnv1a("design-y"));
        const auto result = run_two_sample_test(
            gen_two_sample(dx), gen_two_sample(dy),
            pipeline_config(derive_seed(trial_seed, fnv1a("test"))));
        pvalues[trial] = result.p_value;
      },
      0);
  return pvalues;
}

const std::vector<double>& h0_pvalues() {
  static const std::vector<double> pvalues = two_sample_pvalues(0.0, 20260813);
  return pvalues;
}

/// One harness sweep shared by criteria 1 and 3: the null cell plus the two
/// alternative cells.
const std::vector<BenchmarkRow>& two_sample_power_rows() {
  static const std::vector<BenchmarkRow> rows = [] {
    BenchmarkSpec spec;
    spec.problem = "two_sample";
    spec.sweep_name = "amplitude_difference";
    spec.sweep_values = {0.0, 0.25, 0.5};
    spec.trials = kTrials;
    spec.n_sets = kSets;
    spec.set_size_range = {5, 50};
    spec.alpha = kAlpha;
    spec.permutations = kPermutations;
    spec.features = kFeatures;
    spec.methods = {"rmmd"};
    spec.seed = 20260801;
    spec.baseline_variance = 0.1;
    return run_benchmark(spec);
  }();
  return rows;
}

double standard_error(double rate, int trials) {
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
}

const std::string cli = SETTEST_CLI_PATH;

int run_cli(const std::string& args) {
  const int status = std::system((cli + " " + args + " 2>/dev/null").c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("criterion 1: two-sample Type-I calibration") {
  const auto& rows = two_sample_power_rows();
  const double rate = rows.at(0).rejection_rate;
  const bool pass = rate >= 0.01 && rate <= 0.10 && rows.at(0).failures == 0;
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "RMMD rejection rate %.3f under the null (band [0.01, 0.10], %d trials)", rate,
                kTrials);
  report(1, pass, detail);
  REQUIRE(pass);
}

TEST_CASE("criterion 2: independence Type-I calibration") {
  BenchmarkSpec spec;
  spec.problem = "independence";
  spec.sweep_name = "sigma";
  spec.sweep_values = {0.2};
  spec.trials = kTrials;
  spec.n_sets = kSets;
  spec.set_size_range = {5, 50};
  spec.alpha = kAlpha;
  spec.permutations = kPermutations;
  spec.features = kFeatures;
  spec.methods = {"rhsic"};
  spec.seed = 20260802;
  spec.link = "random";
  spec.dependent = false;  // severed pairing
  const auto rows = run_benchmark(spec);
  const double rate = rows.at(0).rejection_rate;
  const bool pass = rate >= 0.01 && rate <= 0.10 && rows.at(0).failures == 0;
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "RHSIC rejection rate %.3f under severed pairing (band [0.01, 0.10])", rate);
  report(2, pass, detail);
  REQUIRE(pass);
}

TEST_CASE("criterion 3: two-sample power trend over amplitude differences") {
  const auto& rows = two_sample_power_rows();
  const double r0 = rows.at(0).rejection_rate;
  const double r1 = rows.at(1).rejection_rate;
  const double r2 = rows.at(2).rejection_rate;
  auto pair_se = [&](double a, double b) {
    return std::sqrt(standard_error(a, kTrials) * standard_error(a, kTrials) +
                     standard_error(b, kTrials) * standard_error(b, kTrials));
  };
  const bool nondecreasing =
      r1 >= r0 - 2.0 * pair_se(r0, r1) && r2 >= r1 - 2.0 * pair_se(r1, r2);
  const bool strong = r2 >= 0.8;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "power at differences {0, 0.25, 0.5} = {%.3f, %.3f, %.3f}; need nondecreasing "
                "and >= 0.8 at 0.5",
                r0, r1, r2);
  report(3, nondecreasing && strong, detail);
  REQUIRE(nondecreasing);
  REQUIRE(strong);
}

TEST_CASE("criterion 4: independence power trend over noise") {
  BenchmarkSpec spec;
  spec.problem = "independence";
  spec.sweep_name = "sigma";
  spec.sweep_values = {0.2, 0.6, 1.0};
  spec.trials = kTrials;
  spec.n_sets = kSets;
  spec.set_size_range = {5, 50};
  spec.alpha = kAlpha;
  spec.permutations = kPermutations;
  spec.features = kFeatures;
  spec.methods = {"rhsic"};
  spec.seed = 20260805;
  spec.link = "square";
  spec.dependent = true;
  const auto rows = run_benchmark(spec);
  const double r0 = rows.at(0).rejection_rate;
  const double r1 = rows.at(1).rejection_rate;
  const double r2 = rows.at(2).rejection_rate;
  auto pair_se = [&](double a, double b) {
    return std::sqrt(standard_error(a, kTrials) * standard_error(a, kTrials) +
                     standard_error(b, kTrials) * standard_error(b, kTrials));
  };
  const bool nonincreasing =
      r1 <= r0 + 2.0 * pair_se(r0, r1) && r2 <= r1 + 2.0 * pair_se(r1, r2);
  const bool strong = r0 >= 0.8;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "power at sigma {0.2, 0.6, 1.0} = {%.3f, %.3f, %.3f}; need nonincreasing and "
                ">= 0.8 at 0.2",
                r0, r1, r2);
  report(4, nonincreasing && strong, detail);
  REQUIRE(nonincreasing);
  REQUIRE(strong);
}

TEST_CASE("criterion 5: RMMD oracle equivalence") {
  // triple-loop evaluation of the weighted sum
  double worst_loop = 0.0;
  auto rng = make_engine(20260806);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<int> pick_n(5, 20);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (int problem = 0; problem < 20; ++problem) {
    const int n = pick_n(rng);
    EmbeddedSample x, y;
    x.embeddings.resize(n, 12);
    y.embeddings.resize(n, 12);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < 12; ++k) {
        x.embeddings(i, k) = 0.4 * gauss(rng);
        y.embeddings(i, k) = 0.4 * gauss(rng);
      }
    Eigen::VectorXd wx(n), wy(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      wx(i) = unif(rng);
      wy(i) = unif(rng);
    }
    x.weights = wx / wx.sum();
    y.weights = wy / wy.sum();
    x.basis_fingerprint = y.basis_fingerprint = 1;
    const double fast = rmmd2(x, y, 0.9).value;
    double loop = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        loop += x.weights(i) * x.weights(j) *
                gaussian_kernel(x.embeddings.row(i), x.embeddings.row(j), 0.9);
        loop += y.weights(i) * y.weights(j) *
                gaussian_kernel(y.embeddings.row(i), y.embeddings.row(j), 0.9);
        loop -= 2.0 * x.weights(i) * y.weights(j) *
                gaussian_kernel(x.embeddings.row(i), y.embeddings.row(j), 0.9);
      }
    worst_loop = std::max(worst_loop, std::abs(fast - loop));
  }

  // singleton sets against the exact composed-kernel oracle
  double worst_composed = 0.0;
  for (int problem = 0; problem < 20; ++problem) {
    Eigen::MatrixXd px(20, 1), py(20, 1);
    for (int i = 0; i < 20; ++i) {
      px(i, 0) = gauss(rng);
      py(i, 0) = gauss(rng);
    }
    const auto basis =
        sample_basis(5000, 1, 1.0, derive_seed(20260807, static_cast<std::uint64_t>(problem)));
    auto embed_points = [&](const Eigen::MatrixXd& points) {
      EmbeddedSample e;
      e.embeddings.resize(points.rows(), 5000);
      for (Eigen::Index i = 0; i < points.rows(); ++i) {
        ObservationSet single{"s", points.row(i)};
        e.embeddings.row(i) = mean_embed(single, basis);
      }
      e.weights = uniform_weights(points.rows());
      e.basis_fingerprint = basis.fingerprint();
      return e;
    };
    const double approx = rmmd2(embed_points(px), embed_points(py), 1.0).value;
    const double exact = composed_mmd_oracle(px, py, 1.0, 1.0);
    worst_composed = std::max(worst_composed, std::abs(approx - exact));
  }
  const bool pass = worst_loop <= 1e-12 && worst_composed <= 0.01;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "max |rmmd2 - loop| = %.2e (tol 1e-12); max |rmmd2 - composed oracle| = %.4f "
                "(tol 0.01)",
                worst_loop, worst_composed);
  report(5, pass, detail);
  REQUIRE(worst_loop <= 1e-12);
  REQUIRE(worst_composed <= 0.01);
}

TEST_CASE("criterion 6: RHSIC oracle equivalence") {
  auto rng = make_engine(20260808);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int problem = 0; problem < 20; ++problem) {
    const int n = 5 + problem % 8;  // N <= 12
    EmbeddedSample x, y;
    x.embeddings.resize(n, 10);
    y.embeddings.resize(n, 10);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < 10; ++k) {
        x.embeddings(i, k) = 0.4 * gauss(rng);
        y.embeddings(i, k) = 0.4 * gauss(rng);
      }
    x.weights = uniform_weights(n);
    y.weights = uniform_weights(n);
    x.basis_fingerprint = y.basis_fingerprint = 1;
    const double fast = rhsic(x, y, 0.8, 1.1).value;
    const auto k = gram(x, x, 0.8).values;
    const auto l = gram(y, y, 1.1).values;
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) -
                              Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    const double matrix_form = (k * h * l * h).trace() / (static_cast<double>(n) * n);
    worst = std::max(worst, std::abs(fast - matrix_form));
    worst = std::max(worst, std::abs(fast - vstat_hsic_oracle(k, l)));
  }
  const bool pass = worst <= 1e-10;
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "max deviation from matrix and V-statistic oracles = %.2e (tol 1e-10)", worst);
  report(6, pass, detail);
  REQUIRE(pass);
}

TEST_CASE("criterion 7: random-feature kernel approximation converges in m") {
  Eigen::VectorXd x(2), y(2);
  x << 0.3, -0.4;
  y << -0.5, 0.4;
  const double exact = std::exp(-(x - y).squaredNorm() / 2.0);
  const std::vector<int> feature_counts{10, 100, 1000};
  std::vector<double> mean_abs_err;
  for (const int m : feature_counts) {
    double acc = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
      const auto basis = sample_basis(
          m, 2, 1.0,
          derive_seed(20260809, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(rep)));
      acc += std::abs(feature_map(x, basis).dot(feature_map(y, basis)) - exact);
    }
    mean_abs_err.push_back(acc / 200.0);
  }
  const bool decreasing =
      mean_abs_err[1] < mean_abs_err[0] && mean_abs_err[2] < mean_abs_err[1];
  const bool tight = mean_abs_err[2] <= 0.05;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "mean |k_m - k| at m in {10, 100, 1000} = {%.4f, %.4f, %.4f}; need decreasing, "
                "<= 0.05 at 1000",
                mean_abs_err[0], mean_abs_err[1], mean_abs_err[2]);
  report(7, decreasing && tight, detail);
  REQUIRE(decreasing);
  REQUIRE(tight);
}

TEST_CASE("criterion 8: empirical embeddings converge at the root-n rate") {
  const auto basis = sample_basis(kFeatures, 1, 1.0, 20260810);
  const std::vector<int> set_sizes{10, 100, 1000};
  std::vector<double> medians;
  std::normal_distribution<double> gauss;
  for (const int n : set_sizes) {
    std::vector<double> errs(100);
    parallel_for(
        100,
        [&](std::size_t rep) {
          auto rng = make_engine(derive_seed(20260811, static_cast<std::uint64_t>(n),
                                             static_cast<std::uint64_t>(rep)));
          std::normal_distribution<double> local_gauss;
          auto draw = [&](int count) {
            ObservationSet set{"s", Eigen::MatrixXd(count, 1)};
            for (int i = 0; i < count; ++i) set.points(i, 0) = local_gauss(rng);
            return mean_embed(set, basis);
          };
          const auto reference = draw(5000);
          errs[rep] = (draw(n) - reference).norm();
        },
        0);
    medians.push_back(testutil::median_of(errs));
  }
  const double slope = testutil::loglog_slope({10.0, 100.0, 1000.0}, medians);
  const bool pass = slope >= -0.65 && slope <= -0.35;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "median embedding errors {%.4f, %.4f, %.4f}; log-log slope %.3f in "
                "[-0.65, -0.35]",
                medians[0], medians[1], medians[2], slope);
  report(8, pass, detail);
  REQUIRE(pass);
  (void)gauss;
}

TEST_CASE("criterion 9: set-size weighting helps on lopsided set sizes") {
  // 60% of sets carry 3 observations, 40% carry 50; the 0.25 amplitude
  // difference keeps both arms away from floor and ceiling
  auto sweep_rates = [&](std::uint64_t master) {
    BenchmarkSpec spec;
    spec.problem = "two_sample";
    spec.sweep_name = "amplitude_difference";
    spec.sweep_values = {0.25};
    spec.trials = kTrials;
    spec.n_sets = kSets;
    spec.alpha = kAlpha;
    spec.permutations = kPermutations;
    spec.features = kFeatures;
    spec.methods = {"rmmd", "rmmd_unweighted"};
    spec.seed = master;
    spec.size_mixture = {{0.6, 3}, {0.4, 50}};
    const auto rows = run_benchmark(spec);
    return std::pair<double, double>{rows.at(0).rejection_rate, rows.at(1).rejection_rate};
  };
  double weighted_total = 0.0, unweighted_total = 0.0;
  int weighted_wins = 0;
  std::vector<std::pair<double, double>> sweeps;
  for (int sweep = 0; sweep < 10; ++sweep) {
    const auto [weighted, unweighted] =
        sweep_rates(derive_seed(20260812, static_cast<std::uint64_t>(sweep)));
    sweeps.emplace_back(weighted, unweighted);
    weighted_total += weighted;
    unweighted_total += unweighted;
    if (weighted > unweighted) ++weighted_wins;
  }
  const double weighted_mean = weighted_total / 10.0;
  const double unweighted_mean = unweighted_total / 10.0;
  const bool no_loss = weighted_mean >= unweighted_mean - 0.02;
  const bool majority = weighted_wins > 5;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "mean power weighted %.3f vs unweighted %.3f; weighted higher in %d/10 sweeps",
                weighted_mean, unweighted_mean, weighted_wins);
  report(9, no_loss && majority, detail);
  REQUIRE(no_loss);
  REQUIRE(majority);
}

TEST_CASE("criterion 10: permutation p-values are uniform under the null") {
  const double ks = testutil::ks_uniform_pvalue(h0_pvalues());
  const bool pass = ks > 0.01;
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "KS test of %d null p-values against U(0,1): p = %.4f (reject below 0.01)",
                kTrials, ks);
  report(10, pass, detail);
  REQUIRE(pass);
}

TEST_CASE("criterion 11: CLI output is byte-identical across reruns and threads") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "settest_acceptance";
  fs::create_directories(dir);
  const auto x = dir / "x.jsonl";
  const auto y = dir / "y.jsonl";
  bool pass = run_cli("gen two-sample --eta 1 --n 20 --seed 41 --out " + x.string()) == 0;
  pass = pass && run_cli("gen two-sample --eta 1.5 --n 20 --seed 42 --out " + y.string()) == 0;

  const auto x2 = dir / "x2.jsonl";
  pass = pass && run_cli("gen two-sample --eta 1 --n 20 --seed 41 --out " + x2.string()) == 0;
  pass = pass && slurp(x) == slurp(x2);

  const auto r1 = dir / "r1.json";
  const auto r2 = dir / "r2.json";
  const std::string test_cmd = "two-sample " + x.string() + " " + y.string() +
                               " --permutations 60 --features 20 --seed 5 --out ";
  pass = pass && run_cli(test_cmd + r1.string() + " --threads 1") == 0;
  pass = pass && run_cli(test_cmd + r2.string() + " --threads 2") == 0;
  pass = pass && slurp(r1) == slurp(r2) && !slurp(r1).empty();

  const auto spec = dir / "spec.json";
  {
    std::ofstream out(spec);
    out << R"({"problem": "two_sample",
               "sweep": {"name": "amplitude_difference", "values": [0.5]},
               "trials": 6, "n_sets": 12, "set_size_range": [5, 12],
               "permutations": 20, "features": 8, "methods": ["rmmd"],
               "seed": 3, "level1_multipliers": [1.0], "level2_multipliers": [1.0]})";
  }
  const auto c1 = dir / "c1.csv";
  const auto c2 = dir / "c2.csv";
  pass = pass &&
         run_cli("benchmark " + spec.string() + " --out " + c1.string() + " --threads 1") == 0;
  pass = pass &&
         run_cli("benchmark " + spec.string() + " --out " + c2.string() + " --threads 2") == 0;
  pass = pass && slurp(c1) == slurp(c2) && !slurp(c1).empty();

  report(11, pass, "gen/two-sample/benchmark outputs identical across reruns and threads");
  REQUIRE(pass);
}
