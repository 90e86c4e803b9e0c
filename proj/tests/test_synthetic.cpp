#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <settest/synthetic.hpp>

using namespace settest;

TEST_CASE("invgamma_sample has the stated first moment") {
  // E[X] for shape mu is 1/(mu - 1); cross-checked against Simpson
  // integration of x * f(x; 3) before freezing
  const double mu = 3.0;
  double integral = 0.0;
  {
    const int steps = 200000;
    const double hi = 60.0;
    const double h = hi / steps;
    auto integrand = [&](double x) {
      if (x <= 0.0) return 0.0;
      return x * std::pow(x, -mu - 1.0) * std::exp(-1.0 / x) / std::tgamma(mu);
    };
    for (int i = 0; i < steps; ++i) {
      const double a = i * h, b = a + h;
      integral += (b - a) / 6.0 * (integrand(a) + 4.0 * integrand((a + b) / 2.0) + integrand(b));
    }
  }
  REQUIRE(integral == Catch::Approx(0.5).epsilon(1e-3));

  auto rng = make_engine(123);
  double mean = 0.0;
  const int draws = 1'000'000;
  for (int i = 0; i < draws; ++i) {
    const double v = invgamma_sample(mu, rng);
    REQUIRE(v > 0.0);
    mean += v;
  }
  mean /= draws;
  REQUIRE(std::abs(mean - integral) / integral < 0.01);

  auto a = make_engine(9);
  auto b = make_engine(9);
  REQUIRE(invgamma_sample(2.0, a) == invgamma_sample(2.0, b));
  REQUIRE_THROWS_AS(invgamma_sample(0.0, a), validation_error);
}

TEST_CASE("gen_two_sample is deterministic and respects its ranges") {
  TwoSampleDesign design;
  design.n_sets = 40;
  design.set_size_range = {5, 50};
  design.seed = 77;
  const auto a = gen_two_sample(design);
  const auto b = gen_two_sample(design);
  REQUIRE(a.size() == 40);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    REQUIRE(a.sets[k].points == b.sets[k].points);  // bit-exact regeneration
    REQUIRE(a.sets[k].size() >= 5);
    REQUIRE(a.sets[k].size() <= 50);
    REQUIRE(a.sets[k].dim() == 2);
  }
  REQUIRE(a.weights == compute_weights(set_sizes(a.sets)));

  TwoSampleDesign bad = design;
  bad.set_size_range = {0, 4};
  REQUIRE_THROWS_AS(gen_two_sample(bad), validation_error);
}

TEST_CASE("zero amplitude gives zero-mean observations") {
  TwoSampleDesign design;
  design.amplitude = 0.0;
  design.baseline_variance = 0.05;
  design.n_sets = 200;
  design.seed = 31;
  const auto sample = gen_two_sample(design);
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (const auto& set : sample.sets)
    for (Eigen::Index j = 0; j < set.size(); ++j) {
      sum += set.points(j, 1);
      sum_sq += set.points(j, 1) * set.points(j, 1);
      ++count;
    }
  const double mean = sum / static_cast<double>(count);
  const double sd = std::sqrt(sum_sq / static_cast<double>(count) - mean * mean);
  REQUIRE(std::abs(mean) < 3.0 * sd / std::sqrt(static_cast<double>(count)));
}

TEST_CASE("zero-mean z-test passes in nearly all regenerations") {
  int passes = 0;
  for (int rep = 0; rep < 100; ++rep) {
    TwoSampleDesign design;
    design.amplitude = 0.0;
    design.n_sets = 30;
    design.seed = derive_seed(4141, static_cast<std::uint64_t>(rep));
    const auto sample = gen_two_sample(design);
    double sum = 0.0, sum_sq = 0.0;
    std::size_t count = 0;
    for (const auto& set : sample.sets)
      for (Eigen::Index j = 0; j < set.size(); ++j) {
        sum += set.points(j, 1);
        sum_sq += set.points(j, 1) * set.points(j, 1);
        ++count;
      }
    const double mean = sum / static_cast<double>(count);
    const double sd = std::sqrt(sum_sq / static_cast<double>(count) - mean * mean);
    const double z = mean / (sd / std::sqrt(static_cast<double>(count)));
    if (std::abs(z) < 2.5758) ++passes;  // two-sided level 0.01
  }
  REQUIRE(passes >= 95);
}

TEST_CASE("larger amplitude spreads the value distribution") {
  auto pooled_variance = [](double amplitude) {
    TwoSampleDesign design;
    design.amplitude = amplitude;
    design.baseline_variance = 0.05;
    design.n_sets = 300;
    design.seed = 55;
    const auto sample = gen_two_sample(design);
    double sum = 0.0, sum_sq = 0.0;
    std::size_t count = 0;
    for (const auto& set : sample.sets)
      for (Eigen::Index j = 0; j < set.size(); ++j) {
        sum += set.points(j, 1);
        sum_sq += set.points(j, 1) * set.points(j, 1);
        ++count;
      }
    const double mean = sum / static_cast<double>(count);
    return sum_sq / static_cast<double>(count) - mean * mean;
  };
  REQUIRE(pooled_variance(1.5) > pooled_variance(1.0));
}

TEST_CASE("multichannel sets only vary in the first channel's amplitude") {
  TwoSampleDesign design;
  design.amplitude = 2.0;
  design.dims = 3;
  design.n_sets = 5;
  design.seed = 3;
  const auto sample = gen_two_sample(design);
  REQUIRE(sample.dim() == 4);  // time + three channels
}

TEST_CASE("gen_independence couples only through the shared latents") {
  IndependenceDesign design;
  design.n_sets = 12;
  design.seed = 21;
  const auto coupled = gen_independence(design, true);
  const auto severed = gen_independence(design, false);
  for (Eigen::Index i = 0; i < coupled.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    REQUIRE(coupled.x_sets[k].points == severed.x_sets[k].points);
    REQUIRE(coupled.y_sets[k].points != severed.y_sets[k].points);
  }
}

TEST_CASE("noiseless square link reproduces the squared mean function") {
  IndependenceDesign design;
  design.noise = 0.0;
  design.link = LinkFn::square;
  design.beta_range = {1.0, 1.0};
  design.alpha_range = {0.0, 0.0};
  design.n_sets = 6;
  design.seed = 13;
  const auto pairs = gen_independence(design, true);
  for (const auto& y : pairs.y_sets)
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      const double t = y.points(j, 0);
      const double expected = std::pow(std::sin(2.0 * std::numbers::pi * t), 2.0);
      REQUIRE(y.points(j, 1) == Catch::Approx(expected).margin(1e-12));
    }
}

TEST_CASE("shared times reuse the x-side observation times") {
  IndependenceDesign design;
  design.n_sets = 6;
  design.seed = 17;
  design.shared_times = true;
  const auto pairs = gen_independence(design, true);
  for (Eigen::Index i = 0; i < pairs.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    REQUIRE(pairs.x_sets[k].size() == pairs.y_sets[k].size());
    REQUIRE(pairs.x_sets[k].points.col(0) == pairs.y_sets[k].points.col(0));
  }
}

TEST_CASE("size mixtures draw from the given buckets") {
  TwoSampleDesign design;
  design.n_sets = 200;
  design.size_mixture = {{0.6, 3}, {0.4, 50}};
  design.seed = 23;
  const auto sample = gen_two_sample(design);
  int small = 0, large = 0;
  for (const auto& set : sample.sets) {
    REQUIRE((set.size() == 3 || set.size() == 50));
    (set.size() == 3 ? small : large) += 1;
  }
  REQUIRE(small > 90);
  REQUIRE(large > 40);
}

TEST_CASE("link functions evaluate as named") {
  REQUIRE(apply_link(LinkFn::square, 1.5) == Catch::Approx(2.25));
  REQUIRE(apply_link(LinkFn::cube, -2.0) == Catch::Approx(-8.0));
  REQUIRE(apply_link(LinkFn::cosine, 0.0) == Catch::Approx(1.0));
  REQUIRE(apply_link(LinkFn::negexp, 0.0) == Catch::Approx(1.0));
  REQUIRE(parse_link("cos") == LinkFn::cosine);
  REQUIRE_THROWS_AS(parse_link("tanh"), validation_error);
}
