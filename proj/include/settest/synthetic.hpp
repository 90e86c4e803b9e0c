#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "settest/data.hpp"

namespace settest {

/// Coupling functions for the dependent side of paired designs.
enum class LinkFn { square, cube, cosine, negexp };

inline double apply_link(LinkFn g, double v) {
  switch (g) {
    case LinkFn::square: return v * v;
    case LinkFn::cube: return v * v * v;
    case LinkFn::cosine: return std::cos(v);
    case LinkFn::negexp: return std::exp(-v);
  }
  throw validation_error("apply_link: unknown link");
}

inline const char* link_name(LinkFn g) {
  switch (g) {
    case LinkFn::square: return "square";
    case LinkFn::cube: return "cube";
    case LinkFn::cosine: return "cos";
    case LinkFn::negexp: return "negexp";
  }
  return "?";
}

inline LinkFn parse_link(const std::string& name) {
  if (name == "square") return LinkFn::square;
  if (name == "cube") return LinkFn::cube;
  if (name == "cos" || name == "cosine") return LinkFn::cosine;
  if (name == "negexp") return LinkFn::negexp;
  throw validation_error("unknown link '" + name + "' (square, cube, cos, negexp)");
}

/// One-parameter inverse gamma draw with density x^(-mu-1) exp(-1/x) / Gamma(mu),
/// realized as the reciprocal of a Gamma(mu, 1) draw.
inline double invgamma_sample(double shape, std::mt19937_64& rng) {
  if (!(shape > 0.0)) throw validation_error("invgamma_sample: shape must be positive");
  std::gamma_distribution<double> gamma(shape, 1.0);
  double y = gamma(rng);
  while (!(y > 0.0)) y = gamma(rng);
  return 1.0 / y;
}

/// Noisy sine-wave populations: each set holds observations
/// (t, v_1, ..., v_dims) with t ~ U[0,1] and
/// v_c = amp_c * sin(2*pi*t) + Normal(0, variance = s_ic + baseline_variance),
/// where s_ic is an inverse-gamma draw per set and channel. Channel 1 uses
/// `amplitude`; any extra channels use amplitude 1 so that only the first
/// channel's law varies between designs.
struct TwoSampleDesign {
  double amplitude = 1.0;
  double baseline_variance = 0.1;
  double invgamma_shape = 3.0;
  int n_sets = 100;
  std::array<int, 2> set_size_range{5, 50};
  int dims = 1;
  std::uint64_t seed = 0;
  // optional (probability, size) buckets replacing the uniform size draw
  std::vector<std::pair<double, int>> size_mixture;
};

/// Paired sine-wave series coupled through shared latents:
///   f(t) = beta * sin(2*pi*t) + alpha * t,  x = f(t) + noise,
///   y = g(f(t')) + noise,
/// with beta ~ U[beta_range], alpha ~ U[alpha_range] shared between the
/// sides when the pairing is dependent. `noise` is a standard deviation.
/// Extra channels carry no dependence.
struct IndependenceDesign {
  double noise = 0.2;
  LinkFn link = LinkFn::square;
  int n_sets = 100;
  std::array<int, 2> set_size_range{5, 50};
  int dims = 1;
  std::uint64_t seed = 0;
  bool shared_times = false;
  std::array<double, 2> beta_range{0.5, 1.5};
  std::array<double, 2> alpha_range{-0.5, 0.5};
};

namespace detail {

inline void check_design_common(int n_sets, const std::array<int, 2>& range, int dims) {
  if (n_sets < 2) throw validation_error("design: need at least 2 sets");
  if (range[0] < 1 || range[1] < range[0])
    throw validation_error("design: invalid set size range");
  if (dims < 1) throw validation_error("design: dims must be at least 1");
}

inline int draw_set_size(const TwoSampleDesign& design, std::mt19937_64& rng) {
  if (design.size_mixture.empty()) {
    std::uniform_int_distribution<int> pick(design.set_size_range[0],
                                            design.set_size_range[1]);
    return pick(rng);
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (const auto& [prob, size] : design.size_mixture) {
    acc += prob;
    if (u < acc) return size;
  }
  return design.size_mixture.back().second;
}

}  // namespace detail

inline Sample gen_two_sample(const TwoSampleDesign& design) {
  detail::check_design_common(design.n_sets, design.set_size_range, design.dims);
  if (!(design.invgamma_shape > 0.0))
    throw validation_error("gen_two_sample: inverse-gamma shape must be positive");
  if (design.baseline_variance < 0.0)
    throw validation_error("gen_two_sample: baseline variance must be nonnegative");
  for (const auto& [prob, size] : design.size_mixture)
    if (prob <= 0.0 || size < 1)
      throw validation_error("gen_two_sample: invalid size mixture");
  std::vector<ObservationSet> sets;
  sets.reserve(static_cast<std::size_t>(design.n_sets));
  std::uniform_real_distribution<double> unif_t(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < design.n_sets; ++i) {
    auto rng = make_engine(derive_seed(design.seed, fnv1a("two-sample-set"),
                                       static_cast<std::uint64_t>(i)));
    const int n = detail::draw_set_size(design, rng);
    std::vector<double> channel_sd(static_cast<std::size_t>(design.dims));
    for (int c = 0; c < design.dims; ++c)
      channel_sd[static_cast<std::size_t>(c)] = std::sqrt(
          invgamma_sample(design.invgamma_shape, rng) + design.baseline_variance);
    ObservationSet set;
    set.id = "set-" + std::to_string(i + 1);
    set.points.resize(n, 1 + design.dims);
    for (int j = 0; j < n; ++j) {
      const double t = unif_t(rng);
      set.points(j, 0) = t;
      for (int c = 0; c < design.dims; ++c) {
        const double amp = c == 0 ? design.amplitude : 1.0;
        set.points(j, 1 + c) = amp * std::sin(2.0 * std::numbers::pi * t) +
                               channel_sd[static_cast<std::size_t>(c)] * gauss(rng);
      }
    }
    sets.push_back(std::move(set));
  }
  return make_sample(std::move(sets));
}

/// Generates paired samples. With dependent = false the y side draws its
/// latents from an independent stream, severing the coupling while keeping
/// the marginal laws identical.
inline PairedSample gen_independence(const IndependenceDesign& design, bool dependent) {
  detail::check_design_common(design.n_sets, design.set_size_range, design.dims);
  if (design.noise < 0.0)
    throw validation_error("gen_independence: noise must be nonnegative");
  if (design.beta_range[1] < design.beta_range[0] ||
      design.alpha_range[1] < design.alpha_range[0])
    throw validation_error("gen_independence: invalid latent range");
  const auto draw_latents = [&](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> beta(design.beta_range[0], design.beta_range[1]);
    std::uniform_real_distribution<double> alpha(design.alpha_range[0], design.alpha_range[1]);
    const double b = beta(rng);
    const double a = alpha(rng);
    return std::pair<double, double>{b, a};
  };
  const auto series_mean = [](double beta, double alpha, double t) {
    return beta * std::sin(2.0 * std::numbers::pi * t) + alpha * t;
  };
  std::vector<ObservationSet> xs, ys;
  xs.reserve(static_cast<std::size_t>(design.n_sets));
  ys.reserve(static_cast<std::size_t>(design.n_sets));
  std::uniform_real_distribution<double> unif_t(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick_size(design.set_size_range[0],
                                               design.set_size_range[1]);
  for (int i = 0; i < design.n_sets; ++i) {
    const auto iu = static_cast<std::uint64_t>(i);
    auto latent_rng = make_engine(derive_seed(design.seed, fnv1a("pair-latent"), iu));
    const auto [beta_x, alpha_x] = draw_latents(latent_rng);
    auto severed_rng = make_engine(derive_seed(design.seed, fnv1a("pair-latent-severed"), iu));
    const auto [beta_sev, alpha_sev] = draw_latents(severed_rng);
    const double beta_y = dependent ? beta_x : beta_sev;
    const double alpha_y = dependent ? alpha_x : alpha_sev;

    // per-channel latents for the dependence-free extra channels
    std::vector<std::pair<double, double>> extra_x, extra_y;
    for (int c = 1; c < design.dims; ++c) {
      auto cx = make_engine(derive_seed(design.seed, fnv1a("pair-latent-extra-x"), iu,
                                        static_cast<std::uint64_t>(c)));
      auto cy = make_engine(derive_seed(design.seed, fnv1a("pair-latent-extra-y"), iu,
                                        static_cast<std::uint64_t>(c)));
      extra_x.push_back(draw_latents(cx));
      extra_y.push_back(draw_latents(cy));
    }

    auto x_rng = make_engine(derive_seed(design.seed, fnv1a("pair-x"), iu));
    const int n_x = pick_size(x_rng);
    ObservationSet x;
    x.id = "pair-" + std::to_string(i + 1);
    x.points.resize(n_x, 1 + design.dims);
    std::vector<double> x_times(static_cast<std::size_t>(n_x));
    for (int j = 0; j < n_x; ++j) {
      const double t = unif_t(x_rng);
      x_times[static_cast<std::size_t>(j)] = t;
      x.points(j, 0) = t;
      x.points(j, 1) = series_mean(beta_x, alpha_x, t) + design.noise * gauss(x_rng);
      for (int c = 1; c < design.dims; ++c) {
        const auto& [b, a] = extra_x[static_cast<std::size_t>(c - 1)];
        x.points(j, 1 + c) = series_mean(b, a, t) + design.noise * gauss(x_rng);
      }
    }

    auto y_rng = make_engine(derive_seed(design.seed, fnv1a("pair-y"), iu));
    const int n_y = design.shared_times ? n_x : pick_size(y_rng);
    ObservationSet y;
    y.id = x.id;
    y.points.resize(n_y, 1 + design.dims);
    for (int j = 0; j < n_y; ++j) {
      const double t = design.shared_times ? x_times[static_cast<std::size_t>(j)]
                                           : unif_t(y_rng);
      y.points(j, 0) = t;
      y.points(j, 1) = apply_link(design.link, series_mean(beta_y, alpha_y, t)) +
                       design.noise * gauss(y_rng);
      for (int c = 1; c < design.dims; ++c) {
        const auto& [b, a] = extra_y[static_cast<std::size_t>(c - 1)];
        y.points(j, 1 + c) = series_mean(b, a, t) + design.noise * gauss(y_rng);
      }
    }
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
  }
  return make_paired_sample(std::move(xs), std::move(ys));
}

}  // namespace settest
