// Command-line interface: ingestion, tuning, testing, generation and
// benchmarking of set-valued kernel hypothesis tests.
//
// Exit codes: 0 success, 2 usage/input error, 3 numerical degeneracy.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <settest/settest.hpp>

namespace {

struct TestOptions {
  std::string input_x;
  std::string input_y;
  double alpha = 0.05;
  int permutations = 400;
  int features = 50;
  std::vector<double> grid_l1{0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> grid_l2{0.25, 0.5, 1.0, 2.0, 4.0};
  double split_fraction = 0.5;
  std::string weighting = "set-size";
  std::string tune_weighting = "uniform";
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
  bool no_tune = false;
  int b_inner = 50;
  int threads = 0;
  std::string second_level = "gaussian";
  bool keep_null = false;
};

settest::TestConfig to_config(const TestOptions& opt) {
  settest::TestConfig config;
  config.alpha = opt.alpha;
  config.permutations = opt.permutations;
  config.features = opt.features;
  config.grid.level1_multipliers = opt.grid_l1;
  config.grid.level2_multipliers = opt.grid_l2;
  config.grid.split_fraction = opt.split_fraction;
  config.grid.criterion_weighting = opt.tune_weighting == "set-size"
                                        ? settest::Weighting::set_size
                                        : settest::Weighting::uniform;
  config.weighting = opt.weighting == "uniform" ? settest::Weighting::uniform
                                                : settest::Weighting::set_size;
  config.tune = !opt.no_tune;
  config.b_inner = opt.b_inner;
  config.seed = opt.seed;
  config.threads = opt.threads;
  config.second_level = opt.second_level == "linear" ? settest::SecondLevelKernel::linear
                                                     : settest::SecondLevelKernel::gaussian;
  config.keep_null_stats = opt.keep_null;
  return config;
}

void add_test_flags(CLI::App* cmd, TestOptions& opt) {
  cmd->add_option("--alpha", opt.alpha, "Rejection level")->capture_default_str();
  cmd->add_option("--permutations", opt.permutations, "Null replicates B")
      ->capture_default_str();
  cmd->add_option("--features", opt.features, "Random Fourier features m")
      ->capture_default_str();
  cmd->add_option("--grid-l1", opt.grid_l1, "Level-1 bandwidth multipliers")
      ->delimiter(',');
  cmd->add_option("--grid-l2", opt.grid_l2, "Level-2 bandwidth multipliers")
      ->delimiter(',');
  cmd->add_option("--split", opt.split_fraction, "Training fraction of the tuning split")
      ->capture_default_str();
  cmd->add_option("--weighting", opt.weighting, "Set weighting: set-size or uniform")
      ->check(CLI::IsMember({"set-size", "uniform"}))
      ->capture_default_str();
  cmd->add_option("--tune-weighting", opt.tune_weighting,
                  "Weighting of the tuning criterion: uniform or set-size")
      ->check(CLI::IsMember({"set-size", "uniform"}))
      ->capture_default_str();
  cmd->add_option("--seed", opt.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", opt.out, "Output path (stdout when omitted)");
  cmd->add_option("--format", opt.format, "Result format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->add_flag("--no-tune", opt.no_tune,
                "Skip tuning; use median heuristics on the full data");
  cmd->add_option("--b-inner", opt.b_inner,
                  "Inner replicates of the independence tuning criterion")
      ->capture_default_str();
  cmd->add_option("--threads", opt.threads, "Worker thread cap (0 = hardware)");
  cmd->add_option("--second-level", opt.second_level, "Second-level kernel")
      ->check(CLI::IsMember({"gaussian", "linear"}))
      ->capture_default_str();
  cmd->add_flag("--keep-null", opt.keep_null, "Retain the permutation null in the output");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw settest::io_error("cannot write '" + path + "'");
  out << text;
}

std::string result_csv(const settest::TestResult& result) {
  char buffer[512];
  const auto& p = result.selected_params;
  std::snprintf(buffer, sizeof(buffer),
                "statistic,p_value,reject,alpha,n_permutations,sigma1_sq,sigma2_sq,"
                "sigma_l_sq,seed\n%.17g,%.17g,%d,%.17g,%d,%.17g,%.17g,%.17g,%llu\n",
                result.statistic, result.p_value, result.reject ? 1 : 0, result.alpha,
                result.n_permutations, p.sigma1_sq, p.sigma2_sq, p.sigma_l_sq,
                static_cast<unsigned long long>(result.seed));
  return buffer;
}

void emit_result(const settest::TestResult& result, const TestOptions& opt) {
  if (opt.format == "csv") {
    write_text(opt.out, result_csv(result));
  } else {
    write_text(opt.out, settest::result_to_json(result).dump(2) + "\n");
  }
}

// resolved configuration plus everything needed to replay the run exactly
void log_run(const char* what, const TestOptions& opt, const settest::TestResult& result) {
  std::fprintf(stderr,
               "%s: alpha=%.4g permutations=%d features=%d split=%.3g weighting=%s tune=%d "
               "seed=%llu basis=%llu sigma1_sq=%.6g sigma2_sq=%.6g p=%.6g %s\n",
               what, opt.alpha, opt.permutations, opt.features, opt.split_fraction,
               opt.weighting.c_str(), opt.no_tune ? 0 : 1,
               static_cast<unsigned long long>(result.seed),
               static_cast<unsigned long long>(result.basis_fingerprint),
               result.selected_params.sigma1_sq, result.selected_params.sigma2_sq,
               result.p_value, result.reject ? "reject" : "fail-to-reject");
}

struct GenTwoSampleOptions {
  settest::TwoSampleDesign design;
  std::string out;
};

struct GenIndependenceOptions {
  settest::IndependenceDesign design;
  std::string link = "square";
  bool independent = false;
  std::string out;
};

struct BenchmarkOptions {
  std::string spec_path;
  std::string out = "benchmark.csv";
  std::string json_out;
  int threads = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel two-sample and independence tests on set-valued data"};
  app.require_subcommand(1);

  TestOptions two_opt;
  auto* two = app.add_subcommand("two-sample",
                                 "Test whether two samples of sets share one distribution");
  two->add_option("x", two_opt.input_x, "First sample (JSONL)")->required();
  two->add_option("y", two_opt.input_y, "Second sample (JSONL)")->required();
  add_test_flags(two, two_opt);

  TestOptions ind_opt;
  auto* ind = app.add_subcommand("independence",
                                 "Test whether the paired sides of a sample are independent");
  ind->add_option("pairs", ind_opt.input_x, "Paired sample (JSONL)")->required();
  add_test_flags(ind, ind_opt);

  auto* gen = app.add_subcommand("gen", "Generate synthetic data files");
  gen->require_subcommand(1);

  GenTwoSampleOptions gen_two;
  auto* gts = gen->add_subcommand("two-sample", "Noisy sine-wave sample");
  gts->add_option("--eta", gen_two.design.amplitude, "Sine amplitude")->capture_default_str();
  gts->add_option("--sigma", gen_two.design.baseline_variance, "Baseline noise variance")
      ->capture_default_str();
  gts->add_option("--invgamma-shape", gen_two.design.invgamma_shape,
                  "Shape of the per-set variance distribution")
      ->capture_default_str();
  gts->add_option("--n", gen_two.design.n_sets, "Number of sets")->capture_default_str();
  gts->add_option("--size-lo", gen_two.design.set_size_range[0], "Smallest set size")
      ->capture_default_str();
  gts->add_option("--size-hi", gen_two.design.set_size_range[1], "Largest set size")
      ->capture_default_str();
  gts->add_option("--dims", gen_two.design.dims, "Value channels per observation")
      ->capture_default_str();
  gts->add_option("--seed", gen_two.design.seed, "Design seed")->capture_default_str();
  gts->add_option("--out", gen_two.out, "Output JSONL path")->required();

  GenIndependenceOptions gen_ind;
  auto* gi = gen->add_subcommand("independence", "Paired sine-wave sample");
  gi->add_option("--link", gen_ind.link, "Coupling: square, cube, cos, negexp")
      ->capture_default_str();
  gi->add_option("--sigma", gen_ind.design.noise, "Observation noise (std. dev.)")
      ->capture_default_str();
  gi->add_option("--n", gen_ind.design.n_sets, "Number of pairs")->capture_default_str();
  gi->add_option("--size-lo", gen_ind.design.set_size_range[0], "Smallest set size")
      ->capture_default_str();
  gi->add_option("--size-hi", gen_ind.design.set_size_range[1], "Largest set size")
      ->capture_default_str();
  gi->add_option("--dims", gen_ind.design.dims, "Value channels per observation")
      ->capture_default_str();
  gi->add_option("--seed", gen_ind.design.seed, "Design seed")->capture_default_str();
  gi->add_flag("--independent", gen_ind.independent,
               "Sever the pairing (generate under the null)");
  gi->add_flag("--shared-times", gen_ind.design.shared_times,
               "Reuse the x-side observation times on the y side");
  gi->add_option("--out", gen_ind.out, "Output JSONL path")->required();

  BenchmarkOptions bench_opt;
  auto* bench = app.add_subcommand("benchmark", "Run a power/Type-I sweep from a JSON spec");
  bench->add_option("spec", bench_opt.spec_path, "Benchmark spec (JSON)")->required();
  bench->add_option("--out", bench_opt.out, "CSV output path")->capture_default_str();
  bench->add_option("--json", bench_opt.json_out, "Optional JSON mirror path");
  bench->add_option("--threads", bench_opt.threads, "Worker thread cap (0 = hardware)");

  two->callback([&] {
    settest::set_thread_cap(two_opt.threads);
    const auto x = settest::load_sample(two_opt.input_x);
    const auto y = settest::load_sample(two_opt.input_y);
    const auto result = settest::run_two_sample_test(x, y, to_config(two_opt));
    log_run("two-sample", two_opt, result);
    emit_result(result, two_opt);
  });

  ind->callback([&] {
    settest::set_thread_cap(ind_opt.threads);
    const auto pairs = settest::load_paired_sample(ind_opt.input_x);
    const auto result = settest::run_independence_test(pairs, to_config(ind_opt));
    log_run("independence", ind_opt, result);
    emit_result(result, ind_opt);
  });

  gts->callback([&] {
    const auto& d = gen_two.design;
    const auto sample = settest::gen_two_sample(d);
    settest::save_sample(sample, gen_two.out);
    std::fprintf(stderr,
                 "gen two-sample: eta=%.6g sigma=%.6g invgamma_shape=%.6g n=%d "
                 "sizes=[%d,%d] dims=%d seed=%llu -> %s\n",
                 d.amplitude, d.baseline_variance, d.invgamma_shape, d.n_sets,
                 d.set_size_range[0], d.set_size_range[1], d.dims,
                 static_cast<unsigned long long>(d.seed), gen_two.out.c_str());
  });

  gi->callback([&] {
    gen_ind.design.link = settest::parse_link(gen_ind.link);
    const auto& d = gen_ind.design;
    const auto pairs = settest::gen_independence(d, !gen_ind.independent);
    settest::save_paired_sample(pairs, gen_ind.out);
    std::fprintf(stderr,
                 "gen independence: link=%s sigma=%.6g n=%d sizes=[%d,%d] dims=%d "
                 "dependent=%d shared_times=%d seed=%llu -> %s\n",
                 settest::link_name(d.link), d.noise, d.n_sets, d.set_size_range[0],
                 d.set_size_range[1], d.dims, gen_ind.independent ? 0 : 1,
                 d.shared_times ? 1 : 0, static_cast<unsigned long long>(d.seed),
                 gen_ind.out.c_str());
  });

  bench->callback([&] {
    settest::set_thread_cap(bench_opt.threads);
    std::ifstream in(bench_opt.spec_path);
    if (!in) throw settest::io_error("cannot open '" + bench_opt.spec_path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw settest::io_error(bench_opt.spec_path + ": " + e.what());
    }
    const auto spec = settest::benchmark_spec_from_json(j);
    const auto rows = settest::run_benchmark(spec, [](const settest::BenchmarkRow& row) {
      std::fprintf(stderr, "[%s %s=%.6g] rate=%.4f se=%.4f trials=%d failures=%d\n",
                   row.method.c_str(), row.sweep_param.c_str(), row.sweep_value,
                   row.rejection_rate, row.standard_error, row.trials, row.failures);
    });
    settest::write_csv(rows, bench_opt.out);
    if (!bench_opt.json_out.empty()) settest::write_rows_json(rows, bench_opt.json_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const settest::degenerate_scale_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const settest::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const settest::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
