#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

const std::string cli = SETTEST_CLI_PATH;

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "settest_cli_tests";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const std::string& stderr_to = "") {
  std::string cmd = cli + " " + args;
  if (!stderr_to.empty()) cmd += " 2>" + stderr_to;
  else cmd += " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("gen two-sample produces reproducible, loadable files") {
  const auto dir = work_dir();
  const auto a = dir / "gen_a.jsonl";
  const auto b = dir / "gen_b.jsonl";
  REQUIRE(run("gen two-sample --eta 1 --sigma 0.1 --n 20 --seed 1 --out " + a.string()) == 0);
  REQUIRE(run("gen two-sample --eta 1 --sigma 0.1 --n 20 --seed 1 --out " + b.string()) == 0);
  REQUIRE(slurp(a) == slurp(b));  // byte-identical regeneration
  std::ifstream in(a);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  REQUIRE(lines == 20);

  REQUIRE(run("gen two-sample --n 0 --out " + (dir / "bad.jsonl").string()) == 2);
}

TEST_CASE("two-sample run on a file against itself accepts") {
  const auto dir = work_dir();
  const auto data = dir / "self.jsonl";
  REQUIRE(run("gen two-sample --eta 1 --sigma 0.1 --n 16 --seed 3 --out " + data.string()) == 0);
  const auto out = dir / "self_result.json";
  REQUIRE(run("two-sample " + data.string() + " " + data.string() +
              " --permutations 50 --features 10 --grid-l1 1 --grid-l2 1 --seed 5 --out " +
              out.string()) == 0);
  const auto result = nlohmann::json::parse(slurp(out));
  REQUIRE(result["schema"] == 1);
  REQUIRE(result["statistic"].get<double>() == 0.0);
  REQUIRE(result["p_value"].get<double>() > 0.9);
  REQUIRE_FALSE(result["reject"].get<bool>());
  // split memberships are carried for audit and stay disjoint
  REQUIRE(result.contains("train_ids"));
  REQUIRE(result.contains("test_ids"));
}

TEST_CASE("missing input files exit with code 2 and name the path") {
  const auto dir = work_dir();
  const auto log = dir / "missing.log";
  REQUIRE(run("two-sample /nonexistent/a.jsonl /nonexistent/b.jsonl", log.string()) == 2);
  REQUIRE(slurp(log).find("/nonexistent/a.jsonl") != std::string::npos);
}

TEST_CASE("malformed paired lines exit with code 2 and the line number") {
  const auto dir = work_dir();
  const auto bad = dir / "bad_pairs.jsonl";
  write_file(bad,
             R"({"id":"p1","x":[[0.1,1.0]],"y":[[0.2,2.0]]})"
             "\n"
             "{oops\n");
  const auto log = dir / "bad_pairs.log";
  REQUIRE(run("independence " + bad.string(), log.string()) == 2);
  REQUIRE(slurp(log).find(":2") != std::string::npos);
}

TEST_CASE("degenerate scales exit with code 3") {
  const auto dir = work_dir();
  const auto flat = dir / "flat.jsonl";
  std::string text;
  for (int i = 0; i < 4; ++i)
    text += R"({"id":"s)" + std::to_string(i) + R"(","points":[[1.0,1.0],[1.0,1.0]]})" + "\n";
  write_file(flat, text);
  REQUIRE(run("two-sample " + flat.string() + " " + flat.string() + " --no-tune") == 3);
}

TEST_CASE("independence subcommand tests generated data end to end") {
  const auto dir = work_dir();
  const auto pairs = dir / "pairs.jsonl";
  REQUIRE(run("gen independence --link square --sigma 0.1 --n 24 --seed 11 --out " +
              pairs.string()) == 0);
  const auto out = dir / "pairs_result.json";
  REQUIRE(run("independence " + pairs.string() +
              " --permutations 60 --features 10 --grid-l1 1 --grid-l2 1 --b-inner 20"
              " --seed 2 --out " +
              out.string()) == 0);
  const auto result = nlohmann::json::parse(slurp(out));
  REQUIRE(result["selected_params"].contains("sigma_l_sq"));
  REQUIRE(result["p_value"].get<double>() > 0.0);
}

TEST_CASE("identical flags and seed give byte-identical results at any thread count") {
  const auto dir = work_dir();
  const auto x = dir / "det_x.jsonl";
  const auto y = dir / "det_y.jsonl";
  REQUIRE(run("gen two-sample --eta 1 --n 16 --seed 21 --out " + x.string()) == 0);
  REQUIRE(run("gen two-sample --eta 1.6 --n 16 --seed 22 --out " + y.string()) == 0);
  const auto out1 = dir / "det_1.json";
  const auto out2 = dir / "det_2.json";
  const std::string base = "two-sample " + x.string() + " " + y.string() +
                           " --permutations 40 --features 10 --grid-l1 0.5,1 --grid-l2 0.5,1"
                           " --seed 9 --out ";
  REQUIRE(run(base + out1.string() + " --threads 1") == 0);
  REQUIRE(run(base + out2.string() + " --threads 2") == 0);
  REQUIRE(slurp(out1) == slurp(out2));
}

TEST_CASE("benchmark subcommand writes deterministic CSV") {
  const auto dir = work_dir();
  const auto spec = dir / "spec.json";
  write_file(spec, R"({
    "problem": "two_sample",
    "sweep": {"name": "amplitude_difference", "values": [0.8]},
    "trials": 5,
    "n_sets": 12,
    "set_size_range": [5, 12],
    "permutations": 20,
    "features": 8,
    "methods": ["rmmd"],
    "seed": 13,
    "level1_multipliers": [1.0],
    "level2_multipliers": [1.0]
  })");
  const auto csv1 = dir / "bench_1.csv";
  const auto csv2 = dir / "bench_2.csv";
  REQUIRE(run("benchmark " + spec.string() + " --out " + csv1.string() + " --threads 1") == 0);
  REQUIRE(run("benchmark " + spec.string() + " --out " + csv2.string() + " --threads 2") == 0);
  REQUIRE(slurp(csv1) == slurp(csv2));
  std::ifstream in(csv1);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  REQUIRE(lines == 2);  // header + one cell

  const auto bad_spec = dir / "bad_spec.json";
  write_file(bad_spec, R"({"methods": ["nope"], "sweep": {"name": "amplitude_difference",
    "values": [0.1]}})");
  const auto log = dir / "bad_spec.log";
  REQUIRE(run("benchmark " + bad_spec.string() + " --out " + (dir / "x.csv").string(),
              log.string()) == 2);
  REQUIRE(slurp(log).find("rmmd") != std::string::npos);  // lists valid methods
}

TEST_CASE("repeated null runs rarely look significant") {
  // two files from one design, different generation seeds: H0 holds
  const auto dir = work_dir();
  int high_p = 0;
  const int runs = 40;
  for (int r = 0; r < runs; ++r) {
    const auto x = dir / ("h0_x_" + std::to_string(r) + ".jsonl");
    const auto y = dir / ("h0_y_" + std::to_string(r) + ".jsonl");
    const auto out = dir / ("h0_res_" + std::to_string(r) + ".json");
    REQUIRE(run("gen two-sample --eta 1 --sigma 0.1 --n 20 --seed " +
                std::to_string(1000 + 2 * r) + " --out " + x.string()) == 0);
    REQUIRE(run("gen two-sample --eta 1 --sigma 0.1 --n 20 --seed " +
                std::to_string(1001 + 2 * r) + " --out " + y.string()) == 0);
    REQUIRE(run("two-sample " + x.string() + " " + y.string() +
                " --permutations 60 --features 15 --seed " + std::to_string(50 + r) +
                " --out " + out.string()) == 0);
    if (nlohmann::json::parse(slurp(out))["p_value"].get<double>() > 0.05) ++high_p;
  }
  REQUIRE(high_p >= static_cast<int>(0.85 * runs));
}

TEST_CASE("independence runs hold their size and find real coupling") {
  const auto dir = work_dir();
  const int runs = 40;
  int null_rejects = 0, alt_rejects = 0;
  for (int r = 0; r < runs; ++r) {
    const auto severed = dir / ("ind_null_" + std::to_string(r) + ".jsonl");
    const auto coupled = dir / ("ind_alt_" + std::to_string(r) + ".jsonl");
    const auto out = dir / "ind_res.json";
    REQUIRE(run("gen independence --sigma 0.2 --n 100 --independent --seed " +
                std::to_string(3000 + r) + " --out " + severed.string()) == 0);
    REQUIRE(run("independence " + severed.string() +
                " --permutations 100 --features 25 --seed " + std::to_string(70 + r) +
                " --out " + out.string()) == 0);
    if (nlohmann::json::parse(slurp(out))["reject"].get<bool>()) ++null_rejects;

    REQUIRE(run("gen independence --link square --sigma 0.2 --n 100 --seed " +
                std::to_string(4000 + r) + " --out " + coupled.string()) == 0);
    REQUIRE(run("independence " + coupled.string() +
                " --permutations 100 --features 25 --seed " + std::to_string(90 + r) +
                " --out " + out.string()) == 0);
    if (nlohmann::json::parse(slurp(out))["p_value"].get<double>() <= 0.05) ++alt_rejects;
  }
  REQUIRE(null_rejects <= 6);  // rate near alpha over 40 runs
  REQUIRE(alt_rejects >= static_cast<int>(0.8 * runs));
}

TEST_CASE("csv result format is available") {
  const auto dir = work_dir();
  const auto x = dir / "fmt_x.jsonl";
  REQUIRE(run("gen two-sample --n 12 --seed 31 --out " + x.string()) == 0);
  const auto out = dir / "fmt.csv";
  REQUIRE(run("two-sample " + x.string() + " " + x.string() +
              " --no-tune --permutations 20 --features 8 --format csv --out " + out.string()) ==
          0);
  const auto text = slurp(out);
  REQUIRE(text.find("statistic,p_value,reject") != std::string::npos);
}
