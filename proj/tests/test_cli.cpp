#include <doctest.h>

#include <pairlasso/dataset.hpp>
#include <pairlasso/model_io.hpp>
#include <pairlasso/parallel.hpp>
#include <pairlasso/solver.hpp>

#include "oracles.hpp"

#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace pairlasso;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  fs::path dir = fs::path(PAIRLASSO_TEST_TMP) / "cli";
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PAIRLASSO_CLI_PATH) + " " + args + " >" +
                          (tmp_dir() / "last_stdout.txt").string() + " 2>" +
                          (tmp_dir() / "last_stderr.txt").string();
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return std::string(std::istreambuf_iterator<char>(f), {});
}

// deterministic training fixture: one categorical, two continuous columns
std::string write_fixture(const std::string& name, int n, bool binomial) {
  std::mt19937_64 rng(404);
  std::ostringstream out;
  out << "y,g,x1,x2\n";
  for (int r = 0; r < n; ++r) {
    const int g = 1 + static_cast<int>(oracle::u01(rng) * 3);
    const double x1 = oracle::std_normal(rng);
    const double x2 = oracle::std_normal(rng);
    double eta = 0.8 * x1 - 0.5 * x2 + 0.6 * (g == 2) + 1.2 * x1 * x2;
    double y;
    if (binomial) {
      const double p = 1.0 / (1.0 + std::exp(-eta));
      y = oracle::u01(rng) < p ? 1.0 : 0.0;
    } else {
      y = eta + 0.3 * oracle::std_normal(rng);
    }
    out << format_double(y) << ',' << g << ',' << format_double(x1) << ','
        << format_double(x2) << "\n";
  }
  const fs::path path = tmp_dir() / name;
  std::ofstream f(path);
  f << out.str();
  return path.string();
}

}  // namespace

TEST_CASE("thread budget resolution") {
  unsetenv("PAIRLASSO_THREADS");
  CHECK(thread_budget(3) == 3);
  CHECK(thread_budget(0) >= 1);
  setenv("PAIRLASSO_THREADS", "2", 1);
  CHECK(thread_budget(0) == 2);
  CHECK(thread_budget(5) == 5);  // explicit request wins over the env
  setenv("PAIRLASSO_THREADS", "junk", 1);
  CHECK(thread_budget(0) >= 1);
  unsetenv("PAIRLASSO_THREADS");
}

TEST_CASE("parallel_for covers the range exactly once") {
  for (int threads : {1, 2, 4}) {
    const std::size_t n = 10007;
    std::vector<std::atomic<int>> hits(n);
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) hits[i].fetch_add(1);
    });
    for (std::size_t i = 0; i < n; ++i) REQUIRE(hits[i].load() == 1);
  }
  // empty ranges are fine
  parallel_for(0, 4, [&](std::size_t, std::size_t) { FAIL("must not be called"); });
}

TEST_CASE("fit writes the full output set and is byte-reproducible") {
  const std::string data = write_fixture("train.csv", 60, false);
  const std::string schema = "g:cat:3,x1:cont,x2:cont";
  const fs::path out1 = tmp_dir() / "fit1";

  const std::string flags = " --schema " + schema +
                            " --family gaussian --nlambda 12 --lambda-min-ratio 0.05"
                            " --seed 9 --threads 1 --out ";
  REQUIRE(run_cli("fit --data " + data + flags + out1.string()) == 0);

  const char* names[] = {"path_summary.csv", "screen_audit.csv", "discoveries.csv",
                         "model.json"};
  std::vector<std::string> first;
  for (const char* name : names) {
    REQUIRE(fs::exists(out1 / name));
    first.push_back(slurp(out1 / name));
  }
  // identical config + seed must reproduce every byte
  REQUIRE(run_cli("fit --data " + data + flags + out1.string()) == 0);
  for (std::size_t k = 0; k < first.size(); ++k) {
    CAPTURE(names[k]);
    CHECK(slurp(out1 / names[k]) == first[k]);
  }

  // provenance lines carry the resolved configuration
  const std::string summary = slurp(out1 / "path_summary.csv");
  CHECK(summary.rfind("# pairlasso config=", 0) == 0);
  CHECK(summary.find("\"command\":\"fit\"") != std::string::npos);
  CHECK(summary.find("\"nlambda\":12") != std::string::npos);
  CHECK(summary.find("\"screen\":\"strong\"") != std::string::npos);

  SUBCASE("predict on the training file matches the stored model") {
    const fs::path pout = tmp_dir() / "pred";
    REQUIRE(run_cli("predict --model " + (out1 / "model.json").string() + " --data " + data +
                    " --out " + pout.string()) == 0);
    const SavedModel model = read_model_json((out1 / "model.json").string());
    const Dataset raw = load_csv(data, model.schema, model.response, model.family);
    const Dataset ds = apply_standardization(raw, model.standardization);
    const Eigen::VectorXd eta = predict_linear(model.fit, model.groups, ds);

    std::ifstream f(pout / "predictions.csv");
    REQUIRE(f.good());
    std::string line;
    std::getline(f, line);  // provenance
    CHECK(line.rfind("# pairlasso config=", 0) == 0);
    std::getline(f, line);
    CHECK(line == "row,prediction");
    Eigen::Index r = 0;
    while (std::getline(f, line)) {
      const auto comma = line.find(',');
      REQUIRE(comma != std::string::npos);
      REQUIRE(r < eta.size());
      CHECK(std::strtod(line.c_str() + comma + 1, nullptr) == eta[r]);
      ++r;
    }
    CHECK(r == eta.size());

    SUBCASE("feature-only input predicts the same values") {
      // drop the response column from the file
      std::ifstream in(data);
      std::string header;
      std::getline(in, header);
      REQUIRE(header.rfind("y,", 0) == 0);
      std::ofstream nf(tmp_dir() / "features.csv");
      nf << header.substr(2) << "\n";
      while (std::getline(in, line)) nf << line.substr(line.find(',') + 1) << "\n";
      nf.close();
      const fs::path pout2 = tmp_dir() / "pred2";
      REQUIRE(run_cli("predict --model " + (out1 / "model.json").string() + " --data " +
                      (tmp_dir() / "features.csv").string() + " --out " + pout2.string()) == 0);
      // identical predictions modulo the provenance line's data path
      const std::string a = slurp(pout / "predictions.csv");
      const std::string b = slurp(pout2 / "predictions.csv");
      CHECK(a.substr(a.find('\n')) == b.substr(b.find('\n')));
    }
  }
}

TEST_CASE("binomial fit round trips through the CLI") {
  const std::string data = write_fixture("train_b.csv", 80, true);
  const fs::path out = tmp_dir() / "fit_b";
  REQUIRE(run_cli("fit --data " + data +
                  " --schema g:cat:3,x1:cont,x2:cont --family binomial --nlambda 10"
                  " --lambda-min-ratio 0.1 --out " +
                  out.string()) == 0);
  const SavedModel model = read_model_json((out / "model.json").string());
  CHECK(model.family == Family::binomial);

  const fs::path pout = tmp_dir() / "pred_b";
  REQUIRE(run_cli("predict --model " + (out / "model.json").string() + " --data " + data +
                  " --out " + pout.string()) == 0);
  std::ifstream f(pout / "predictions.csv");
  std::string line;
  std::getline(f, line);
  std::getline(f, line);
  CHECK(line == "row,linear,probability");
  int rows = 0;
  while (std::getline(f, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const double prob = std::strtod(line.c_str() + c2 + 1, nullptr);
    CHECK(prob > 0.0);
    CHECK(prob < 1.0);
    ++rows;
  }
  CHECK(rows == 80);
}

TEST_CASE("simulate writes curves, baseline and runs deterministically") {
  const fs::path design = tmp_dir() / "design.json";
  std::ofstream(design) << R"({"n": 100, "p": 8, "kind": "cont", "truth": "strong",
                              "n_main": 3, "n_int": 2, "snr": 3.0, "seed": 5,
                              "replicates": 3, "k_max": 2})";
  const fs::path out1 = tmp_dir() / "sim1";
  const std::string flags = " --nlambda 40 --lambda-min-ratio 0.01 --out ";
  REQUIRE(run_cli("simulate --design " + design.string() + flags + out1.string()) == 0);

  const char* names[] = {"fdr_curve.csv", "fdr_baseline.csv", "runs.csv"};
  std::vector<std::string> first;
  for (const char* name : names) {
    REQUIRE(fs::exists(out1 / name));
    first.push_back(slurp(out1 / name));
  }
  REQUIRE(run_cli("simulate --design " + design.string() + flags + out1.string()) == 0);
  for (std::size_t k = 0; k < first.size(); ++k) {
    CAPTURE(names[k]);
    CHECK(slurp(out1 / names[k]) == first[k]);
  }
  const std::string curve = slurp(out1 / "fdr_curve.csv");
  CHECK(curve.find("\"design\":{") != std::string::npos);
  CHECK(curve.find("\"truth\":\"strong\"") != std::string::npos);
  CHECK(curve.find("k,mean_fdr,se") != std::string::npos);

  SUBCASE("--seed overrides the design seed") {
    const fs::path out3 = tmp_dir() / "sim3";
    REQUIRE(run_cli("simulate --design " + design.string() + " --seed 77" + flags +
                    out3.string()) == 0);
    CHECK(slurp(out3 / "fdr_curve.csv") != slurp(out1 / "fdr_curve.csv"));
    CHECK(slurp(out3 / "fdr_curve.csv").find("\"seed\":77") != std::string::npos);
  }
}

TEST_CASE("exit codes distinguish usage, data and convergence failures") {
  const std::string data = write_fixture("codes.csv", 30, false);

  SUBCASE("usage errors exit 1") {
    CHECK(run_cli("fit --schema g:cat:3 --out x") == 1);             // missing --data
    CHECK(run_cli("fit --data " + data + " --schema g:cat:3,x1:cont,x2:cont") == 1);  // no --out
    CHECK(run_cli("fit --data " + data +
                  " --schema g:cat:3,x1:cont,x2:cont --family poisson --out x") == 1);
    CHECK(run_cli("fit --data " + data +
                  " --schema g:cat:3,x1:cont,x2:cont --screen sometimes --out x") == 1);
    CHECK(run_cli("nonsense") == 1);
    CHECK(run_cli("fit --data " + data + " --schema g:cat:nope,x1:cont,x2:cont --out " +
                  (tmp_dir() / "e1").string()) == 1);  // malformed schema
  }

  SUBCASE("data errors exit 2") {
    CHECK(run_cli("fit --data /nonexistent.csv --schema g:cat:3,x1:cont,x2:cont --out " +
                  (tmp_dir() / "e2").string()) == 2);
    // schema misses a column -> two response candidates
    CHECK(run_cli("fit --data " + data + " --schema g:cat:3,x1:cont --out " +
                  (tmp_dir() / "e3").string()) == 2);
    // binomial family on a non-0/1 response
    CHECK(run_cli("fit --data " + data +
                  " --schema g:cat:3,x1:cont,x2:cont --family binomial --out " +
                  (tmp_dir() / "e4").string()) == 2);
    CHECK(run_cli("predict --model /nonexistent.json --data " + data + " --out " +
                  (tmp_dir() / "e5").string()) == 2);
  }

  SUBCASE("help exits 0") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("fit --help") == 0);
  }

  SUBCASE("an exhausted iteration budget exits 3") {
    // nearly collinear columns at a vanishing lambda starve the solver
    std::mt19937_64 rng(11);
    std::ofstream f(tmp_dir() / "hard.csv");
    f << "y,x1,x2\n";
    for (int r = 0; r < 40; ++r) {
      const double x1 = oracle::std_normal(rng);
      const double x2 = x1 + 1e-9 * oracle::std_normal(rng);
      const double y = x1 - x2 + 0.1 * oracle::std_normal(rng);
      f << format_double(y) << ',' << format_double(x1) << ',' << format_double(x2) << "\n";
    }
    f.close();
    CHECK(run_cli("fit --data " + (tmp_dir() / "hard.csv").string() +
                  " --schema x1:cont,x2:cont --nlambda 3 --lambda-min-ratio 1e-12 --out " +
                  (tmp_dir() / "e6").string()) == 3);
  }
}
