#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "grape/experiments.hpp"
#include "grape/random.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace grape;
namespace fs = std::filesystem;

namespace {

ResultRow row(double beta, std::int64_t trial, std::int64_t step, double value, double alpha = 0.9) {
  ResultRow r;
  r.experiment = "frozenlake-control";
  r.env = "frozenlake8x8";
  r.alpha = alpha;
  r.lambda = 0.0;
  r.beta = beta;
  r.n = 250;
  r.trial = trial;
  r.step = step;
  r.metric = "success_probability";
  r.value = value;
  return r;
}

// Rows of one beta whose curve is `values` for every trial.
void add_curve(std::vector<ResultRow>& rows, double beta, const std::vector<double>& values, int trials = 2) {
  for (int t = 0; t < trials; ++t)
    for (std::size_t k = 0; k < values.size(); ++k) rows.push_back(row(beta, t, static_cast<std::int64_t>(k), values[k]));
}

ExperimentConfig small_nchain() {
  ExperimentConfig c;
  c.kind = ExperimentKind::kNChainEval;
  c.algo = "grape";
  c.alpha = {0.5, 0.9};
  c.lambda = {0.0};
  c.slip = 0.2;
  c.blocks = 20;
  c.block_size = 50;
  c.trials = 3;
  c.seed = 7;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + GRAPE_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("grape_harness_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("csv") {
  TEST_CASE("round trip recovers rows exactly") {
    std::vector<ResultRow> rows;
    ResultRow a = row(0.1, 0, 0, 0.1 + 0.2);
    ResultRow b;
    b.experiment = "variance-limit";
    b.alpha = 0.99;
    b.step = 2000;
    b.metric = "limit";
    b.value = 1.0 / 3.0;
    ResultRow c = row(100, 3, 7, -1e-300);
    c.eta = 0.5;
    c.sigma = 0.0;
    c.value = 5e-324;
    rows = {a, b, c};
    std::stringstream ss;
    write_csv(ss, rows);
    const std::string text = ss.str();
    CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    CHECK(read_csv(ss) == rows);
  }

  TEST_CASE("numbers use 17 significant digits") {
    CHECK(format_real(0.8) == "0.80000000000000004");
    CHECK(std::stod(format_real(0.1 + 0.2)) == 0.1 + 0.2);
  }

  TEST_CASE("malformed input is rejected") {
    std::stringstream bad_header("experiment,env\n");
    CHECK_THROWS(read_csv(bad_header));
    std::stringstream bad_number(std::string(kCsvHeader) + "\nx,y,abc,,,,,,0,0,m,1\n");
    CHECK_THROWS(read_csv(bad_number));
    std::stringstream short_row(std::string(kCsvHeader) + "\nx,y,,,\n");
    CHECK_THROWS(read_csv(short_row));
  }
}

TEST_SUITE("statistics") {
  TEST_CASE("summary examples") {
    const std::vector<double> one{4.5};
    const Summary s1 = summarize(one);
    CHECK(s1.mean == 4.5);
    CHECK(s1.median == 4.5);
    CHECK(s1.stderr_mean == 0.0);
    const std::vector<double> three{3, 1, 2};
    const Summary s3 = summarize(three);
    CHECK(s3.mean == 2.0);
    CHECK(s3.median == 2.0);
    CHECK(s3.stderr_mean == doctest::Approx(0.5774).epsilon(1e-4));
    CHECK(s3.n == 3);
  }

  TEST_CASE("interpolated percentiles") {
    const std::vector<double> v{0, 10, 20, 30, 40};
    CHECK(percentile(v, 0.5) == 20.0);
    CHECK(percentile(v, 0.025) == doctest::Approx(1.0));
    CHECK(percentile(v, 0.975) == doctest::Approx(39.0));
    CHECK(percentile(v, 0.0) == 0.0);
    CHECK(percentile(v, 1.0) == 40.0);
    CHECK_THROWS_AS(percentile(std::vector<double>{}, 0.5), std::invalid_argument);
  }

  TEST_CASE("median of normal draws") {
    Rng rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(100);
    for (double& x : v) x = n(rng);
    CHECK(std::abs(summarize(v).median) <= 0.3);
  }

  TEST_CASE("aggregate groups by keys, metric and step") {
    std::vector<ResultRow> rows;
    add_curve(rows, 1.0, {0.1, 0.2}, 3);
    add_curve(rows, 2.0, {0.3, 0.4}, 1);
    const std::vector<GroupKey> keys = all_group_keys();
    const std::vector<SummaryRow> s = aggregate(rows, keys);
    REQUIRE(s.size() == 4);
    CHECK(s[0].key.beta == 1.0);
    CHECK(s[0].step == 0);
    CHECK(s[0].stats.n == 3);
    CHECK(s[0].stats.mean == doctest::Approx(0.1));
    CHECK(s[3].key.beta == 2.0);
    CHECK(s[3].stats.n == 1);
    const std::vector<GroupKey> coarse{GroupKey::kExperiment};
    const std::vector<SummaryRow> merged = aggregate(rows, coarse);
    REQUIRE(merged.size() == 2);
    CHECK(merged[1].stats.n == 4);
    CHECK_THROWS_AS(aggregate(std::vector<ResultRow>{}, keys), std::invalid_argument);
  }

  TEST_CASE("summary csv header") {
    std::vector<ResultRow> rows;
    add_curve(rows, 1.0, {0.5});
    std::stringstream ss;
    write_summary_csv(ss, aggregate(rows, all_group_keys()));
    std::string header;
    std::getline(ss, header);
    CHECK(header == "experiment,env,alpha,lambda,eta,beta,sigma,N,step,metric,n,mean,stderr,median,p2.5,p97.5");
  }
}

TEST_SUITE("beta selection") {
  TEST_CASE("single beta") {
    std::vector<ResultRow> rows;
    add_curve(rows, 5.0, {0.1, 0.2, 0.3});
    const auto best = select_best_beta(rows);
    REQUIRE(best.size() == 1);
    CHECK(best[0].beta == 5.0);
    CHECK(best[0].final_mean == doctest::Approx(0.3));
  }

  TEST_CASE("higher late performance wins") {
    std::vector<ResultRow> rows;
    add_curve(rows, 1.0, {0.0, 0.9, 0.6, 0.6, 0.6, 0.6});
    add_curve(rows, 2.0, {0.0, 0.1, 0.8, 0.8, 0.8, 0.8});
    const auto best = select_best_beta(rows);
    REQUIRE(best.size() == 1);
    CHECK(best[0].beta == 2.0);
    CHECK(best[0].score == doctest::Approx(0.8));
  }

  TEST_CASE("score averages the final 20% of updates") {
    std::vector<ResultRow> rows;
    // Ten updates: the window is steps 9 and 10, so the last value alone does not decide.
    add_curve(rows, 1.0, {0, 0, 0, 0, 0, 0, 0, 0, 0.9, 0.9, 0.0});
    add_curve(rows, 2.0, {0, 0, 0, 0, 0, 0, 0, 0, 0.1, 0.1, 0.5});
    const auto best = select_best_beta(rows);
    CHECK(best[0].beta == 1.0);
    CHECK(best[0].score == doctest::Approx(0.45));
  }

  TEST_CASE("ties go to the larger final mean, then the smaller beta") {
    std::vector<ResultRow> rows;
    add_curve(rows, 1.0, {0, 0, 0, 0, 0, 0.75, 0.25});
    add_curve(rows, 2.0, {0, 0, 0, 0, 0, 0.25, 0.75});
    CHECK(select_best_beta(rows)[0].beta == 2.0);
    rows.clear();
    add_curve(rows, 3.0, {0.0, 0.5});
    add_curve(rows, 0.5, {0.0, 0.5});
    CHECK(select_best_beta(rows)[0].beta == 0.5);
  }

  TEST_CASE("groups are kept apart and grids are enforced") {
    std::vector<ResultRow> rows;
    add_curve(rows, 1.0, {0.0, 0.5});
    for (const ResultRow& r : std::vector<ResultRow>(rows)) {
      ResultRow other = r;
      other.alpha = 0.5;
      other.beta = 2.0;
      rows.push_back(other);
    }
    CHECK(select_best_beta(rows).size() == 2);
    CHECK_THROWS_AS(select_best_beta(rows, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("single grid point and one trial") {
    ExperimentConfig c = small_nchain();
    c.alpha = {0.9};
    c.trials = 1;
    const auto rows = run_experiment(c);
    CHECK(rows.size() == 21);
    CHECK(run_count(c) == 1);
    for (const auto& r : rows) {
      CHECK(r.experiment == "nchain-eval");
      CHECK(r.env == "nchain");
      CHECK(r.alpha == 0.9);
      CHECK_FALSE(r.eta.has_value());
      CHECK(r.trial == 0);
    }
  }

  TEST_CASE("two alphas times three trials") {
    const ExperimentConfig c = small_nchain();
    const auto rows = run_experiment(c);
    CHECK(run_count(c) == 6);
    CHECK(rows.size() == 6 * 21);
    std::set<std::pair<double, std::int64_t>> runs;
    for (const auto& r : rows) runs.insert({*r.alpha, r.trial});
    CHECK(runs.size() == 6);
  }

  TEST_CASE("determinism across thread counts and trial independence") {
    ExperimentConfig c = small_nchain();
    c.threads = 1;
    const auto serial = run_experiment(c);
    c.threads = 4;
    CHECK(run_experiment(c) == serial);

    c.trials = 2;
    const auto fewer = run_experiment(c);
    std::vector<ResultRow> kept;
    for (const auto& r : serial)
      if (r.trial != 2) kept.push_back(r);
    CHECK(fewer == kept);
  }

  TEST_CASE("outputs are written and byte-identical on rerun") {
    ExperimentConfig c = small_nchain();
    c.out = scratch("outputs");
    const auto paths = write_outputs(c, run_and_summarize(c));
    REQUIRE(paths.size() == 2);
    const std::string first = slurp(paths[0]);
    write_outputs(c, run_and_summarize(c));
    CHECK(slurp(paths[0]) == first);
    std::ifstream is(paths[0]);
    CHECK(read_csv(is) == run_experiment(c));
    fs::remove_all(c.out);
  }

  TEST_CASE("invalid configurations name the field") {
    ExperimentConfig c = small_nchain();
    c.trials = 0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("trials"), ConfigError);
    c = small_nchain();
    c.alpha = {};
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("alpha"), ConfigError);
    c = small_nchain();
    c.alpha = {1.2};
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("alpha"), ConfigError);
    c = small_nchain();
    c.eta = {0.5};
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("eta"), ConfigError);
    c = small_nchain();
    c.algo = "sarsa";
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("algo"), ConfigError);
    c = small_nchain();
    c.slip = 0.7;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("slip"), ConfigError);

    ExperimentConfig lake;
    lake.kind = ExperimentKind::kFrozenLakeControl;
    lake.alpha = {0.9};
    lake.lambda = {0.0};
    CHECK_THROWS_WITH_AS(lake.validate(), doctest::Contains("beta"), ConfigError);
    lake.beta = {1.0};
    lake.steps = 10;
    CHECK_THROWS_WITH_AS(lake.validate(), doctest::Contains("steps"), ConfigError);

    ExperimentConfig dp;
    dp.kind = ExperimentKind::kDpNoise;
    dp.algo = "retrace";
    CHECK_THROWS_WITH_AS(dp.validate(), doctest::Contains("sigma"), ConfigError);
    dp.sigma = {0.1};
    dp.env = "cartpole";
    CHECK_THROWS_WITH_AS(dp.validate(), doctest::Contains("env"), ConfigError);
  }

  TEST_CASE("error decay and variance rows") {
    ExperimentConfig c;
    c.kind = ExperimentKind::kErrorDecay;
    c.alpha = {0.0, 0.99};
    c.delta = 0.5;
    c.horizon = 50;
    const auto rows = run_experiment(c);
    CHECK(rows.size() == 100);
    CHECK(rows.front().step == 0);
    CHECK(rows[50].alpha == 0.99);

    ExperimentConfig v;
    v.kind = ExperimentKind::kVarianceLimit;
    v.alpha = {0.99};
    v.k = 200;
    v.samples = 2000;
    const auto vr = run_experiment(v);
    REQUIRE(vr.size() == 3);
    CHECK(vr[2].metric == "limit");
    CHECK(vr[2].value == doctest::Approx(0.01 / 1.99));
  }
}

TEST_SUITE("command line") {
  TEST_CASE("exit codes") {
    const fs::path dir = scratch("cli");
    const std::string out = " --out \"" + dir.string() + "\"";
    CHECK(cli("error-decay --alpha 0 0.9 --K 20" + out) == 0);
    CHECK(fs::exists(dir / "error-decay.csv"));
    CHECK(cli("error-decay --alpha 1.5" + out) == 1);
    CHECK(cli("error-decay" + out) == 1);
    CHECK(cli("no-such-command") == 1);
    CHECK(cli("dp-noise --sigma 0.1 --env nowhere" + out) == 1);
    CHECK(cli("verify --suite nonsense") == 1);
    fs::remove_all(dir);
  }

  TEST_CASE("config file sections, flag overrides and unknown keys") {
    const fs::path dir = scratch("config");
    const fs::path ini = dir / "run.ini";
    {
      std::ofstream os(ini);
      os << "[error-decay]\nalpha = 0.5\nK = 7\nout = " << (dir / "a").string() << "\n";
    }
    CHECK(cli("--config \"" + ini.string() + "\" error-decay") == 0);
    std::ifstream is(dir / "a" / "error-decay.csv");
    CHECK(read_csv(is).size() == 7);
    CHECK(cli("--config \"" + ini.string() + "\" error-decay --K 9") == 0);
    std::ifstream is2(dir / "a" / "error-decay.csv");
    CHECK(read_csv(is2).size() == 9);
    {
      std::ofstream os(ini);
      os << "[error-decay]\nalpha = 0.5\nhorizon_typo = 7\n";
    }
    CHECK(cli("--config \"" + ini.string() + "\" error-decay") == 1);
    fs::remove_all(dir);
  }
}
