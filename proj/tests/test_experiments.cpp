#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfmimo/config_file.hpp"
#include "cfmimo/errors.hpp"
#include "cfmimo/experiments.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace cfmimo;

namespace {

ScenarioConfig tiny_config() {
  ScenarioConfig c;
  c.M = 6;
  c.N = 2;
  c.K = 4;
  c.K1 = 1;
  c.tau = 3;
  c.sinr_targets = {1.0};
  c.seed = 17;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("percentiles: stated interpolation convention") {
  CHECK(percentile({3.0}, 10) == 3.0);
  CHECK(percentile({1.0, 2.0}, 50) == doctest::Approx(1.5));
  CHECK(percentile({1.0, 2.0}, 0) == doctest::Approx(1.0));
  CHECK(percentile({1.0, 2.0}, 100) == doctest::Approx(2.0));
  CHECK_THROWS_AS(percentile({}, 50), EmptyInput);

  // 100 synthetic values vs the sort-and-index reference.
  Rng rng(9);
  std::vector<double> vals(100);
  for (auto& v : vals) v = rng.normal() * 3.0 + 1.0;
  std::vector<double> sorted = vals;
  std::sort(sorted.begin(), sorted.end());
  for (double p : {5.0, 10.0, 50.0, 90.0})
    CHECK(percentile(sorted, p) == doctest::Approx(oracles::sort_percentile(vals, p)));
}

TEST_CASE("summarize: single record and empty input") {
  DropRecord r;
  r.status = SolveStatus::Optimal;
  r.sinr = Eigen::VectorXd::Constant(4, 1.0);
  r.rate = Eigen::VectorXd::Constant(4, 1.0);
  r.q = Eigen::VectorXd::Constant(4, 1.0);
  r.iterations = 3;
  const Summary s = summarize({r}, 1);
  CHECK(s.min_rate_p5 == doctest::Approx(1.0));
  CHECK(s.min_rate_p10 == doctest::Approx(1.0));
  CHECK(s.min_rate_p50 == doctest::Approx(1.0));
  CHECK(s.min_rate_p90 == doctest::Approx(1.0));
  CHECK(s.infeasible_fraction == 0.0);
  CHECK_THROWS_AS(summarize({}, 1), EmptyInput);
}

TEST_CASE("experiment artifacts: schema, determinism, consistency") {
  TempDir dir_a("cfmimo_test_run_a");
  TempDir dir_b("cfmimo_test_run_b");
  ExperimentSpec spec;
  spec.scenario = tiny_config();
  spec.n_drops = 3;
  spec.benchmark = true;
  spec.output_dir = dir_a.path.string();
  spec.workers = 2;
  const ExperimentResult result = run_experiment(spec);
  REQUIRE(static_cast<int>(result.records.size()) == 3);
  REQUIRE(static_cast<int>(result.benchmark_records.size()) == 3);

  // Same config and seed, different worker count: byte-identical CSVs.
  spec.output_dir = dir_b.path.string();
  spec.workers = 1;
  run_experiment(spec);
  for (const char* name : {"drops.csv", "drops_benchmark.csv", "cdf_min_rate.csv",
                           "cdf_user_rate.csv"}) {
    CHECK(slurp(dir_a.path / name) == slurp(dir_b.path / name));
  }

  // CSV header matches the documented schema.
  {
    std::ifstream in(dir_a.path / "drops.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "# cfmimo.drops.v1");
    std::getline(in, line);
    CHECK(line ==
          "drop,status,t_star,iters,sinr_0,sinr_1,sinr_2,sinr_3,"
          "rate_0,rate_1,rate_2,rate_3,q_0,q_1,q_2,q_3");
    int rows = 0;
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 3);
  }

  // Record-level invariants.
  for (const auto& r : result.records) {
    if (r.status == SolveStatus::Optimal) {
      for (int k = 0; k < 4; ++k)
        CHECK(r.rate[k] == doctest::Approx(std::log2(1.0 + r.sinr[k])).epsilon(1e-12));
    } else {
      CHECK(r.rate.cwiseAbs().maxCoeff() == 0.0);
      CHECK(r.sinr.cwiseAbs().maxCoeff() == 0.0);
    }
  }

  // CDF files are non-decreasing in both columns.
  for (const char* name : {"cdf_min_rate.csv", "cdf_user_rate.csv"}) {
    std::ifstream in(dir_a.path / name);
    std::string line;
    std::getline(in, line);  // header
    double pv = -1e300, pc = -1;
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      const double v = std::stod(line.substr(0, comma));
      const double cdfv = std::stod(line.substr(comma + 1));
      CHECK(v >= pv);
      CHECK(cdfv >= pc);
      pv = v;
      pc = cdfv;
    }
    CHECK(pc == doctest::Approx(1.0));
  }

  // Round trip through records.jsonl, then summarize.
  int K1 = -1;
  const auto loaded = load_records(dir_a.path.string(), K1);
  CHECK(K1 == 1);
  REQUIRE(loaded.size() == result.records.size());
  for (size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].t_star == result.records[i].t_star);
    CHECK((loaded[i].q - result.records[i].q).cwiseAbs().maxCoeff() == 0.0);
  }
  const Summary s = summarize(loaded, K1);
  CHECK(s.n_records == 3);

  // Convergence traces exist, one per drop.
  CHECK(fs::exists(dir_a.path / "convergence" / "drop_00000.csv"));
  CHECK(fs::exists(dir_a.path / "convergence" / "drop_00002.csv"));
}

TEST_CASE("infeasible drops contribute zero rates to the CDF inputs") {
  std::vector<DropRecord> records(2);
  records[0].status = SolveStatus::Optimal;
  records[0].rate = Eigen::VectorXd::Constant(3, 2.0);
  records[0].sinr = Eigen::VectorXd::Constant(3, 3.0);
  records[0].q = Eigen::VectorXd::Constant(3, 1.0);
  records[1].status = SolveStatus::InfeasibleRtuTargets;
  records[1].rate = Eigen::VectorXd::Zero(3);
  records[1].sinr = Eigen::VectorXd::Zero(3);
  records[1].q = Eigen::VectorXd::Zero(3);
  const Summary s = summarize(records, 1);
  CHECK(s.infeasible_fraction == doctest::Approx(0.5));
  CHECK(s.min_rate_p5 < 2.0 * 0.1);  // dragged down by the zero drop
}

TEST_CASE("config file: load, overrides, broadcast, errors") {
  const fs::path path = fs::temp_directory_path() / "cfmimo_test.cfg";
  {
    std::ofstream out(path);
    out << "# comment line\n";
    out << "M = 10\n";
    out << "N = 2\n";
    out << "K = 5\n";
    out << "K1 = 3\n";
    out << "tau = 4\n";
    out << "sinr_targets = 1.5\n";  // broadcasts to all three RTUs
    out << "pathloss = simple_exponent\n";
    out << "pl_exponent = 3.0\n";
    out << "wraparound = false\n";
    out << "seed = 99\n";
  }
  const ScenarioConfig c = load_config_file(path.string());
  CHECK(c.M == 10);
  CHECK(c.K1 == 3);
  REQUIRE(c.sinr_targets.size() == 3);
  CHECK(c.sinr_targets[2] == doctest::Approx(1.5));
  CHECK(c.pathloss.kind == PathLossKind::SimpleExponent);
  CHECK(c.wraparound == false);
  CHECK(c.seed == 99);
  c.validate();

  ScenarioConfig o = c;
  apply_override(o, "data_power_mw=100");
  CHECK(o.data_power_mw == doctest::Approx(100.0));
  CHECK_THROWS_AS(apply_override(o, "no_such_key=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(o, "M=abc"), ConfigError);
  CHECK_THROWS_AS(apply_override(o, "garbage"), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/path.cfg"), IoError);

  {
    std::ofstream out(path);
    out << "K1 = 0\n";  // clears the default targets
  }
  const ScenarioConfig z = load_config_file(path.string());
  CHECK(z.sinr_targets.empty());
  z.validate();
  fs::remove(path);
}

TEST_CASE("pilot book dump writes tau rows") {
  Rng rng(4);
  const PilotBook book = generate_pilots(3, 2, PilotMode::RandomUnitNorm, rng);
  const fs::path path = fs::temp_directory_path() / "cfmimo_pilots.csv";
  dump_pilots_csv(book, path.string());
  std::ifstream in(path);
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
  fs::remove(path);
}
