#include "cfmimo/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "cfmimo/config_file.hpp"
#include "cfmimo/errors.hpp"

namespace fs = std::filesystem;

namespace cfmimo {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

DropRecord to_record(int drop, const Solution& sol, double wall_s) {
  DropRecord r;
  r.drop_index = drop;
  r.status = sol.status;
  r.t_star = sol.t_star;
  r.sinr = sol.per_user_sinr;
  r.rate = sol.per_user_rate;
  r.q = sol.q;
  r.iterations = sol.iterations;
  r.wall_time_s = wall_s;
  return r;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot open " + p.string());
  return out;
}

void write_drops_csv(const fs::path& path, const std::vector<DropRecord>& records,
                     int K) {
  auto out = open_out(path);
  out << "# cfmimo.drops.v1\n";
  out << "drop,status,t_star,iters";
  for (int k = 0; k < K; ++k) out << ",sinr_" << k;
  for (int k = 0; k < K; ++k) out << ",rate_" << k;
  for (int k = 0; k < K; ++k) out << ",q_" << k;
  out << '\n';
  for (const auto& r : records) {
    out << r.drop_index << ',' << to_string(r.status) << ','
        << fmt_double(r.t_star) << ',' << r.iterations;
    for (int k = 0; k < K; ++k) out << ',' << fmt_double(r.sinr[k]);
    for (int k = 0; k < K; ++k) out << ',' << fmt_double(r.rate[k]);
    for (int k = 0; k < K; ++k) out << ',' << fmt_double(r.q[k]);
    out << '\n';
    if (!out) throw IoError("failed writing record for drop " +
                            std::to_string(r.drop_index));
  }
}

void write_records_jsonl(const fs::path& path,
                         const std::vector<DropRecord>& records) {
  auto out = open_out(path);
  for (const auto& r : records) {
    nlohmann::json j;
    j["drop"] = r.drop_index;
    j["status"] = to_string(r.status);
    j["t_star"] = r.t_star;
    j["iters"] = r.iterations;
    j["sinr"] = std::vector<double>(r.sinr.data(), r.sinr.data() + r.sinr.size());
    j["rate"] = std::vector<double>(r.rate.data(), r.rate.data() + r.rate.size());
    j["q"] = std::vector<double>(r.q.data(), r.q.data() + r.q.size());
    j["wall_time_s"] = r.wall_time_s;
    out << j.dump() << '\n';
    if (!out) throw IoError("failed writing record for drop " +
                            std::to_string(r.drop_index));
  }
}

void write_cdf_csv(const fs::path& path, std::vector<double> values) {
  std::sort(values.begin(), values.end());
  auto out = open_out(path);
  out << "value,cdf\n";
  const double n = static_cast<double>(values.size());
  for (size_t i = 0; i < values.size(); ++i)
    out << fmt_double(values[i]) << ',' << fmt_double((i + 1) / n) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<double> min_rates(const std::vector<DropRecord>& records, int K1) {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) {
    const int K = static_cast<int>(r.rate.size());
    if (K1 >= K) continue;
    v.push_back(r.rate.tail(K - K1).minCoeff());
  }
  return v;
}

std::vector<double> all_rates(const std::vector<DropRecord>& records) {
  std::vector<double> v;
  for (const auto& r : records)
    v.insert(v.end(), r.rate.data(), r.rate.data() + r.rate.size());
  return v;
}

}  // namespace

DropInputs make_drop_inputs(const ScenarioConfig& config, int drop_index) {
  config.validate();
  DropInputs in;
  Rng geo_rng(Rng::derive(config.seed, drop_index, 0));
  const NetworkGeometry geom = generate_geometry(config, geo_rng);
  in.lsm = large_scale_fading(geom, config, geo_rng);
  Rng pilot_rng(Rng::derive(config.seed, drop_index, 1));
  in.pilots = generate_pilots(config.K, config.tau, config.pilot_mode, pilot_rng);
  in.snrs = normalized_snrs(config);
  in.stats = estimation_stats(in.lsm, in.pilots, in.snrs.pilot, config.tau);
  return in;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.scenario.validate();
  if (spec.n_drops < 1) throw ConfigError("n_drops must be >= 1");
  const int K = spec.scenario.K;

  ExperimentResult result;
  result.records.resize(spec.n_drops);
  result.traces.resize(spec.n_drops);
  if (spec.benchmark) result.benchmark_records.resize(spec.n_drops);

  parallel_for(spec.n_drops, spec.workers, [&](int i) {
    const auto t0 = std::chrono::steady_clock::now();
    const DropInputs in = make_drop_inputs(spec.scenario, i);
    const Solution sol = run(in.stats, in.pilots, spec.scenario);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.records[i] = to_record(i, sol, wall);
    result.traces[i] = sol.trace;
    if (spec.benchmark) {
      const auto b0 = std::chrono::steady_clock::now();
      const Solution bench = run_benchmark_u1(in.stats, in.pilots, spec.scenario);
      const double bwall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - b0).count();
      result.benchmark_records[i] = to_record(i, bench, bwall);
    }
  });

  if (spec.output_dir.empty()) return result;

  const fs::path dir(spec.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());

  {
    nlohmann::json meta;
    meta["schema"] = "cfmimo.experiment.v1";
    meta["n_drops"] = spec.n_drops;
    meta["benchmark"] = spec.benchmark;
    meta["config"] = config_to_json(spec.scenario);
    auto out = open_out(dir / "metadata.json");
    out << meta.dump(2) << '\n';
  }
  if (spec.outputs.table) {
    write_drops_csv(dir / "drops.csv", result.records, K);
    write_records_jsonl(dir / "records.jsonl", result.records);
    if (spec.benchmark) {
      write_drops_csv(dir / "drops_benchmark.csv", result.benchmark_records, K);
      write_records_jsonl(dir / "records_benchmark.jsonl", result.benchmark_records);
    }
  }
  if (spec.outputs.cdf) {
    if (spec.scenario.K1 < K)
      write_cdf_csv(dir / "cdf_min_rate.csv", min_rates(result.records, spec.scenario.K1));
    write_cdf_csv(dir / "cdf_user_rate.csv", all_rates(result.records));
    if (spec.benchmark) {
      if (spec.scenario.K1 < K)
        write_cdf_csv(dir / "cdf_min_rate_benchmark.csv",
                      min_rates(result.benchmark_records, spec.scenario.K1));
      write_cdf_csv(dir / "cdf_user_rate_benchmark.csv",
                    all_rates(result.benchmark_records));
    }
  }
  if (spec.outputs.convergence) {
    fs::create_directories(dir / "convergence", ec);
    if (ec) throw IoError("cannot create convergence directory");
    for (int i = 0; i < spec.n_drops; ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "drop_%05d.csv", i);
      auto out = open_out(dir / "convergence" / name);
      out << "iter,t\n";
      for (size_t it = 0; it < result.traces[i].size(); ++it)
        out << (it + 1) << ',' << fmt_double(result.traces[i][it]) << '\n';
      if (!out) throw IoError("failed writing trace for drop " + std::to_string(i));
    }
  }
  if (spec.dump_pilots) {
    const DropInputs in = make_drop_inputs(spec.scenario, 0);
    dump_pilots_csv(in.pilots, (dir / "pilots_drop0.csv").string());
  }
  if (spec.outputs.validation) {
    const DropInputs in = make_drop_inputs(spec.scenario, 0);
    const Solution sol = run(in.stats, in.pilots, spec.scenario);
    ValidationOptions vopts = spec.validation;
    vopts.seed = Rng::derive(spec.scenario.seed, 0, 2);
    const Eigen::VectorXd q =
        sol.status == SolveStatus::Optimal ? sol.q : spec.scenario.p_max();
    const ValidationReport report =
        validate_closed_forms(in.stats, in.pilots, sol.U, q, spec.scenario.N,
                              in.snrs.data, in.snrs.pilot, vopts);
    auto out = open_out(dir / "validation.json");
    out << to_json_string(report) << '\n';
  }
  return result;
}

double percentile(const std::vector<double>& sorted_values, double p) {
  if (sorted_values.empty()) throw EmptyInput("percentile of an empty set");
  if (sorted_values.size() == 1) return sorted_values.front();
  const double pos = (p / 100.0) * static_cast<double>(sorted_values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted_values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac;
}

Summary summarize(const std::vector<DropRecord>& records, int K1) {
  if (records.empty()) throw EmptyInput("summarize needs at least one record");
  Summary s;
  s.n_records = static_cast<int>(records.size());
  int infeasible = 0;
  double iter_sum = 0, wall_sum = 0;
  for (const auto& r : records) {
    if (r.status != SolveStatus::Optimal) ++infeasible;
    iter_sum += r.iterations;
    wall_sum += r.wall_time_s;
  }
  s.infeasible_fraction = static_cast<double>(infeasible) / s.n_records;
  s.mean_iterations = iter_sum / s.n_records;
  s.mean_wall_time_s = wall_sum / s.n_records;
  std::vector<double> mins = min_rates(records, K1);
  if (!mins.empty()) {
    std::sort(mins.begin(), mins.end());
    s.min_rate_p5 = percentile(mins, 5);
    s.min_rate_p10 = percentile(mins, 10);
    s.min_rate_p50 = percentile(mins, 50);
    s.min_rate_p90 = percentile(mins, 90);
  }
  return s;
}

std::vector<DropRecord> load_records(const std::string& dir, int& K1_out) {
  const fs::path base(dir);
  std::ifstream meta(base / "metadata.json");
  if (!meta) throw IoError("cannot open " + (base / "metadata.json").string());
  nlohmann::json jm;
  meta >> jm;
  K1_out = jm.at("config").at("K1").get<int>();

  std::ifstream in(base / "records.jsonl");
  if (!in) throw IoError("cannot open " + (base / "records.jsonl").string());
  std::vector<DropRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    DropRecord r;
    r.drop_index = j.at("drop").get<int>();
    r.status = j.at("status").get<std::string>() == "Optimal"
                   ? SolveStatus::Optimal
                   : SolveStatus::InfeasibleRtuTargets;
    r.t_star = j.at("t_star").get<double>();
    r.iterations = j.at("iters").get<int>();
    const auto sinr = j.at("sinr").get<std::vector<double>>();
    const auto rate = j.at("rate").get<std::vector<double>>();
    const auto q = j.at("q").get<std::vector<double>>();
    r.sinr = Eigen::Map<const Eigen::VectorXd>(sinr.data(), sinr.size());
    r.rate = Eigen::Map<const Eigen::VectorXd>(rate.data(), rate.size());
    r.q = Eigen::Map<const Eigen::VectorXd>(q.data(), q.size());
    r.wall_time_s = j.at("wall_time_s").get<double>();
    records.push_back(std::move(r));
  }
  return records;
}

std::string to_json_string(const Summary& s) {
  nlohmann::json j;
  j["schema"] = "cfmimo.summary.v1";
  j["n_records"] = s.n_records;
  j["infeasible_fraction"] = s.infeasible_fraction;
  j["min_rate_percentiles"] = {{"p5", s.min_rate_p5},
                               {"p10", s.min_rate_p10},
                               {"p50", s.min_rate_p50},
                               {"p90", s.min_rate_p90}};
  j["mean_iterations"] = s.mean_iterations;
  j["mean_wall_time_s"] = s.mean_wall_time_s;
  return j.dump(2);
}

}  // namespace cfmimo
