#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cfmimo/mc_validation.hpp"
#include "cfmimo/optimizer.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

struct OutputSelection {
  bool table = true;        // drops.csv + records.jsonl
  bool cdf = true;          // empirical CDF files
  bool convergence = true;  // per-drop trace files
  bool validation = false;  // Monte Carlo moment validation of drop 0
};

struct ExperimentSpec {
  ScenarioConfig scenario;
  int n_drops = 1;
  bool benchmark = false;  // also run the unweighted-combining baseline
  OutputSelection outputs;
  std::string output_dir;  // empty: compute records, write nothing
  int workers = 0;         // 0: hardware concurrency
  bool dump_pilots = false;
  ValidationOptions validation;
};

struct DropRecord {
  int drop_index = 0;
  SolveStatus status = SolveStatus::Optimal;
  double t_star = 0;
  Eigen::VectorXd sinr;  // K
  Eigen::VectorXd rate;  // K
  Eigen::VectorXd q;     // K
  int iterations = 0;
  double wall_time_s = 0;
};

// Everything derived from (config, drop_index) before the optimizer runs.
// Substreams: (drop, 0) geometry and shadowing, (drop, 1) pilots,
// (drop, 2) Monte Carlo validation.
struct DropInputs {
  LargeScaleModel lsm;
  PilotBook pilots;
  EstimationStats stats;
  NormalizedSnrs snrs;
};
DropInputs make_drop_inputs(const ScenarioConfig& config, int drop_index);

struct ExperimentResult {
  std::vector<DropRecord> records;
  std::vector<DropRecord> benchmark_records;  // empty unless spec.benchmark
  std::vector<std::vector<double>> traces;    // per drop
};

// Runs the drop ensemble on a worker pool (records are ordered by drop
// index regardless of completion order) and writes the artifacts when
// output_dir is set. Infeasible drops are recorded with all SINRs, rates
// and powers zero.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct Summary {
  int n_records = 0;
  double infeasible_fraction = 0;
  // Percentiles of the per-drop minimum rate over the max-min users.
  double min_rate_p5 = 0, min_rate_p10 = 0, min_rate_p50 = 0, min_rate_p90 = 0;
  double mean_iterations = 0;
  double mean_wall_time_s = 0;
};

Summary summarize(const std::vector<DropRecord>& records, int K1);

// Loads records.jsonl + metadata.json written by run_experiment.
std::vector<DropRecord> load_records(const std::string& dir, int& K1_out);
std::string to_json_string(const Summary& summary);

// Percentile with linear interpolation between order statistics; values must
// be sorted ascending, p in [0, 100].
double percentile(const std::vector<double>& sorted_values, double p);

}  // namespace cfmimo
