#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfmimo/config_file.hpp"
#include "cfmimo/errors.hpp"
#include "cfmimo/experiments.hpp"

namespace {

int run_command(const std::string& config_path, int drops, long long seed,
                bool benchmark, bool validate, const std::string& out_dir,
                int workers, bool dump_pilots, int mc_samples,
                const std::vector<std::string>& overrides) {
  cfmimo::ExperimentSpec spec;
  if (!config_path.empty())
    spec.scenario = cfmimo::load_config_file(config_path);
  for (const auto& kv : overrides) cfmimo::apply_override(spec.scenario, kv);
  cfmimo::normalize_targets(spec.scenario);
  if (seed >= 0) spec.scenario.seed = static_cast<uint64_t>(seed);
  spec.scenario.validate();
  spec.n_drops = drops;
  spec.benchmark = benchmark;
  spec.outputs.validation = validate;
  spec.validation.n_samples = mc_samples;
  spec.output_dir = out_dir;
  spec.workers = workers;
  spec.dump_pilots = dump_pilots;

  const cfmimo::ExperimentResult result = cfmimo::run_experiment(spec);
  const cfmimo::Summary summary =
      cfmimo::summarize(result.records, spec.scenario.K1);
  std::cout << cfmimo::to_json_string(summary) << '\n';
  if (!out_dir.empty()) std::cout << "artifacts written to " << out_dir << '\n';
  return 0;
}

int summarize_command(const std::string& in_dir) {
  int K1 = 0;
  const auto records = cfmimo::load_records(in_dir, K1);
  const cfmimo::Summary summary = cfmimo::summarize(records, K1);
  const std::string text = cfmimo::to_json_string(summary);
  std::cout << text << '\n';
  std::ofstream out(in_dir + "/summary.json");
  if (!out) throw cfmimo::IoError("cannot write summary.json in " + in_dir);
  out << text << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cfmimo: uplink mixed-QoS optimization for cell-free massive MIMO"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_dir;
  int drops = 1, workers = 0, mc_samples = 100000;
  long long seed = -1;
  bool benchmark = false, validate = false, dump_pilots = false;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "run a drop ensemble");
  run->add_option("--config", config_path, "scenario config file");
  run->add_option("--drops", drops, "number of drops")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_flag("--benchmark", benchmark, "also run the u_mk = 1 baseline");
  run->add_flag("--validate-theorem1", validate,
                "Monte Carlo validation of the closed-form rate on drop 0");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--workers", workers, "worker threads (0 = hardware)");
  run->add_option("--mc-samples", mc_samples, "samples for --validate-theorem1");
  run->add_flag("--dump-pilots", dump_pilots, "write the drop-0 pilot book");
  run->add_option("--set", overrides, "config override key=value (repeatable)");

  auto* summ = app.add_subcommand("summarize", "summarize a results directory");
  summ->add_option("--in", in_dir, "results directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_command(config_path, drops, seed, benchmark, validate, out_dir,
                         workers, dump_pilots, mc_samples, overrides);
    return summarize_command(in_dir);
  } catch (const cfmimo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 3;
  } catch (const cfmimo::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
