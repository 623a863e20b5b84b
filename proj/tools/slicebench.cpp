// slicebench command-line harness: run | sweep | oracle.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slicebench/experiment.hpp"
#include "slicebench/oracle.hpp"

namespace sb = slicebench;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct CommonFlags {
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  bool drop_embb = false;
  bool drop_mmtc = false;
};

sb::Scenario load(const CommonFlags& f) {
  sb::Scenario sc = f.scenario_path.empty() ? sb::paper_default_scenario() : sb::load_scenario_file(f.scenario_path);
  if (f.seed) sc.seed = *f.seed;
  return sc;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw sb::ConfigError("bad value '" + item + "' in --values");
    out.push_back(v);
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  return out;
}

int cmd_run(const CommonFlags& f, const std::string& algo_name, const std::string& out_path,
            const std::string& trace_flag, const std::string& channels_path) {
  const sb::Algo algo = sb::parse_algo(algo_name);
  const sb::Scenario sc = sb::apply_variant(load(f), {f.drop_embb, f.drop_mmtc});

  if (!channels_path.empty()) {
    const auto top = sb::generate_topology(sc);
    const auto samples = sb::draw_samples(top, sc);
    auto out = open_out(channels_path);
    sb::write_channel_csv(out, samples);
  }

  const sb::RunRecord rec = sb::run_once(sc, algo);
  {
    auto out = open_out(out_path);
    sb::write_results_csv(out, sb::result_rows(rec));
  }
  const std::string trace_path =
      trace_flag.empty() ? (std::filesystem::path(out_path).parent_path() / "trace.csv").string() : trace_flag;
  {
    auto out = open_out(trace_path);
    sb::write_trace_csv(out, rec.result.trace);
  }

  std::printf("total_utility %.12g\n", rec.result.report.total_utility);
  if (algo == sb::Algo::ira_admm && !rec.result.trace.converged) {
    std::fprintf(stderr, "warning: ADMM stopped after %zu iterations without meeting its tolerances\n",
                 rec.result.trace.iterations.size());
    return kExitSolver;
  }
  return 0;
}

int cmd_sweep(const CommonFlags& f, const std::vector<std::string>& algos, const std::string& values, int reps,
              const std::string& out_path) {
  sb::SweepSpec spec;
  spec.algos.clear();
  for (const auto& a : algos) spec.algos.push_back(sb::parse_algo(a));
  if (!values.empty()) spec.values = parse_values(values);
  spec.reps = reps;
  spec.variant = {f.drop_embb, f.drop_mmtc};
  const int not_converged = sb::run_sweep(load(f), spec, out_path, &std::cerr);
  std::printf("wrote %s\n", out_path.c_str());
  if (not_converged > 0) {
    std::fprintf(stderr, "warning: %d ADMM runs stopped without meeting their tolerances\n", not_converged);
    return kExitSolver;
  }
  return 0;
}

int cmd_oracle(std::uint64_t seed) {
  const auto results = sb::oracle::run_suite(sb::oracle::Implementations::library(seed), seed);
  bool all = true;
  for (const auto& r : results) {
    std::printf("%-4s  %-62s  %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network slicing resource allocation experiments"};
  app.require_subcommand(1);

  CommonFlags common;
  std::string algo = "ira_admm";
  std::string out_path = "results.csv";
  std::string trace_path;
  std::string channels_path;
  std::vector<std::string> algos = {"ira_admm", "ira"};
  std::string values;
  int reps = 1;
  std::uint64_t oracle_seed = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", common.scenario_path, "Scenario JSON (default: built-in default scenario)");
    cmd->add_option("--seed", common.seed, "Master seed (overrides the scenario)");
    cmd->add_flag("--drop-embb", common.drop_embb, "Remove eMBB slices");
    cmd->add_flag("--drop-mmtc", common.drop_mmtc, "Remove mMTC slices");
  };

  auto* run = app.add_subcommand("run", "Run one allocation");
  add_common(run);
  run->add_option("--algo", algo, "ira_admm or ira");
  run->add_option("--out", out_path, "Results CSV");
  run->add_option("--trace", trace_path, "ADMM trace CSV (default: trace.csv next to --out)");
  run->add_option("--channels", channels_path, "Also dump the channel samples as CSV");

  auto* sweep = app.add_subcommand("sweep", "Sweep the TI arrival rate");
  add_common(sweep);
  sweep->add_option("--algo", algos, "Algorithms to run (repeatable)");
  sweep->add_option("--values", values, "Comma-separated per-robot arrival rates (default 50,...,500)");
  sweep->add_option("--reps", reps, "Seeds per point");
  sweep->add_option("--out", out_path, "Results CSV");

  auto* oracle = app.add_subcommand("oracle", "Run the reference-oracle checks");
  oracle->add_option("--seed", oracle_seed, "Seed for the Monte-Carlo and random instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(common, algo, out_path, trace_path, channels_path);
    if (sweep->parsed()) return cmd_sweep(common, algos, values, reps, out_path);
    return cmd_oracle(oracle_seed);
  } catch (const sb::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
}
