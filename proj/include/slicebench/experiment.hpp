#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "slicebench/allocator.hpp"
#include "slicebench/scenario.hpp"

namespace slicebench {

enum class Algo { ira_admm, ira };

std::string_view algo_name(Algo algo);
/// Accepts "ira_admm" or "ira"; throws ConfigError otherwise.
Algo parse_algo(std::string_view name);

struct Variant {
  bool drop_embb = false;
  bool drop_mmtc = false;
};

/// Removes the eMBB and/or mMTC slices; throws ConfigError if nothing is left
/// or the remaining scenario is invalid.
Scenario apply_variant(Scenario sc, const Variant& variant);

/// Sets the per-robot arrival rate of every TI slice.
Scenario with_ti_arrival_rate(Scenario sc, double pkts_per_s);

/// Per-robot arrival rate of the first TI slice, 0 when there is none.
double ti_arrival_rate(const Scenario& sc);

struct RunRecord {
  Algo algo = Algo::ira_admm;
  Scenario scenario;
  RunResult result;
};

/// One run of the chosen algorithm on sc (topology and samples from sc.seed).
RunRecord run_once(const Scenario& sc, Algo algo);

/// Default TI arrival-rate grid: 50, 100, ..., 500 packets/s per robot.
std::vector<double> default_lambda_grid();

struct SweepSpec {
  std::vector<double> values = default_lambda_grid();
  std::vector<Algo> algos = {Algo::ira_admm, Algo::ira};
  int reps = 1;
  Variant variant;
};

/// Checks that values are positive and strictly increasing and reps >= 1.
void validate(const SweepSpec& spec);

// CSV -----------------------------------------------------------------------

inline constexpr std::string_view kResultsHeader =
    "algo,seed,lambda_mult,slice_id,kind,blocks,bandwidth_hz,utility,power_w,satisfied_frac,total_utility";

struct ResultRow {
  std::string algo;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  int slice_id = 0;
  std::string kind;
  int blocks = 0;
  double bandwidth_hz = 0.0;
  double utility = 0.0;
  double power_w = 0.0;
  double satisfied_frac = 0.0;
  double total_utility = 0.0;
};

std::vector<ResultRow> result_rows(const RunRecord& record);
std::string format_row(const ResultRow& row);
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_trace_csv(std::ostream& out, const AdmmTrace& trace);

/// Sweep over TI arrival rates. Rows are appended to `<out_path>.partial` as
/// each run finishes; the final file holds all rows sorted by
/// (lambda, algo, seed, slice). Seeds are base.seed + r for r < reps.
/// Returns the number of ADMM runs that stopped without converging.
int run_sweep(const Scenario& base, const SweepSpec& spec, const std::string& out_path,
              std::ostream* log = nullptr);

}  // namespace slicebench
