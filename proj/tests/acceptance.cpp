// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
// Usage: slicebench_acceptance <path to slicebench CLI>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "slicebench/experiment.hpp"
#include "slicebench/oracle.hpp"
#include "slicebench/qos.hpp"

namespace sb = slicebench;
namespace fs = std::filesystem;

namespace {

constexpr int kSeeds = 5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Runs indexed [seed][lambda] for one algorithm and variant.
using Grid = std::vector<std::vector<sb::RunRecord>>;

Grid run_grid(const sb::Variant& variant, sb::Algo algo) {
  const sb::Scenario base = sb::apply_variant(sb::paper_default_scenario(), variant);
  const auto lambdas = sb::default_lambda_grid();
  Grid grid(kSeeds);
  for (int s = 0; s < kSeeds; ++s) {
    for (double lambda : lambdas) {
      sb::Scenario sc = sb::with_ti_arrival_rate(base, lambda);
      sc.seed = static_cast<std::uint64_t>(s + 1);
      grid[s].push_back(sb::run_once(sc, algo));
    }
  }
  return grid;
}

int ti_blocks(const sb::RunRecord& rec) {
  int total = 0;
  for (int s = 0; s < rec.scenario.slice_count(); ++s)
    if (sb::kind_of(rec.scenario.slices[s]) == sb::SliceKind::ti) total += rec.result.allocation.blocks[s];
  return total;
}

double total_utility(const sb::RunRecord& rec) { return rec.result.report.total_utility; }

// Counts grid steps moving against `direction` (+1 rising, -1 falling) and the largest such move.
struct SeriesCheck {
  int bad_steps = 0;
  double worst = 0.0;
};

SeriesCheck check_series(const std::vector<double>& v, int direction) {
  SeriesCheck c;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double wrong = direction * (v[i - 1] - v[i]);  // > 0 means a violation
    if (wrong > 1e-9 * std::max(1.0, std::abs(v[i - 1]))) {
      ++c.bad_steps;
      c.worst = std::max(c.worst, wrong);
    }
  }
  return c;
}

Outcome criterion_saturation(const Grid& admm, const Grid& ira) {
  Outcome o{true, ""};
  int cells = 0;
  for (const Grid* g : {&admm, &ira}) {
    for (const auto& series : *g)
      for (const auto& rec : series) {
        ++cells;
        if (ti_blocks(rec) != rec.scenario.block_count()) {
          o.pass = false;
          o.detail += std::string(sb::algo_name(rec.algo)) + " seed " + std::to_string(rec.scenario.seed) +
                      " lambda " + fmt(sb::ti_arrival_rate(rec.scenario)) + ": " + std::to_string(ti_blocks(rec)) +
                      " blocks; ";
        }
      }
  }
  if (o.pass) o.detail = "all " + std::to_string(cells) + " TI-only runs allocate M = 40 blocks to TI";
  return o;
}

Outcome criterion_monotone_blocks(const Grid& admm, const Grid& ira) {
  Outcome o{true, ""};
  for (const Grid* g : {&admm, &ira}) {
    for (const auto& series : *g) {
      std::vector<double> blocks;
      for (const auto& rec : series) blocks.push_back(ti_blocks(rec));
      const SeriesCheck c = check_series(blocks, +1);
      const std::string tag = std::string(sb::algo_name(series.front().algo)) + " seed " +
                              std::to_string(series.front().scenario.seed);
      if (c.bad_steps > 1 || c.worst > 1.0) {
        o.pass = false;
        o.detail += tag + ": " + std::to_string(c.bad_steps) + " decreasing steps, worst " + fmt(c.worst) + "; ";
      }
      if (&series == &g->front()) {
        o.detail += tag + " TI blocks:";
        for (double b : blocks) o.detail += " " + fmt(b);
        o.detail += "; ";
      }
    }
  }
  return o;
}

Outcome criterion_utility_decay(const std::vector<std::pair<std::string, const Grid*>>& grids) {
  Outcome o{true, ""};
  for (const auto& [label, g] : grids) {
    int worst_bad = 0;
    for (const auto& series : *g) {
      std::vector<double> u;
      for (const auto& rec : series) u.push_back(total_utility(rec));
      const SeriesCheck c = check_series(u, -1);
      worst_bad = std::max(worst_bad, c.bad_steps);
      if (c.bad_steps > 1) {
        o.pass = false;
        o.detail += label + " " + std::string(sb::algo_name(series.front().algo)) + " seed " +
                    std::to_string(series.front().scenario.seed) + ": " + std::to_string(c.bad_steps) +
                    " increasing steps; ";
      }
    }
    const auto& first = g->front();
    o.detail += label + " " + std::string(sb::algo_name(first.front().algo)) + " utility " +
                fmt(total_utility(first.front())) + " -> " + fmt(total_utility(first.back())) +
                " (max increasing steps per seed " + std::to_string(worst_bad) + "); ";
  }
  return o;
}

Outcome criterion_ordering(const Grid& admm, const Grid& ira) {
  int cells = 0;
  int at_least = 0;
  double diff_sum = 0.0;
  for (int s = 0; s < kSeeds; ++s)
    for (std::size_t l = 0; l < admm[s].size(); ++l) {
      const double a = total_utility(admm[s][l]);
      const double b = total_utility(ira[s][l]);
      ++cells;
      if (a >= b - 1e-9 * std::max(1.0, std::abs(b))) ++at_least;
      diff_sum += a - b;
    }
  const double share = static_cast<double>(at_least) / cells;
  const double mean_diff = diff_sum / cells;
  return {share >= 0.9 && mean_diff > 0.0, "ADMM >= IRA in " + std::to_string(at_least) + "/" +
                                               std::to_string(cells) + " cells, mean difference " + fmt(mean_diff)};
}

Outcome from_checks(const std::vector<sb::oracle::CheckResult>& checks) {
  Outcome o{true, ""};
  for (const auto& c : checks) {
    o.pass = o.pass && c.pass;
    o.detail += std::string(c.pass ? "[ok] " : "[FAIL] ") + c.name + ": " + c.detail + "; ";
  }
  return o;
}

Outcome criterion_qos_math() {
  const auto impl = sb::oracle::Implementations::library(7);
  Outcome o = from_checks({sb::oracle::check_blocking(impl, 7), sb::oracle::check_random_access(impl, 7)});
  double worst_roundtrip = 0.0;
  for (double p = 1e-12; p < 0.5; p *= 1.7)
    worst_roundtrip = std::max(worst_roundtrip, std::abs(sb::q_function(sb::inverse_q(p)) - p) / p);
  for (double x = 0.05; x < 7.0; x += 0.05)
    worst_roundtrip = std::max(worst_roundtrip, std::abs(sb::inverse_q(sb::q_function(x)) - x));
  double worst_shannon = 0.0;
  for (double g : {0.01, 0.5, 1.0, 1.8, 10.0, 1000.0})
    for (double eps : {1e-9, 1e-5, 1e-2})
      worst_shannon = std::max(worst_shannon, std::abs(sb::fb_rate(g, 1e9, eps) - std::log2(1.0 + g)));
  const bool math_ok = worst_roundtrip <= 1e-9 && worst_shannon <= 1e-3;
  o.pass = o.pass && math_ok;
  o.detail += std::string(math_ok ? "[ok] " : "[FAIL] ") + "inverse_q round trip " + fmt(worst_roundtrip) +
              ", fb_rate vs Shannon at n=1e9 " + fmt(worst_shannon);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string rows_text(const sb::RunRecord& rec) {
  std::ostringstream os;
  sb::write_results_csv(os, sb::result_rows(rec));
  sb::write_trace_csv(os, rec.result.trace);
  return os.str();
}

sb::RunRecord run_with_threads(const char* threads, const sb::Scenario& sc, sb::Algo algo) {
  setenv("SLICEBENCH_THREADS", threads, 1);
  return sb::run_once(sc, algo);
}

Outcome criterion_determinism(const std::string& cli) {
  Outcome o{true, ""};
  const fs::path dir = fs::temp_directory_path() / "slicebench_acceptance_determinism";
  fs::remove_all(dir);
  for (const char* sub : {"a", "b"}) {
    fs::create_directories(dir / sub);
    const std::string cmd = "\"" + cli + "\" run --algo ira_admm --seed 42 --out \"" +
                            (dir / sub / "results.csv").string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
      o.pass = false;
      o.detail += std::string("CLI run ") + sub + " failed (" + std::to_string(rc) + "); ";
    }
  }
  if (o.pass) {
    for (const char* f : {"results.csv", "trace.csv"}) {
      const std::string a = slurp(dir / "a" / f);
      const bool same = !a.empty() && a == slurp(dir / "b" / f);
      o.pass = o.pass && same;
      o.detail += std::string(f) + (same ? " byte-identical; " : " differs; ");
    }
  }
  fs::remove_all(dir);

  const char* old = std::getenv("SLICEBENCH_THREADS");
  const std::string saved = old ? old : "";
  sb::Scenario sc = sb::with_ti_arrival_rate(sb::paper_default_scenario(), 300.0);
  sc.seed = 9;
  bool threads_same = true;
  for (sb::Algo algo : {sb::Algo::ira_admm, sb::Algo::ira}) {
    const std::string one = rows_text(run_with_threads("1", sc, algo));
    const std::string four = rows_text(run_with_threads("4", sc, algo));
    const std::string many = rows_text(run_with_threads("16", sc, algo));
    threads_same = threads_same && one == four && one == many;
  }
  if (old)
    setenv("SLICEBENCH_THREADS", saved.c_str(), 1);
  else
    unsetenv("SLICEBENCH_THREADS");
  o.pass = o.pass && threads_same;
  o.detail += std::string("SLICEBENCH_THREADS=1/4/16 ") + (threads_same ? "identical" : "differ");
  return o;
}

Outcome criterion_conservation(const std::vector<const Grid*>& grids) {
  Outcome o{true, ""};
  int runs = 0;
  double worst_power = 0.0;
  auto check = [&](const sb::RunRecord& rec) {
    ++runs;
    const auto& blocks = rec.result.allocation.blocks;
    const int used = std::accumulate(blocks.begin(), blocks.end(), 0);
    if (used > rec.scenario.block_count()) {
      o.pass = false;
      o.detail += "seed " + std::to_string(rec.scenario.seed) + " uses " + std::to_string(used) + " blocks; ";
    }
    for (const auto& ps : rec.result.allocation.per_sample)
      for (double p : ps.per_ru_power) {
        worst_power = std::max(worst_power, p);
        if (p > rec.scenario.max_ru_power_w + 1e-6) o.pass = false;
      }
  };
  for (const Grid* g : grids)
    for (const auto& series : *g)
      for (const auto& rec : series) check(rec);
  // The full default scenario over the default grid.
  for (sb::Algo algo : {sb::Algo::ira_admm, sb::Algo::ira})
    for (double lambda : sb::default_lambda_grid()) {
      sb::Scenario sc = sb::with_ti_arrival_rate(sb::paper_default_scenario(), lambda);
      sc.seed = 42;
      check(sb::run_once(sc, algo));
    }
  o.detail += std::to_string(runs) + " runs, max per-sample per-RU power " + fmt(worst_power) + " W";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <slicebench CLI>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const auto start = std::chrono::steady_clock::now();
  bool all = true;
  auto report = [&](int id, const char* name, const Outcome& o) {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %d  %s  (%.1f s)  %s\n", o.pass ? "PASS" : "FAIL", id, name, elapsed, o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  };

  const Grid ti_only_admm = run_grid({true, true}, sb::Algo::ira_admm);
  const Grid ti_only_ira = run_grid({true, true}, sb::Algo::ira);
  report(1, "TI-only runs give every block to TI", criterion_saturation(ti_only_admm, ti_only_ira));

  const Grid embb_admm = run_grid({.drop_mmtc = true}, sb::Algo::ira_admm);
  const Grid embb_ira = run_grid({.drop_mmtc = true}, sb::Algo::ira);
  report(2, "TI blocks non-decreasing in arrival rate (TI+eMBB)", criterion_monotone_blocks(embb_admm, embb_ira));

  const Grid mmtc_admm = run_grid({.drop_embb = true}, sb::Algo::ira_admm);
  const Grid mmtc_ira = run_grid({.drop_embb = true}, sb::Algo::ira);
  report(3, "total utility non-increasing in arrival rate",
         criterion_utility_decay({{"TI+eMBB", &embb_admm},
                                  {"TI+eMBB", &embb_ira},
                                  {"TI+mMTC", &mmtc_admm},
                                  {"TI+mMTC", &mmtc_ira}}));

  report(4, "IRA-ADMM utility >= IRA utility (TI+eMBB cells)", criterion_ordering(embb_admm, embb_ira));

  report(5, "allocator matches exhaustive search on tiny instances",
         from_checks({sb::oracle::check_tiny_instances(20, 0.05)}));

  const auto impl = sb::oracle::Implementations::library(3);
  report(6, "beamforming vs closed form and relaxation",
         from_checks({sb::oracle::check_single_robot_sdr(impl, 3, 100), sb::oracle::check_multi_robot_sdr(impl, 3, 50)}));

  report(7, "queueing, random-access and rate formulas", criterion_qos_math());

  report(8, "deterministic output", criterion_determinism(cli));

  report(9, "block and power conservation",
         criterion_conservation({&ti_only_admm, &ti_only_ira, &embb_admm, &embb_ira, &mmtc_admm, &mmtc_ira}));

  std::printf("%s\n", all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return all ? 0 : 1;
}
