#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "slicebench/channel.hpp"
#include "slicebench/comp.hpp"
#include "slicebench/qos.hpp"
#include "slicebench/scenario.hpp"

namespace slicebench {

/// w_kind * satisfied_fraction - eta * power_w.
double slice_utility(SliceKind kind, double satisfied_fraction, double power_w, const Scenario& sc);

struct SliceOutcome {
  double satisfied = 0.0;  // fraction in [0, 1]
  double power_w = 0.0;
  double utility = 0.0;
};

/// Outcome of one short-timescale window for a given bandwidth split.
struct SampleResult {
  std::vector<SliceOutcome> slices;
  std::vector<double> per_ru_power;
  /// Beamforming solution per TI slice (empty optional for other kinds or
  /// denied slices); only filled when details are requested.
  std::vector<std::optional<BeamformingSolution>> ti_beamforming;
  /// eMBB per-user powers actually spent (0 for unserved users), when requested.
  std::vector<std::vector<double>> embb_user_power;

  double utility() const;
};

/// Granularity of the continuous x-updates, in blocks.
inline constexpr double kLatticeStepBlocks = 0.25;

/// Solves the single-timescale problem of one channel sample for a given
/// (possibly fractional) bandwidth split, in blocks. Slices draw from the
/// per-RU power budget in priority order TI, eMBB, mMTC. Keeps per-sample
/// caches, so one evaluator must not be shared between threads.
class SampleEvaluator {
 public:
  SampleEvaluator(const Scenario& sc, const Topology& top, const ChannelSample& cs);

  SampleResult solve(std::span<const double> blocks, bool details = false);
  double utility(std::span<const double> blocks) { return solve(blocks).utility(); }

  /// Per-slice utility at every lattice bandwidth when the slice is alone on
  /// the full power budget; TI power is the interference-free bound.
  const std::vector<double>& surrogate_table(int slice);
  int lattice_points() const;

  const ChannelSample& sample() const { return cs_; }
  int block_count() const { return sc_.block_count(); }
  int sdr_solves() const { return sdr_solves_; }

 private:
  struct TiUnit {
    bool feasible = false;
    BeamformingSolution unit;  // at unit noise power, no budgets
  };

  std::optional<BeamformingSolution> serve_ti(int slice, double bandwidth_hz,
                                              std::span<const double> budgets);
  BeamformingProblem ti_problem(int slice, double gamma, double noise, std::span<const double> budgets) const;
  SdrOptions sdr_options(int slice, int blocklength) const;
  double ti_surrogate(int slice, double bandwidth_hz) const;
  SliceOutcome embb_outcome(int slice, double bandwidth_hz, std::vector<double>& budgets,
                            std::vector<double>* per_ru, std::vector<double>* user_power) const;
  SliceOutcome mmtc_outcome(int slice, double bandwidth_hz) const;

  const Scenario& sc_;
  const Topology& top_;
  const ChannelSample& cs_;
  std::vector<int> order_;  // slice processing order
  std::vector<std::vector<Eigen::VectorXcd>> stacked_;  // per TI slice, per robot
  std::map<std::pair<int, int>, TiUnit> ti_cache_;      // (slice, blocklength)
  std::vector<std::vector<double>> surrogate_;
  int sdr_solves_ = 0;
};

/// One-shot convenience wrapper around SampleEvaluator for integer blocks.
SampleResult solve_sample(std::span<const int> blocks, const ChannelSample& cs, const Scenario& sc,
                          const Topology& top);

/// SAA-mean utility over a fixed set of samples, memoised per integer split.
class SaaObjective {
 public:
  SaaObjective(std::vector<SampleEvaluator*> samples) : samples_(std::move(samples)) {}
  double operator()(const std::vector<int>& blocks);
  int evaluations() const { return static_cast<int>(memo_.size()); }

 private:
  std::vector<SampleEvaluator*> samples_;
  std::map<std::vector<int>, double> memo_;
};

/// Euclidean projection onto {x >= 0, sum x <= total}.
std::vector<double> project_to_simplex(std::span<const double> v, double total);

/// Rounds a continuous split down, hands leftover blocks out one at a time
/// to the slice with the largest SAA gain, then applies the best single-block
/// transfer between slice pairs until none improves (at most 50 rounds).
std::vector<int> relax_and_round(SaaObjective& objective, std::span<const double> z0, int total_blocks);

/// Maximises utility_t(x) - rho/2 ||x - z_ref + u||^2 over the bandwidth
/// simplex restricted to the kLatticeStepBlocks lattice. Starts from the
/// exact optimum of the separable surrogate (or the snapped warm start if
/// better), then hill-climbs single-step transfers between slices on the
/// coupled objective, at most 30 sweeps. Heuristic: returns the best point found.
std::vector<double> subproblem_continuous(SampleEvaluator& sample, std::span<const double> z_ref,
                                          std::span<const double> u, double rho,
                                          std::span<const double> start);

struct UtilityReport {
  std::vector<std::vector<double>> sample_utility;  // [slice][t]
  std::vector<double> mean_utility;                 // per slice
  std::vector<double> satisfaction;                 // per slice, SAA mean
  std::vector<double> mean_power_w;                 // per slice, SAA mean
  double total_utility = 0.0;                       // sum of mean_utility
};

struct Allocation {
  std::vector<int> blocks;
  std::vector<SampleResult> per_sample;
};

struct AdmmIteration {
  int iter = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;  // SAA mean of the per-sample utilities at x_t
};

struct AdmmTrace {
  std::vector<AdmmIteration> iterations;
  bool converged = false;
  std::vector<double> consensus;  // continuous z handed to rounding
};

struct RunResult {
  Allocation allocation;
  UtilityReport report;
  AdmmTrace trace;
};

/// Evaluates a fixed integer split on every sample and assembles the report.
RunResult evaluate_allocation(std::span<SampleEvaluator> samples, std::vector<int> blocks,
                              const Scenario& sc);

/// Consensus ADMM over the SAA samples followed by rounding at the consensus.
RunResult run_ira_admm(const Scenario& sc, const Topology& top, std::span<const ChannelSample> samples,
                       const AdmmConfig& cfg);
RunResult run_ira_admm(const Scenario& sc, const Topology& top, const AdmmConfig& cfg);
RunResult run_ira_admm(const Scenario& sc, const Topology& top);

/// Baseline: per-sample solutions without consensus; the long-timescale split
/// is taken from sample 1 (or the per-sample average, per IraMode).
RunResult run_ira(const Scenario& sc, const Topology& top, std::span<const ChannelSample> samples);
RunResult run_ira(const Scenario& sc, const Topology& top);

}  // namespace slicebench
