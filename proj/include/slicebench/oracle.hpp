#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slicebench/channel.hpp"
#include "slicebench/comp.hpp"
#include "slicebench/scenario.hpp"

namespace slicebench::oracle {

struct ExhaustiveResult {
  std::vector<int> blocks;
  double utility = 0.0;  // SAA mean
  int candidates = 0;
};

inline constexpr int kMaxExhaustiveSlices = 3;
inline constexpr int kMaxExhaustiveBlocks = 12;

/// Enumerates every integer split with sum <= M and returns the SAA-best one
/// (ties go to the lexicographically smallest split). Throws
/// std::invalid_argument above 3 slices or 12 blocks.
ExhaustiveResult exhaustive_bandwidth_search(const Scenario& sc, const Topology& top,
                                             std::span<const ChannelSample> samples);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;        // binomial
  double batch_std_error = 0.0;  // batch means; captures serial correlation
  long long trials = 0;
};

/// Discrete-event M/M/1/K: Poisson(lambda) arrivals, exponential service with
/// mean tau, at most `capacity` packets in the system (including the one in
/// service). Returns the blocked fraction over n_arrivals >= 1e4 arrivals.
Estimate mm1k_monte_carlo(double lambda, double tau_s, int capacity, long long n_arrivals, std::uint64_t seed);

/// Tagged always-active user among `users`; each other user activates with
/// probability p_a and every active user picks one of `preambles` uniformly.
/// Success means nobody else picked the tagged user's preamble.
Estimate ra_monte_carlo(int preambles, int users, double p_a, long long trials, std::uint64_t seed);

/// gamma * noise / ||h||^2.
double mrt_power_closed_form(const Eigen::VectorXcd& h, double gamma_req, double noise_power_w);

// Check suite --------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Implementations under test. Defaults point at the library; tests swap in
/// faulty versions to confirm the checks can fail.
struct Implementations {
  std::function<double(double lambda, double tau_s, int capacity)> blocking;
  std::function<double(int preambles, int users, double p_a)> ra_success;
  std::function<BeamformingSolution(const BeamformingProblem&)> beamforming;

  static Implementations library(std::uint64_t seed = 0);
};

CheckResult check_blocking(const Implementations& impl, std::uint64_t seed);
CheckResult check_random_access(const Implementations& impl, std::uint64_t seed);
CheckResult check_single_robot_sdr(const Implementations& impl, std::uint64_t seed, int instances = 100);
CheckResult check_multi_robot_sdr(const Implementations& impl, std::uint64_t seed, int instances = 50);

/// 1 RU with 2 antennas, one single-robot TI slice and one single-user eMBB
/// slice, M = 4 blocks, 2 SAA samples.
Scenario tiny_instance_scenario(std::uint64_t seed);

struct TinyComparison {
  double allocator_utility = 0.0;
  double oracle_utility = 0.0;
  std::vector<int> allocator_blocks;
  std::vector<int> oracle_blocks;
  double relative_shortfall() const;
};

TinyComparison compare_tiny_instance(std::uint64_t seed);
CheckResult check_tiny_instances(int seeds = 20, double tolerance = 0.05);

std::vector<CheckResult> run_suite(const Implementations& impl, std::uint64_t seed);

}  // namespace slicebench::oracle
