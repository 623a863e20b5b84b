#include <gtest/gtest.h>

#include <cmath>

#include "slicebench/allocator.hpp"
#include "slicebench/oracle.hpp"
#include "slicebench/qos.hpp"

using namespace slicebench;

TEST(Exhaustive, EnumeratesEverySplitWithinBudget) {
  const Scenario sc = oracle::tiny_instance_scenario(1);
  const Topology top = generate_topology(sc);
  const auto samples = draw_samples(top, sc);
  const auto best = oracle::exhaustive_bandwidth_search(sc, top, samples);
  // Pairs (a, b) with a + b <= 4.
  EXPECT_EQ(best.candidates, 15);
  EXPECT_LE(best.blocks[0] + best.blocks[1], 4);
  std::vector<SampleEvaluator> evals;
  for (const auto& cs : samples) evals.emplace_back(sc, top, cs);
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) {
      const std::vector<double> split = {double(a), double(b)};
      const double u = 0.5 * (evals[0].utility(split) + evals[1].utility(split));
      EXPECT_LE(u, best.utility + 1e-12);
    }
}

TEST(Exhaustive, RefusesLargeInstances) {
  Scenario sc = oracle::tiny_instance_scenario(1);
  sc.total_bandwidth_hz = 2e6;  // 20 blocks
  const Topology top = generate_topology(sc);
  const auto samples = draw_samples(top, sc);
  EXPECT_THROW(oracle::exhaustive_bandwidth_search(sc, top, samples), std::invalid_argument);
}

TEST(MonteCarlo, Mm1kAgreesWithClosedForm) {
  const auto est = oracle::mm1k_monte_carlo(500.0, 1e-3, 2, 200000, 3);
  EXPECT_EQ(est.trials, 200000);
  const double exact = blocking_probability(500.0, 1e-3, 2);
  EXPECT_NEAR(est.mean, exact, 4.0 * std::max(est.std_error, est.batch_std_error));
  EXPECT_GT(est.batch_std_error, 0.0);
}

TEST(MonteCarlo, Mm1kZeroCapacityBlocksEverything) {
  const auto est = oracle::mm1k_monte_carlo(100.0, 1e-3, 0, 10000, 1);
  EXPECT_DOUBLE_EQ(est.mean, 1.0);
}

TEST(MonteCarlo, Mm1kRejectsShortRuns) {
  EXPECT_THROW(oracle::mm1k_monte_carlo(100.0, 1e-3, 2, 100, 1), std::invalid_argument);
}

TEST(MonteCarlo, RandomAccessAgreesWithClosedForm) {
  const auto est = oracle::ra_monte_carlo(10, 600, 0.01, 100000, 5);
  EXPECT_NEAR(est.mean, std::pow(1.0 - 0.001, 599), 4.0 * est.std_error);
  const auto alone = oracle::ra_monte_carlo(4, 1, 0.5, 10000, 5);
  EXPECT_DOUBLE_EQ(alone.mean, 1.0);
}

TEST(MonteCarlo, MrtClosedForm) {
  Eigen::VectorXcd h(2);
  h << std::complex<double>(3.0, 0.0), std::complex<double>(0.0, 4.0);
  EXPECT_DOUBLE_EQ(oracle::mrt_power_closed_form(h, 2.0, 25.0), 2.0);
}

TEST(Checks, LibraryPassesQueueAndAccessChecks) {
  const auto impl = oracle::Implementations::library(1);
  const auto blocking = oracle::check_blocking(impl, 1);
  EXPECT_TRUE(blocking.pass) << blocking.detail;
  const auto ra = oracle::check_random_access(impl, 1);
  EXPECT_TRUE(ra.pass) << ra.detail;
}

TEST(Checks, LibraryPassesBeamformingChecks) {
  const auto impl = oracle::Implementations::library(1);
  const auto single = oracle::check_single_robot_sdr(impl, 1, 20);
  EXPECT_TRUE(single.pass) << single.detail;
  const auto multi = oracle::check_multi_robot_sdr(impl, 1, 10);
  EXPECT_TRUE(multi.pass) << multi.detail;
}

TEST(Checks, FaultyBlockingIsCaught) {
  auto impl = oracle::Implementations::library(1);
  // Off-by-one in the capacity.
  impl.blocking = [](double lambda, double tau, int k) { return blocking_probability(lambda, tau, k + 1); };
  EXPECT_FALSE(oracle::check_blocking(impl, 1).pass);
}

TEST(Checks, FaultyRandomAccessIsCaught) {
  auto impl = oracle::Implementations::library(1);
  impl.ra_success = [](int n, int users, double p_a) { return std::pow(1.0 - 1.0 / n, p_a * users); };
  EXPECT_FALSE(oracle::check_random_access(impl, 1).pass);
}

TEST(Checks, FaultyBeamformingIsCaught) {
  auto impl = oracle::Implementations::library(1);
  const auto good = impl.beamforming;
  impl.beamforming = [good](const BeamformingProblem& p) {
    auto s = good(p);
    s.total_power *= 1.01;
    return s;
  };
  EXPECT_FALSE(oracle::check_single_robot_sdr(impl, 1, 5).pass);
}

TEST(Tiny, AllocatorMatchesExhaustiveOnAFewSeeds) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto cmp = oracle::compare_tiny_instance(seed);
    EXPECT_LE(cmp.relative_shortfall(), 0.05) << seed;
  }
  oracle::TinyComparison zero;
  EXPECT_DOUBLE_EQ(zero.relative_shortfall(), 0.0);
}
