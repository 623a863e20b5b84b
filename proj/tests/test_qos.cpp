#include <gtest/gtest.h>

#include <cmath>

#include "slicebench/qos.hpp"

using namespace slicebench;

TEST(InverseQ, KnownQuantiles) {
  EXPECT_NEAR(inverse_q(1e-5), 4.264890793922825, 1e-9);
  EXPECT_NEAR(inverse_q(0.025), 1.959963984540054, 1e-9);
  EXPECT_NEAR(inverse_q(0.5 - 1e-12), 0.0, 1e-9);
  EXPECT_THROW(inverse_q(0.0), std::domain_error);
  EXPECT_THROW(inverse_q(0.5), std::domain_error);
}

TEST(InverseQ, RoundTripsThroughQ) {
  for (double p : {1e-12, 1e-9, 2e-8, 1e-5, 1e-3, 0.1, 0.3, 0.49})
    EXPECT_NEAR(q_function(inverse_q(p)) / p, 1.0, 1e-9) << p;
  for (double x : {0.1, 1.0, 3.0, 5.5, 7.0}) EXPECT_NEAR(inverse_q(q_function(x)), x, 1e-9) << x;
}

TEST(FbRate, NormalApproximationValue) {
  // log2(11) - sqrt((1 - 1/121)/160) * Q^-1(1e-5) * log2(e)
  const double expected = std::log2(11.0) - std::sqrt((1.0 - 1.0 / 121.0) / 160.0) * 4.264890793922825 / std::log(2.0);
  EXPECT_NEAR(fb_rate(10.0, 160.0, 1e-5), expected, 1e-9);
  EXPECT_NEAR(fb_rate(10.0, 160.0, 1e-5), 2.975, 5e-3);
}

TEST(FbRate, ApproachesShannonLimit) {
  for (double g : {0.1, 1.0, 10.0, 100.0}) EXPECT_NEAR(fb_rate(g, 1e9, 1e-5), std::log2(1.0 + g), 1e-3);
}

TEST(FbRate, MonotoneAndClampedAtZero) {
  EXPECT_DOUBLE_EQ(fb_rate(1e-4, 10.0, 1e-9), 0.0);
  double prev = fb_rate(1.0, 50.0, 1e-5);
  for (double n = 100.0; n < 1e6; n *= 2.0) {
    const double r = fb_rate(1.0, n, 1e-5);
    EXPECT_GT(r, prev);
    prev = r;
  }
  EXPECT_GT(fb_rate(2.0, 160.0, 1e-5), fb_rate(1.5, 160.0, 1e-5));
  EXPECT_GT(fb_rate(1.0, 160.0, 1e-3), fb_rate(1.0, 160.0, 1e-7));
}

TEST(GammaRequired, OneBitPerUseNeedsMoreThanShannon) {
  const double g = gamma_required(160.0, 160.0, 1e-5);
  EXPECT_GT(g, 1.5);
  EXPECT_LT(g, 2.0);
  EXPECT_NEAR(fb_rate(g, 160.0, 1e-5), 1.0, 1e-7);
  for (double n : {170.0, 400.0, 1800.0}) {
    const double gn = gamma_required(160.0, n, 1e-5);
    EXPECT_NEAR(fb_rate(gn, n, 1e-5) * n, 160.0, 1e-5 * 160.0) << n;
    EXPECT_GT(gn, std::exp2(160.0 / n) - 1.0);
  }
  EXPECT_THROW(gamma_required(1000.0, 10.0, 1e-5), QosInfeasible);
}

TEST(QueueCapacity, DeadlineArithmetic) {
  EXPECT_EQ(queue_capacity(1e-3, 0.45e-3, 1e-4), 1);
  EXPECT_EQ(queue_capacity(1e-3, 0.1e-3, 1e-4), 8);
  EXPECT_EQ(queue_capacity(2e-3, 0.2e-3, 1e-4), 8);
  EXPECT_THROW(queue_capacity(1e-3, 0.9e-3, 1e-4), QosInfeasible);
  EXPECT_THROW(queue_capacity(1e-3, 1e-3, 1e-4), QosInfeasible);
}

TEST(Blocking, ClosedFormValues) {
  // rho = 1: 1/(K+1).
  EXPECT_NEAR(blocking_probability(1000.0, 1e-3, 6), 1.0 / 7.0, 1e-12);
  EXPECT_DOUBLE_EQ(blocking_probability(0.0, 1e-3, 3), 0.0);
  // rho = 0.5, K = 2: 0.5 * 0.25 / 0.875.
  EXPECT_NEAR(blocking_probability(500.0, 1e-3, 2), 0.125 / 0.875, 1e-12);
  // K = 0 blocks everything.
  EXPECT_NEAR(blocking_probability(10.0, 1e-3, 0), 1.0, 1e-12);
  // Heavy load tends to 1 - 1/rho.
  EXPECT_NEAR(blocking_probability(4000.0, 1e-3, 200), 0.75, 1e-12);
  double prev = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double b = blocking_probability(300.0, 1e-3, k);
    EXPECT_LT(b, prev);
    prev = b;
  }
}

TEST(RandomAccess, ExactBinomialForm) {
  MmtcSpec spec;  // 600 users, p_a = 0.01, 1 kHz preambles
  EXPECT_EQ(preamble_count(10e3, spec), 10);
  EXPECT_EQ(preamble_count(0.0, spec), 0);
  EXPECT_DOUBLE_EQ(ra_success_probability(0.0, spec), 0.0);
  EXPECT_NEAR(ra_success_probability(10e3, spec), std::pow(1.0 - 0.001, 599), 1e-12);
  // Smallest preamble count meeting 0.5.
  EXPECT_LT(ra_success_probability(8e3, spec), 0.5);
  EXPECT_GE(ra_success_probability(9e3, spec), 0.5);
  spec.user_count = 1;
  EXPECT_DOUBLE_EQ(ra_success_probability(1e3, spec), 1.0);
}

TEST(TiConstraint, FullTransmissionBudgetBlocklength) {
  const Scenario sc = paper_default_scenario();
  const TiSpec ti;  // 1 ms deadline, 160 bits
  const TiConstraint c = ti_constraint(ti, 400e3, sc);
  EXPECT_EQ(c.blocklength_n, 180);
  EXPECT_NEAR(c.service_time_tau, 0.45e-3, 1e-15);
  EXPECT_EQ(c.queue_capacity_K, 1);
  EXPECT_NEAR(c.gamma_req, gamma_required(160.0, 180.0, 1e-5), 1e-12);
  EXPECT_THROW(ti_constraint(ti, 300e3, sc), QosInfeasible);
  EXPECT_FALSE(try_ti_constraint(ti, 300e3, sc).has_value());
  EXPECT_FALSE(try_ti_constraint(ti, 0.0, sc).has_value());
}

TEST(TiConstraint, ShortensBlocklengthToMeetBlocking) {
  const Scenario sc = paper_default_scenario();
  TiSpec ti;
  ti.robot_count = 3;
  ti.arrival_rate_pkts_per_s = 200.0;
  const TiConstraint c = ti_constraint(ti, 4e6, sc);
  ASSERT_TRUE(c.blocking_ok);
  EXPECT_LE(c.blocking, ti.blocking_prob);
  EXPECT_LE(c.blocklength_n, 1800);
  EXPECT_GE(c.blocklength_n, 160);
  if (c.blocklength_n < 1800) {
    const double tau = (c.blocklength_n + 1) / 4e6;
    const int k = queue_capacity(ti.deadline_s, tau, sc.coord_latency_s);
    EXPECT_GT(blocking_probability(600.0, tau, k), ti.blocking_prob);
  }
}

TEST(TiConstraint, BlockingFeasibilityMonotoneInBandwidth) {
  const Scenario sc = paper_default_scenario();
  for (double lambda : {50.0, 200.0, 500.0}) {
    TiSpec ti;
    ti.robot_count = 5;
    ti.deadline_s = 2e-3;
    ti.arrival_rate_pkts_per_s = lambda;
    bool seen_ok = false;
    for (int blocks = 1; blocks <= 40; ++blocks) {
      const auto c = try_ti_constraint(ti, blocks * 1e5, sc);
      const bool ok = c && c->blocking_ok;
      if (seen_ok) EXPECT_TRUE(ok) << "lambda " << lambda << " blocks " << blocks;
      seen_ok = seen_ok || ok;
    }
    EXPECT_TRUE(seen_ok);
  }
}

TEST(Shannon, Rate) {
  EXPECT_DOUBLE_EQ(shannon_rate(1e6, 1.0), 1e6);
  EXPECT_NEAR(shannon_rate(2e5, 15.0), 8e5, 1e-6);
}
