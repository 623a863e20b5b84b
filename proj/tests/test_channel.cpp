#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slicebench/channel.hpp"

using namespace slicebench;

TEST(PathLoss, ReferenceDistances) {
  EXPECT_NEAR(path_loss_db(1000.0), 128.1, 1e-12);
  EXPECT_NEAR(path_loss_db(100.0), 90.5, 1e-12);
  EXPECT_NEAR(path_loss_db(500.0), 128.1 + 37.6 * -0.30102999566398120, 1e-9);
  EXPECT_NEAR(path_loss_db(500.0), 116.78, 5e-3);
}

TEST(PathLoss, RejectsSubMetreAndIsMonotone) {
  EXPECT_THROW(path_loss_db(0.5), std::domain_error);
  EXPECT_NO_THROW(path_loss_db(1.0));
  double prev = path_loss_db(1.0);
  for (double d = 2.0; d < 2000.0; d *= 1.7) {
    EXPECT_GT(path_loss_db(d), prev);
    prev = path_loss_db(d);
  }
}

namespace {

Scenario one_terminal_scenario() {
  Scenario sc = paper_default_scenario();
  sc.slices = {EmbbSpec{.user_count = 1, .rate_req_bps = 1e6}};
  return sc;
}

}  // namespace

TEST(ChannelSample, MeanPowerMatchesPathLoss) {
  Scenario sc = one_terminal_scenario();
  sc.seed = 3;
  const Topology top = make_topology(sc, {{500.0, 500.0}});
  const int draws = 10000;
  std::vector<double> mean(sc.ru_count(), 0.0);
  for (int t = 0; t < draws; ++t) {
    const ChannelSample cs = draw_sample(top, sc, t);
    for (int j = 0; j < sc.ru_count(); ++j) mean[j] += cs.gain(j, 0).squaredNorm() / draws;
  }
  for (int j = 0; j < sc.ru_count(); ++j) {
    const double expected = sc.antennas_per_ru * std::pow(10.0, -path_loss_db(top.distances[j][0]) / 10.0);
    EXPECT_NEAR(mean[j] / expected, 1.0, 0.03);
  }
}

TEST(ChannelSample, PerAntennaPowerIsExponential) {
  // Kolmogorov-Smirnov test against Exp(mean) at the 1% level.
  Scenario sc = one_terminal_scenario();
  sc.seed = 11;
  const Topology top = make_topology(sc, {{100.0, 900.0}});
  const double mean = std::pow(10.0, -path_loss_db(top.distances[0][0]) / 10.0);
  std::vector<double> x;
  for (int t = 0; t < 10000; ++t) x.push_back(std::norm(draw_sample(top, sc, t).gain(0, 0)[0]));
  std::sort(x.begin(), x.end());
  double d = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 1.0 - std::exp(-x[i] / mean);
    d = std::max({d, cdf - i / n, (i + 1) / n - cdf});
  }
  EXPECT_LT(d, 1.628 / std::sqrt(n));
}

TEST(ChannelSample, DeterministicPerIndexAndDistinctAcrossIndices) {
  Scenario sc = paper_default_scenario();
  sc.seed = 8;
  const Topology top = generate_topology(sc);
  const ChannelSample a = draw_sample(top, sc, 4);
  const ChannelSample b = draw_sample(top, sc, 4);
  const ChannelSample c = draw_sample(top, sc, 5);
  EXPECT_EQ(a.index(), 4);
  for (int u = 0; u < top.terminal_count(); u += 37) {
    EXPECT_EQ(a.gain(1, u), b.gain(1, u));
    EXPECT_NE(a.gain(1, u), c.gain(1, u));
    EXPECT_TRUE(a.gain(1, u).allFinite());
  }
  const auto all = draw_samples(top, sc);
  ASSERT_EQ(static_cast<int>(all.size()), sc.saa_samples);
  EXPECT_EQ(all[4].gain(2, 9), a.gain(2, 9));
}

TEST(StackedChannel, ConcatenatesRusInOrder) {
  Scenario sc = paper_default_scenario();
  const Topology top = generate_topology(sc);
  const ChannelSample cs = draw_sample(top, sc, 0);
  const Eigen::VectorXcd h = stacked_channel(cs, 3);
  ASSERT_EQ(h.size(), 6);
  double parts = 0.0;
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(h.segment(2 * j, 2), cs.gain(j, 3));
    parts += cs.gain(j, 3).squaredNorm();
  }
  EXPECT_NEAR(h.squaredNorm(), parts, 1e-12 * parts);

  Scenario single = one_terminal_scenario();
  single.ru_positions = {{500.0, 500.0}};
  const Topology t1 = make_topology(single, {{10.0, 10.0}});
  const ChannelSample c1 = draw_sample(t1, single, 0);
  EXPECT_EQ(stacked_channel(c1, 0), Eigen::VectorXcd(c1.gain(0, 0)));
}

TEST(ChannelSample, CsvDumpHasOneRowPerAntenna) {
  Scenario sc = one_terminal_scenario();
  const Topology top = make_topology(sc, {{1.0, 1.0}});
  const auto samples = std::vector<ChannelSample>{draw_sample(top, sc, 0), draw_sample(top, sc, 1)};
  std::ostringstream os;
  write_channel_csv(os, samples);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("t,ru,terminal,antenna,re,im\n", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 2 * 3 * 2);
}
