#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "slicebench/scenario.hpp"

namespace slicebench {

/// 3GPP urban-macro path loss in dB, 128.1 + 37.6 log10(d / 1 km). Requires d >= 1 m.
double path_loss_db(double distance_m);

/// One short-timescale realization of the channel between every RU antenna
/// and every terminal. Gains are linear complex amplitudes.
class ChannelSample {
 public:
  ChannelSample() = default;
  ChannelSample(int index, int rus, int antennas, int terminals);

  int index() const { return index_; }
  int ru_count() const { return rus_; }
  int antennas() const { return antennas_; }
  int terminal_count() const { return terminals_; }

  /// h_{j,u}, the A-antenna channel from RU j to terminal u.
  Eigen::Map<const Eigen::VectorXcd> gain(int ru, int terminal) const;
  Eigen::Map<Eigen::VectorXcd> gain(int ru, int terminal);

 private:
  std::size_t offset(int ru, int terminal) const {
    return (static_cast<std::size_t>(terminal) * rus_ + ru) * antennas_;
  }

  int index_ = 0;
  int rus_ = 0;
  int antennas_ = 0;
  int terminals_ = 0;
  std::vector<std::complex<double>> gains_;
};

/// Rayleigh fading scaled by path loss, drawn from the stream (seed, "fading/sample-t").
ChannelSample draw_sample(const Topology& top, const Scenario& sc, int t);

/// Draws samples t = 0 .. saa_samples-1.
std::vector<ChannelSample> draw_samples(const Topology& top, const Scenario& sc);

/// CoMP joint-transmission channel [h_{1,u}; ...; h_{J,u}] of length J*A.
Eigen::VectorXcd stacked_channel(const ChannelSample& cs, int terminal);

/// CSV rows (t, ru, terminal, antenna, re, im) with a header line.
void write_channel_csv(std::ostream& out, std::span<const ChannelSample> samples);

}  // namespace slicebench
