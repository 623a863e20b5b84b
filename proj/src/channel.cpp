#include "slicebench/channel.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "slicebench/rng.hpp"

namespace slicebench {

double path_loss_db(double distance_m) {
  if (!(distance_m >= kMinDistanceM))
    throw std::domain_error("path_loss_db: distance below 1 m");
  return 128.1 + 37.6 * std::log10(distance_m / 1000.0);
}

ChannelSample::ChannelSample(int index, int rus, int antennas, int terminals)
    : index_(index),
      rus_(rus),
      antennas_(antennas),
      terminals_(terminals),
      gains_(static_cast<std::size_t>(rus) * antennas * terminals) {}

Eigen::Map<const Eigen::VectorXcd> ChannelSample::gain(int ru, int terminal) const {
  return {gains_.data() + offset(ru, terminal), antennas_};
}

Eigen::Map<Eigen::VectorXcd> ChannelSample::gain(int ru, int terminal) {
  return {gains_.data() + offset(ru, terminal), antennas_};
}

ChannelSample draw_sample(const Topology& top, const Scenario& sc, int t) {
  const int rus = static_cast<int>(top.ru_positions.size());
  ChannelSample cs(t, rus, sc.antennas_per_ru, top.terminal_count());
  Rng rng = derive_stream(sc.seed, "fading/sample-" + std::to_string(t));
  // Unit-variance circularly symmetric: each real component has variance 1/2.
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  for (int u = 0; u < top.terminal_count(); ++u) {
    for (int j = 0; j < rus; ++j) {
      const double amplitude = std::sqrt(std::pow(10.0, -path_loss_db(top.distances[j][u]) / 10.0));
      auto h = cs.gain(j, u);
      for (int a = 0; a < sc.antennas_per_ru; ++a) {
        const double re = normal(rng);
        const double im = normal(rng);
        h[a] = amplitude * std::complex<double>(re, im);
      }
    }
  }
  return cs;
}

std::vector<ChannelSample> draw_samples(const Topology& top, const Scenario& sc) {
  std::vector<ChannelSample> out;
  out.reserve(sc.saa_samples);
  for (int t = 0; t < sc.saa_samples; ++t) out.push_back(draw_sample(top, sc, t));
  return out;
}

Eigen::VectorXcd stacked_channel(const ChannelSample& cs, int terminal) {
  const int a = cs.antennas();
  Eigen::VectorXcd out(cs.ru_count() * a);
  for (int j = 0; j < cs.ru_count(); ++j) out.segment(j * a, a) = cs.gain(j, terminal);
  return out;
}

void write_channel_csv(std::ostream& out, std::span<const ChannelSample> samples) {
  out << "t,ru,terminal,antenna,re,im\n";
  char buf[128];
  for (const auto& cs : samples) {
    for (int u = 0; u < cs.terminal_count(); ++u) {
      for (int j = 0; j < cs.ru_count(); ++j) {
        const auto h = cs.gain(j, u);
        for (int a = 0; a < cs.antennas(); ++a) {
          std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.17g,%.17g\n", cs.index(), j, u, a,
                        h[a].real(), h[a].imag());
          out << buf;
        }
      }
    }
  }
}

}  // namespace slicebench
