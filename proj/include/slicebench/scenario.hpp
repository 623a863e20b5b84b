#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace slicebench {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Tactile-Internet slice: robots sharing one FCFS queue and joint
/// beamforming on the slice bandwidth.
struct TiSpec {
  int robot_count = 1;
  double deadline_s = 1e-3;
  double decode_error_prob = 1e-5;
  double blocking_prob = 2e-8;
  double arrival_rate_pkts_per_s = 100.0;  // per robot
  double packet_bits = 160.0;
  bool operator==(const TiSpec&) const = default;
};

struct EmbbSpec {
  int user_count = 1;
  double rate_req_bps = 1e6;
  bool operator==(const EmbbSpec&) const = default;
};

struct MmtcSpec {
  int user_count = 600;
  double ra_success_req = 0.5;
  double activation_prob = 0.01;
  double preamble_width_hz = 1e3;
  bool operator==(const MmtcSpec&) const = default;
};

using SliceSpec = std::variant<TiSpec, EmbbSpec, MmtcSpec>;

enum class SliceKind { ti, embb, mmtc };

SliceKind kind_of(const SliceSpec& spec);
std::string_view kind_name(SliceKind kind);
int terminal_count(const SliceSpec& spec);

struct UtilityWeights {
  double ti = 10.0;
  double embb = 5.0;
  double mmtc = 3.0;
  bool operator==(const UtilityWeights&) const = default;
  double of(SliceKind kind) const;
};

/// How the IRA baseline fixes the long-timescale bandwidth.
enum class IraMode {
  first_sample,    // rounded solution of sample 1
  sample_average,  // average of per-sample rounded solutions, no consensus
};

struct AdmmConfig {
  double rho = 1.0;
  int max_iters = 50;
  double primal_tol = 1e-3;
  double dual_tol = 1e-3;
  bool operator==(const AdmmConfig&) const = default;
};

/// Numerical knobs of the solvers. Optional in the configuration document.
struct SolverSettings {
  double sdr_tolerance = 1e-7;
  int sdr_max_iters = 200;
  int randomizations = 100;
  IraMode ira_mode = IraMode::first_sample;
  AdmmConfig admm{};
  bool operator==(const SolverSettings&) const = default;
};

struct Scenario {
  double area_side_m = 1000.0;
  std::vector<Point> ru_positions;
  int antennas_per_ru = 2;
  double max_ru_power_w = 1.0;
  double noise_power_dbm = -110.0;  // over the total band
  double total_bandwidth_hz = 4e6;
  double block_width_hz = 1e5;
  double coord_latency_s = 1e-4;
  double ti_tx_fraction = 0.5;
  std::vector<SliceSpec> slices;
  double t_long_s = 600.0;
  double t_short_s = 10.0;
  int saa_samples = 20;
  UtilityWeights utility_weights{};
  double power_price = 1.0;  // utility per watt
  std::uint64_t seed = 1;
  SolverSettings solver{};

  bool operator==(const Scenario&) const = default;

  int ru_count() const { return static_cast<int>(ru_positions.size()); }
  int slice_count() const { return static_cast<int>(slices.size()); }
  /// Number of bandwidth blocks M = B_tot / W_RB.
  int block_count() const;
  /// Noise power spectral density N0 in W/Hz.
  double noise_psd() const;
  int total_terminals() const;
};

/// Raised for malformed documents; the message carries line/field context.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks every scenario invariant, throwing ConfigError naming the first
/// violation.
void validate(const Scenario& sc);

/// Parses and validates a JSON configuration document.
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::string& path);
std::string dump_scenario(const Scenario& sc);

/// Two TI, three eMBB and three mMTC slices on three RUs over 1 km^2.
Scenario paper_default_scenario();

struct Topology {
  std::vector<Point> ru_positions;
  std::vector<Point> terminal_positions;  // all slices, in slice order
  std::vector<int> slice_offset;          // first terminal of each slice; size slices+1
  std::vector<std::vector<double>> distances;  // [ru][terminal], floored at 1 m

  int terminal_count() const { return static_cast<int>(terminal_positions.size()); }
  int slice_terminal_count(int slice) const {
    return slice_offset[slice + 1] - slice_offset[slice];
  }
  int terminal(int slice, int local) const { return slice_offset[slice] + local; }
};

inline constexpr double kMinDistanceM = 1.0;

/// Places terminals i.i.d. uniform over the square from the stream (seed, label).
Topology generate_topology(const Scenario& sc, std::string_view label = "topology");

/// Builds a topology from explicit terminal positions (slice order).
Topology make_topology(const Scenario& sc, std::vector<Point> terminals);

}  // namespace slicebench
