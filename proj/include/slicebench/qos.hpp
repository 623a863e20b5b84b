#pragma once

#include <optional>
#include <stdexcept>

#include "slicebench/scenario.hpp"

namespace slicebench {

/// A QoS target that no allocation of the given resources can meet.
class QosInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Upper-tail standard normal probability Q(x).
double q_function(double x);

/// Q^{-1}(p) for p in (0, 0.5).
double inverse_q(double p);

/// Finite-blocklength normal approximation in bits per channel use,
/// log2(1+g) - sqrt(V/n) Q^{-1}(eps) log2(e) with V = 1 - (1+g)^-2, clamped at 0.
double fb_rate(double gamma, double n, double eps);

inline constexpr double kGammaCap = 1e9;

/// Smallest SINR whose finite-blocklength rate carries L bits in n uses.
/// Throws QosInfeasible if even kGammaCap is not enough.
double gamma_required(double bits, double n, double eps);

/// Largest queue occupancy K that still meets the deadline under FCFS
/// service of duration tau. Throws QosInfeasible if D <= T_coord + tau.
int queue_capacity(double deadline_s, double tau_s, double coord_latency_s);

/// M/M/1/K blocking probability; K counts packets in the system including
/// the one in service.
double blocking_probability(double lambda, double tau_s, int capacity);

/// Probability that a tagged active mMTC device picks a preamble nobody else
/// picks, each of the other U-1 devices being active with probability p_a:
/// (1 - p_a/N)^(U-1), with N = floor(bandwidth / W_pre).
double ra_success_probability(double bandwidth_hz, const MmtcSpec& spec);

/// Preambles available in the given bandwidth.
int preamble_count(double bandwidth_hz, const MmtcSpec& spec);

struct TiConstraint {
  int blocklength_n = 0;
  double gamma_req = 0.0;
  int queue_capacity_K = 0;
  double service_time_tau = 0.0;
  double blocking = 0.0;
  bool blocking_ok = false;
};

/// Maps a TI slice's latency, decoding-error and blocking targets at the
/// given slice bandwidth to a blocklength, per-robot SINR target and queue
/// size. The blocklength is the longest one, up to floor(b * tau_tx), whose
/// service time keeps the slice queue within its blocking target; when none
/// does, n = floor(b * tau_tx) is returned with blocking_ok unset.
/// Throws QosInfeasible when the transmission budget cannot fit L channel uses.
TiConstraint ti_constraint(const TiSpec& spec, double slice_bandwidth_hz, const Scenario& sc);

/// Non-throwing variant of ti_constraint.
std::optional<TiConstraint> try_ti_constraint(const TiSpec& spec, double slice_bandwidth_hz,
                                              const Scenario& sc);

/// b log2(1 + gamma).
double shannon_rate(double bandwidth_hz, double gamma);

}  // namespace slicebench
