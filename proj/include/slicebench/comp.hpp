#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "slicebench/channel.hpp"
#include "slicebench/scenario.hpp"

namespace slicebench {

/// Joint-transmission power minimisation for the robots of one TI slice.
/// Stacked channels carry the antennas of every RU in fixed RU order;
/// ru_antennas[j] lists the coordinates that belong to RU j. A budget of
/// +infinity drops that RU's power constraint; a budget of zero removes
/// the RU from the transmission.
struct BeamformingProblem {
  std::vector<Eigen::VectorXcd> channels;
  std::vector<double> gamma_req;
  double noise_power_w = 0.0;
  std::vector<double> per_ru_budget_w;
  std::vector<std::vector<int>> ru_antennas;

  int robots() const { return static_cast<int>(channels.size()); }
  int dimension() const { return channels.empty() ? 0 : static_cast<int>(channels.front().size()); }
};

/// Contiguous antenna groups: RU j owns coordinates [j*A, (j+1)*A).
std::vector<std::vector<int>> contiguous_ru_antennas(int rus, int antennas);

struct SdrOptions {
  double tolerance = 1e-7;
  int max_iters = 200;
  int randomizations = 100;
  std::uint64_t seed = 0;  // Gaussian randomization stream
};

enum class SdrStatus { optimal, infeasible, not_converged };

struct RelaxedSolution {
  SdrStatus status = SdrStatus::not_converged;
  std::vector<Eigen::MatrixXcd> covariances;  // watts, full stacked dimension
  double objective = 0.0;                     // sum of traces, watts
  double dual_objective = 0.0;                // watts
  double complementarity = 0.0;               // <X, Z>, solver units
  double primal_infeasibility = 0.0;
  int iterations = 0;
};

struct BeamformingSolution {
  bool feasible = false;
  std::vector<Eigen::MatrixXcd> covariances;
  std::vector<Eigen::VectorXcd> beamformers;
  std::vector<double> achieved_sinr;
  std::vector<double> per_ru_power;
  double total_power = 0.0;
  double relaxed_objective = 0.0;
  /// Recovered total power over the relaxed objective (>= 1 up to solver tolerance).
  double rank1_gap = 0.0;
};

/// gamma_k = |h_k^H w_k|^2 / (sum_{i != k} |h_k^H w_i|^2 + noise).
std::vector<double> sinr(std::span<const Eigen::VectorXcd> beamformers,
                         std::span<const Eigen::VectorXcd> channels, double noise_power_w);

/// Semidefinite relaxation of the beamforming problem:
///   min sum tr(Q_k)  s.t.  tr(H_k Q_k) >= gamma_k (sum_{i!=k} tr(H_k Q_i) + noise),
///                          sum_k tr(E_j Q_k) <= budget_j,  Q_k PSD.
RelaxedSolution solve_sdr_power_min(const BeamformingProblem& problem, const SdrOptions& options = {});

/// Rank-one beamformers from the relaxed covariances: principal eigenvectors
/// when every Q_k is numerically rank one, Gaussian randomization otherwise.
/// Each candidate set of directions gets its minimal powers from the SINR
/// equalities; the cheapest candidate within the per-RU budgets wins.
BeamformingSolution rank1_recover(const RelaxedSolution& relaxed, const BeamformingProblem& problem,
                                  const SdrOptions& options = {});

/// Minimal powers for fixed unit directions meeting every SINR target with
/// equality; empty when the targets are unreachable along those directions.
std::vector<double> min_powers_for_directions(std::span<const Eigen::VectorXcd> directions,
                                              const BeamformingProblem& problem);

struct EmbbPower {
  std::vector<double> user_power;   // watts; +inf when unreachable
  std::vector<int> serving_ru;      // strongest RU per user
  std::vector<double> per_ru_power; // sum over all users
  bool feasible = false;            // every user fits within the budgets
};

/// Equal bandwidth split over the slice's users, each served by MRT from its
/// strongest RU: p_u = (2^(R/b_u) - 1) N0 b_u / ||h_{j*,u}||^2.
EmbbPower embb_power(const EmbbSpec& spec, double slice_bandwidth_hz, const ChannelSample& cs,
                     const Topology& top, int slice, const Scenario& sc,
                     std::span<const double> budgets_w);

}  // namespace slicebench
