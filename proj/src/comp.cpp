#include "slicebench/comp.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>

#include "slicebench/rng.hpp"
#include "slicebench/sdp.hpp"

namespace slicebench {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

std::vector<std::vector<int>> contiguous_ru_antennas(int rus, int antennas) {
  std::vector<std::vector<int>> out(rus);
  for (int j = 0; j < rus; ++j)
    for (int a = 0; a < antennas; ++a) out[j].push_back(j * antennas + a);
  return out;
}

std::vector<double> sinr(std::span<const VectorXcd> beamformers, std::span<const VectorXcd> channels,
                         double noise_power_w) {
  std::vector<double> out(channels.size());
  for (std::size_t k = 0; k < channels.size(); ++k) {
    double interference = 0.0;
    for (std::size_t i = 0; i < beamformers.size(); ++i)
      if (i != k) interference += std::norm(channels[k].dot(beamformers[i]));
    out[k] = std::norm(channels[k].dot(beamformers[k])) / (interference + noise_power_w);
  }
  return out;
}

namespace {

bool budget_active(double b) { return std::isfinite(b); }

struct Reduced {
  std::vector<int> coords;       // stacked coordinates kept
  std::vector<int> rus;          // RUs kept
  std::vector<int> power_rows;   // RUs with a finite budget
  std::vector<std::vector<int>> local;  // per kept RU, positions within coords
};

Reduced reduce(const BeamformingProblem& p) {
  Reduced r;
  for (std::size_t j = 0; j < p.ru_antennas.size(); ++j) {
    if (!(p.per_ru_budget_w[j] > 0.0)) continue;
    std::vector<int> loc;
    for (int c : p.ru_antennas[j]) {
      loc.push_back(static_cast<int>(r.coords.size()));
      r.coords.push_back(c);
    }
    r.local.push_back(std::move(loc));
    r.rus.push_back(static_cast<int>(j));
    if (budget_active(p.per_ru_budget_w[j])) r.power_rows.push_back(static_cast<int>(r.rus.size()) - 1);
  }
  return r;
}

}  // namespace

RelaxedSolution solve_sdr_power_min(const BeamformingProblem& p, const SdrOptions& options) {
  RelaxedSolution out;
  const int K = p.robots();
  const int full_dim = p.dimension();
  if (K == 0) {
    out.status = SdrStatus::optimal;
    return out;
  }
  const Reduced red = reduce(p);
  const int n = static_cast<int>(red.coords.size());
  if (n == 0) {
    out.status = SdrStatus::infeasible;
    return out;
  }

  // Work with g_k = h_k / sqrt(noise) on the kept coordinates, variables
  // scaled by s so that the SINR rows have O(1) coefficients.
  std::vector<VectorXcd> g(K);
  double scale = 0.0;
  for (int k = 0; k < K; ++k) {
    g[k].resize(n);
    for (int c = 0; c < n; ++c) g[k][c] = p.channels[k][red.coords[c]] / std::sqrt(p.noise_power_w);
    const double g2 = g[k].squaredNorm();
    if (!(g2 > 0.0)) {
      out.status = SdrStatus::infeasible;
      return out;
    }
    scale = std::max(scale, p.gamma_req[k] / g2);
  }

  // Real embedding: Hermitian Q <-> [[Re, -Im], [Im, Re]], tr(H Q) = <phi(H), R> / 2,
  // and phi(g g^H) = a a' + b b' with a = [Re g; Im g], b = [-Im g; Re g].
  const int dim = 2 * n;
  std::vector<MatrixXd> gfac(K, MatrixXd(dim, 2));
  for (int k = 0; k < K; ++k) {
    gfac[k].col(0) << g[k].real(), g[k].imag();
    gfac[k].col(1) << -g[k].imag(), g[k].real();
  }

  sdp::Problem prob;
  prob.block_sizes.assign(K, dim);
  const int rows_power = static_cast<int>(red.power_rows.size());
  prob.linear_size = K + rows_power;
  prob.cost.assign(K, 0.5 * MatrixXd::Identity(dim, dim));
  prob.linear_cost = VectorXd::Zero(prob.linear_size);

  for (int k = 0; k < K; ++k) {
    sdp::Constraint c;
    for (int i = 0; i < K; ++i) {
      const double coef = (i == k) ? scale / p.gamma_req[k] : -scale;
      c.terms.push_back({i, gfac[k], VectorXd::Constant(2, 0.5 * coef)});
    }
    c.linear.push_back({k, -1.0});
    c.rhs = 1.0;
    prob.constraints.push_back(std::move(c));
  }
  for (int r = 0; r < rows_power; ++r) {
    const int kept = red.power_rows[r];
    const auto& loc = red.local[kept];
    const double budget = p.per_ru_budget_w[red.rus[kept]];
    MatrixXd sel = MatrixXd::Zero(dim, 2 * static_cast<int>(loc.size()));
    for (std::size_t a = 0; a < loc.size(); ++a) {
      sel(loc[a], 2 * a) = 1.0;
      sel(n + loc[a], 2 * a + 1) = 1.0;
    }
    sdp::Constraint c;
    for (int i = 0; i < K; ++i) c.terms.push_back({i, sel, VectorXd::Constant(sel.cols(), 0.5 * scale / budget)});
    c.linear.push_back({K + r, 1.0});
    c.rhs = 1.0;
    prob.constraints.push_back(std::move(c));
  }

  sdp::Options so;
  so.gap_tol = options.tolerance;
  so.max_iters = options.max_iters;
  const sdp::Solution sol = sdp::solve(prob, so);
  out.iterations = sol.iterations;
  out.complementarity = sol.complementarity;
  out.primal_infeasibility = sol.primal_infeasibility;
  switch (sol.status) {
    case sdp::Status::optimal: out.status = SdrStatus::optimal; break;
    case sdp::Status::primal_infeasible: out.status = SdrStatus::infeasible; return out;
    default: out.status = SdrStatus::not_converged; return out;
  }

  out.objective = scale * sol.primal_objective;
  out.dual_objective = scale * sol.dual_objective;
  out.covariances.assign(K, MatrixXcd::Zero(full_dim, full_dim));
  for (int k = 0; k < K; ++k) {
    const MatrixXd& R = sol.X[k];
    const MatrixXd re = 0.5 * (R.topLeftCorner(n, n) + R.bottomRightCorner(n, n));
    const MatrixXd im = 0.5 * (R.bottomLeftCorner(n, n) - R.topRightCorner(n, n));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        out.covariances[k](red.coords[a], red.coords[b]) = scale * std::complex<double>(re(a, b), im(a, b));
  }
  return out;
}

std::vector<double> min_powers_for_directions(std::span<const VectorXcd> dirs, const BeamformingProblem& p) {
  const int K = p.robots();
  MatrixXd A(K, K);
  VectorXd rhs(K);
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < K; ++i) {
      const double f = std::norm(p.channels[k].dot(dirs[i]));
      A(k, i) = (i == k) ? f : -p.gamma_req[k] * f;
    }
    rhs[k] = p.gamma_req[k] * p.noise_power_w;
  }
  const VectorXd powers = A.partialPivLu().solve(rhs);
  std::vector<double> out(K);
  for (int k = 0; k < K; ++k) {
    if (!(powers[k] > 0.0) || !std::isfinite(powers[k])) return {};
    out[k] = powers[k];
  }
  return out;
}

namespace {

struct Candidate {
  std::vector<VectorXcd> beamformers;
  std::vector<double> per_ru;
  double total = std::numeric_limits<double>::infinity();
};

// Powers for unit directions, checked against SINR targets and budgets.
std::optional<Candidate> evaluate(const std::vector<VectorXcd>& dirs, const BeamformingProblem& p) {
  const auto powers = min_powers_for_directions(dirs, p);
  if (powers.empty()) return std::nullopt;
  Candidate c;
  c.per_ru.assign(p.ru_antennas.size(), 0.0);
  c.total = 0.0;
  for (int k = 0; k < p.robots(); ++k) {
    c.beamformers.push_back(std::sqrt(powers[k]) * dirs[k]);
    c.total += powers[k];
    for (std::size_t j = 0; j < p.ru_antennas.size(); ++j)
      for (int a : p.ru_antennas[j]) c.per_ru[j] += std::norm(c.beamformers.back()[a]);
  }
  for (std::size_t j = 0; j < p.ru_antennas.size(); ++j)
    if (c.per_ru[j] > p.per_ru_budget_w[j] * (1.0 + 1e-12)) return std::nullopt;
  const auto achieved = sinr(c.beamformers, p.channels, p.noise_power_w);
  for (int k = 0; k < p.robots(); ++k)
    if (achieved[k] < p.gamma_req[k] * (1.0 - 1e-9)) return std::nullopt;
  return c;
}

}  // namespace

BeamformingSolution rank1_recover(const RelaxedSolution& relaxed, const BeamformingProblem& p,
                                  const SdrOptions& options) {
  BeamformingSolution out;
  out.covariances = relaxed.covariances;
  out.relaxed_objective = relaxed.objective;
  out.per_ru_power.assign(p.ru_antennas.size(), 0.0);
  const int K = p.robots();
  if (relaxed.status != SdrStatus::optimal) return out;
  if (K == 0) {
    out.feasible = true;
    out.rank1_gap = 1.0;
    return out;
  }

  std::vector<Eigen::SelfAdjointEigenSolver<MatrixXcd>> eig;
  bool rank_one = true;
  std::vector<VectorXcd> principal;
  for (int k = 0; k < K; ++k) {
    eig.emplace_back(relaxed.covariances[k]);
    const auto& vals = eig.back().eigenvalues();
    const double trace = vals.sum();
    const double top = vals(vals.size() - 1);
    if (!(trace > 0.0) || top / trace < 0.999) rank_one = false;
    principal.push_back(eig.back().eigenvectors().col(vals.size() - 1));
  }

  std::optional<Candidate> best = evaluate(principal, p);
  if (!rank_one || !best) {
    Rng rng = derive_stream(options.seed, "randomization");
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    std::vector<MatrixXcd> roots(K);
    for (int k = 0; k < K; ++k)
      roots[k] = eig[k].eigenvectors() * eig[k].eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    const int dim = p.dimension();
    std::vector<VectorXcd> dirs(K);
    for (int r = 0; r < options.randomizations; ++r) {
      bool ok = true;
      for (int k = 0; k < K; ++k) {
        VectorXcd e(dim);
        for (int a = 0; a < dim; ++a) e[a] = {normal(rng), normal(rng)};
        dirs[k] = roots[k] * e;
        const double nrm = dirs[k].norm();
        if (!(nrm > 0.0)) ok = false;
        else dirs[k] /= nrm;
      }
      if (!ok) continue;
      auto cand = evaluate(dirs, p);
      if (cand && (!best || cand->total < best->total)) best = std::move(cand);
    }
  }
  if (!best) return out;

  out.feasible = true;
  out.beamformers = std::move(best->beamformers);
  out.per_ru_power = std::move(best->per_ru);
  out.total_power = best->total;
  out.achieved_sinr = sinr(out.beamformers, p.channels, p.noise_power_w);
  out.rank1_gap = relaxed.objective > 0.0 ? out.total_power / relaxed.objective : 1.0;
  return out;
}

EmbbPower embb_power(const EmbbSpec& spec, double slice_bandwidth_hz, const ChannelSample& cs,
                     const Topology& top, int slice, const Scenario& sc, std::span<const double> budgets_w) {
  EmbbPower out;
  const int users = top.slice_terminal_count(slice);
  out.user_power.assign(users, 0.0);
  out.serving_ru.assign(users, 0);
  out.per_ru_power.assign(cs.ru_count(), 0.0);
  const double n0 = sc.noise_psd();
  const double bu = slice_bandwidth_hz / users;
  for (int k = 0; k < users; ++k) {
    const int u = top.terminal(slice, k);
    int best = 0;
    double best_gain = -1.0;
    for (int j = 0; j < cs.ru_count(); ++j) {
      const double g = cs.gain(j, u).squaredNorm();
      if (g > best_gain) {
        best_gain = g;
        best = j;
      }
    }
    out.serving_ru[k] = best;
    double p = 0.0;
    if (spec.rate_req_bps > 0.0) {
      p = (bu > 0.0 && best_gain > 0.0)
              ? std::expm1(spec.rate_req_bps / bu * std::numbers::ln2) * n0 * bu / best_gain
              : std::numeric_limits<double>::infinity();
    }
    out.user_power[k] = p;
    out.per_ru_power[best] += p;
  }
  out.feasible = true;
  for (int j = 0; j < cs.ru_count(); ++j)
    if (!(out.per_ru_power[j] <= budgets_w[j])) out.feasible = false;
  return out;
}

}  // namespace slicebench
