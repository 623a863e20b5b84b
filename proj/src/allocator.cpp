#include "slicebench/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "slicebench/parallel.hpp"
#include "slicebench/rng.hpp"

namespace slicebench {

double slice_utility(SliceKind kind, double satisfied_fraction, double power_w, const Scenario& sc) {
  return sc.utility_weights.of(kind) * satisfied_fraction - sc.power_price * power_w;
}

double SampleResult::utility() const {
  double u = 0.0;
  for (const auto& s : slices) u += s.utility;
  return u;
}

SampleEvaluator::SampleEvaluator(const Scenario& sc, const Topology& top, const ChannelSample& cs)
    : sc_(sc), top_(top), cs_(cs) {
  for (SliceKind kind : {SliceKind::ti, SliceKind::embb, SliceKind::mmtc})
    for (int s = 0; s < sc.slice_count(); ++s)
      if (kind_of(sc.slices[s]) == kind) order_.push_back(s);
  stacked_.resize(sc.slice_count());
  for (int s = 0; s < sc.slice_count(); ++s) {
    if (kind_of(sc.slices[s]) != SliceKind::ti) continue;
    for (int k = 0; k < top.slice_terminal_count(s); ++k)
      stacked_[s].push_back(stacked_channel(cs, top.terminal(s, k)));
  }
}

BeamformingProblem SampleEvaluator::ti_problem(int slice, double gamma, double noise,
                                               std::span<const double> budgets) const {
  BeamformingProblem p;
  p.channels = stacked_[slice];
  p.gamma_req.assign(p.channels.size(), gamma);
  p.noise_power_w = noise;
  p.per_ru_budget_w.assign(budgets.begin(), budgets.end());
  p.ru_antennas = contiguous_ru_antennas(cs_.ru_count(), cs_.antennas());
  return p;
}

SdrOptions SampleEvaluator::sdr_options(int slice, int blocklength) const {
  SdrOptions o;
  o.tolerance = sc_.solver.sdr_tolerance;
  o.max_iters = sc_.solver.sdr_max_iters;
  o.randomizations = sc_.solver.randomizations;
  o.seed = derive_seed(sc_.seed, "beamforming/sample-" + std::to_string(cs_.index()) + "/slice-" +
                                     std::to_string(slice) + "/n-" + std::to_string(blocklength));
  return o;
}

std::optional<BeamformingSolution> SampleEvaluator::serve_ti(int slice, double bandwidth_hz,
                                                             std::span<const double> budgets) {
  const auto& spec = std::get<TiSpec>(sc_.slices[slice]);
  const auto tc = try_ti_constraint(spec, bandwidth_hz, sc_);
  if (!tc || !tc->blocking_ok) return std::nullopt;

  // Without budgets the relaxation is homogeneous in the noise power, so one
  // unit-noise solve per blocklength serves every bandwidth with that n.
  const auto key = std::make_pair(slice, tc->blocklength_n);
  auto it = ti_cache_.find(key);
  if (it == ti_cache_.end()) {
    const std::vector<double> unlimited(cs_.ru_count(), std::numeric_limits<double>::infinity());
    const auto problem = ti_problem(slice, tc->gamma_req, 1.0, unlimited);
    const auto options = sdr_options(slice, tc->blocklength_n);
    ++sdr_solves_;
    const auto relaxed = solve_sdr_power_min(problem, options);
    TiUnit unit;
    unit.unit = rank1_recover(relaxed, problem, options);
    unit.feasible = unit.unit.feasible;
    it = ti_cache_.emplace(key, std::move(unit)).first;
  }
  const TiUnit& unit = it->second;
  if (!unit.feasible) return std::nullopt;

  const double noise = sc_.noise_psd() * bandwidth_hz;
  bool within = true;
  for (int j = 0; j < cs_.ru_count(); ++j)
    if (unit.unit.per_ru_power[j] * noise > budgets[j] * (1.0 + 1e-12)) within = false;
  if (within) {
    BeamformingSolution out = unit.unit;
    const double amp = std::sqrt(noise);
    for (auto& w : out.beamformers) w *= amp;
    for (auto& q : out.covariances) q *= noise;
    for (auto& p : out.per_ru_power) p *= noise;
    out.total_power *= noise;
    out.relaxed_objective *= noise;
    return out;
  }

  // A budget binds: solve the full problem for this window.
  const auto problem = ti_problem(slice, tc->gamma_req, noise, budgets);
  const auto options = sdr_options(slice, tc->blocklength_n);
  ++sdr_solves_;
  auto solution = rank1_recover(solve_sdr_power_min(problem, options), problem, options);
  if (!solution.feasible) return std::nullopt;
  return solution;
}

SliceOutcome SampleEvaluator::embb_outcome(int slice, double bandwidth_hz, std::vector<double>& budgets,
                                           std::vector<double>* per_ru, std::vector<double>* user_power) const {
  SliceOutcome o;
  const auto& spec = std::get<EmbbSpec>(sc_.slices[slice]);
  const int users = top_.slice_terminal_count(slice);
  if (bandwidth_hz > 0.0) {
    const EmbbPower ep = embb_power(spec, bandwidth_hz, cs_, top_, slice, sc_, budgets);
    std::vector<int> idx(users);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return ep.user_power[a] < ep.user_power[b]; });
    // Cheapest users first, while the serving RU has budget and the user pays off.
    const double per_user_value = sc_.utility_weights.embb / users;
    int served = 0;
    for (int k : idx) {
      const double p = ep.user_power[k];
      const int j = ep.serving_ru[k];
      if (!std::isfinite(p) || p > budgets[j]) continue;
      if (per_user_value - sc_.power_price * p <= 0.0) continue;
      budgets[j] -= p;
      if (per_ru) (*per_ru)[j] += p;
      if (user_power) (*user_power)[k] = p;
      o.power_w += p;
      ++served;
    }
    o.satisfied = static_cast<double>(served) / users;
  }
  o.utility = slice_utility(SliceKind::embb, o.satisfied, o.power_w, sc_);
  return o;
}

SliceOutcome SampleEvaluator::mmtc_outcome(int slice, double bandwidth_hz) const {
  const auto& spec = std::get<MmtcSpec>(sc_.slices[slice]);
  SliceOutcome o;
  o.satisfied = ra_success_probability(bandwidth_hz, spec) >= spec.ra_success_req ? 1.0 : 0.0;
  o.utility = slice_utility(SliceKind::mmtc, o.satisfied, 0.0, sc_);
  return o;
}

SampleResult SampleEvaluator::solve(std::span<const double> blocks, bool details) {
  const int n_slices = sc_.slice_count();
  SampleResult out;
  out.slices.resize(n_slices);
  out.per_ru_power.assign(cs_.ru_count(), 0.0);
  if (details) {
    out.ti_beamforming.resize(n_slices);
    out.embb_user_power.resize(n_slices);
  }
  std::vector<double> budgets(cs_.ru_count(), sc_.max_ru_power_w);

  for (int s : order_) {
    const double bandwidth = std::max(0.0, blocks[s]) * sc_.block_width_hz;
    const SliceKind kind = kind_of(sc_.slices[s]);
    SliceOutcome& o = out.slices[s];
    if (kind == SliceKind::ti) {
      if (bandwidth > 0.0) {
        auto bf = serve_ti(s, bandwidth, budgets);
        if (bf && slice_utility(kind, 1.0, bf->total_power, sc_) > 0.0) {
          o.satisfied = 1.0;
          o.power_w = bf->total_power;
          for (int j = 0; j < cs_.ru_count(); ++j) {
            out.per_ru_power[j] += bf->per_ru_power[j];
            budgets[j] = std::max(0.0, budgets[j] - bf->per_ru_power[j]);
          }
          if (details) out.ti_beamforming[s] = std::move(bf);
        }
      }
      o.utility = slice_utility(kind, o.satisfied, o.power_w, sc_);
    } else if (kind == SliceKind::embb) {
      std::vector<double>* user_power = nullptr;
      if (details) {
        out.embb_user_power[s].assign(top_.slice_terminal_count(s), 0.0);
        user_power = &out.embb_user_power[s];
      }
      o = embb_outcome(s, bandwidth, budgets, &out.per_ru_power, user_power);
    } else {
      o = mmtc_outcome(s, bandwidth);
    }
  }
  return out;
}

SampleResult solve_sample(std::span<const int> blocks, const ChannelSample& cs, const Scenario& sc,
                          const Topology& top) {
  SampleEvaluator ev(sc, top, cs);
  std::vector<double> x(blocks.begin(), blocks.end());
  return ev.solve(x, true);
}

double SaaObjective::operator()(const std::vector<int>& blocks) {
  if (auto it = memo_.find(blocks); it != memo_.end()) return it->second;
  const std::vector<double> x(blocks.begin(), blocks.end());
  std::vector<double> values(samples_.size());
  parallel_for(static_cast<int>(samples_.size()), [&](int t) { values[t] = samples_[t]->utility(x); });
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(samples_.size());
  memo_.emplace(blocks, mean);
  return mean;
}

std::vector<double> project_to_simplex(std::span<const double> v, double total) {
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::max(0.0, v[i]);
    sum += out[i];
  }
  if (sum <= total) return out;
  // Projection onto {x >= 0, sum x = total}: x = max(v - theta, 0).
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double t = (cumulative - total) / static_cast<double>(k + 1);
    if (k + 1 == sorted.size() || sorted[k + 1] <= t) {
      theta = t;
      break;
    }
  }
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

std::vector<int> relax_and_round(SaaObjective& objective, std::span<const double> z0, int total_blocks) {
  const int n = static_cast<int>(z0.size());
  std::vector<int> z(n);
  int used = 0;
  for (int s = 0; s < n; ++s) {
    z[s] = static_cast<int>(std::floor(std::max(0.0, z0[s]) + 1e-9));
    used += z[s];
  }
  while (used > total_blocks) {
    --*std::max_element(z.begin(), z.end());
    --used;
  }

  // Unused spectrum has no value, so every leftover block is handed out.
  for (; used < total_blocks; ++used) {
    const double base = objective(z);
    int best = 0;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < n; ++s) {
      ++z[s];
      const double gain = objective(z) - base;
      --z[s];
      if (gain > best_gain) {
        best_gain = gain;
        best = s;
      }
    }
    ++z[best];
  }

  for (int round = 0; round < 50; ++round) {
    const double base = objective(z);
    double best_gain = 0.0;
    int from = -1;
    int to = -1;
    for (int a = 0; a < n; ++a) {
      if (z[a] == 0) continue;
      for (int b = 0; b < n; ++b) {
        if (a == b) continue;
        --z[a];
        ++z[b];
        const double gain = objective(z) - base;
        ++z[a];
        --z[b];
        if (gain > best_gain) {
          best_gain = gain;
          from = a;
          to = b;
        }
      }
    }
    if (from < 0 || best_gain <= 1e-9 * (1.0 + std::abs(base))) break;
    --z[from];
    ++z[to];
  }
  return z;
}

const std::vector<double>& SampleEvaluator::surrogate_table(int slice) {
  if (surrogate_.empty()) surrogate_.resize(sc_.slice_count());
  auto& table = surrogate_[slice];
  if (!table.empty()) return table;
  const int points = lattice_points();
  table.resize(points + 1);
  const std::vector<double> full(cs_.ru_count(), sc_.max_ru_power_w);
  const SliceKind kind = kind_of(sc_.slices[slice]);
  for (int k = 0; k <= points; ++k) {
    const double bandwidth = k * kLatticeStepBlocks * sc_.block_width_hz;
    if (kind == SliceKind::ti) {
      table[k] = ti_surrogate(slice, bandwidth);
    } else if (kind == SliceKind::embb) {
      std::vector<double> budgets = full;
      table[k] = embb_outcome(slice, bandwidth, budgets, nullptr, nullptr).utility;
    } else {
      table[k] = mmtc_outcome(slice, bandwidth).utility;
    }
  }
  return table;
}

double SampleEvaluator::ti_surrogate(int slice, double bandwidth_hz) const {
  if (!(bandwidth_hz > 0.0)) return 0.0;
  const auto& spec = std::get<TiSpec>(sc_.slices[slice]);
  const auto tc = try_ti_constraint(spec, bandwidth_hz, sc_);
  if (!tc || !tc->blocking_ok) return 0.0;
  // Interference-free bound: each robot alone with its matched filter.
  const double noise = sc_.noise_psd() * bandwidth_hz;
  double power = 0.0;
  for (const auto& h : stacked_[slice]) power += tc->gamma_req * noise / h.squaredNorm();
  const double u = slice_utility(SliceKind::ti, 1.0, power, sc_);
  return u > 0.0 ? u : 0.0;
}

int SampleEvaluator::lattice_points() const {
  return static_cast<int>(std::floor(sc_.block_count() / kLatticeStepBlocks + 1e-9));
}

namespace {

constexpr int kMaxSweeps = 30;

// Exact maximiser of sum_s value[s][k_s] subject to sum_s k_s <= points.
std::vector<int> separable_argmax(const std::vector<std::vector<double>>& value, int points) {
  const int n = static_cast<int>(value.size());
  const double ninf = -std::numeric_limits<double>::infinity();
  // best[s][c]: optimum over slices s.. with c lattice steps still available.
  std::vector<std::vector<double>> best(n + 1, std::vector<double>(points + 1, 0.0));
  std::vector<std::vector<int>> choice(n, std::vector<int>(points + 1, 0));
  for (int s = n - 1; s >= 0; --s) {
    for (int c = 0; c <= points; ++c) {
      double top = ninf;
      for (int k = 0; k <= c; ++k) {
        const double v = value[s][k] + best[s + 1][c - k];
        if (v > top) {
          top = v;
          choice[s][c] = k;
        }
      }
      best[s][c] = top;
    }
  }
  std::vector<int> out(n);
  int c = points;
  for (int s = 0; s < n; ++s) {
    out[s] = choice[s][c];
    c -= out[s];
  }
  return out;
}

}  // namespace

std::vector<double> subproblem_continuous(SampleEvaluator& sample, std::span<const double> z_ref,
                                          std::span<const double> u, double rho,
                                          std::span<const double> start) {
  const int n = static_cast<int>(z_ref.size());
  const int points = sample.lattice_points();
  const double step = kLatticeStepBlocks;

  auto penalty = [&](int s, int k) {
    const double d = k * step - z_ref[s] + u[s];
    return 0.5 * rho * d * d;
  };
  auto to_blocks = [&](const std::vector<int>& k) {
    std::vector<double> x(n);
    for (int s = 0; s < n; ++s) x[s] = k[s] * step;
    return x;
  };
  auto objective = [&](const std::vector<int>& k) {
    double f = sample.utility(to_blocks(k));
    for (int s = 0; s < n; ++s) f -= penalty(s, k[s]);
    return f;
  };

  std::vector<std::vector<double>> value(n);
  for (int s = 0; s < n; ++s) {
    const auto& table = sample.surrogate_table(s);
    value[s].resize(points + 1);
    for (int k = 0; k <= points; ++k) value[s][k] = table[k] - penalty(s, k);
  }
  std::vector<int> k = separable_argmax(value, points);
  double f = objective(k);

  // Warm start: the previous iterate snapped onto the lattice.
  std::vector<int> warm(n);
  int used = 0;
  for (int s = 0; s < n; ++s) {
    warm[s] = static_cast<int>(std::floor(std::max(0.0, start[s]) / step + 1e-9));
    used += warm[s];
  }
  if (used <= points) {
    const double fw = objective(warm);
    if (fw > f) {
      k = warm;
      f = fw;
    }
  }

  // Hill climbing with the coupled objective: one lattice step into a slice,
  // taken from spare bandwidth or from another slice.
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool improved = false;
    for (int a = 0; a < n; ++a) {
      for (int b = -1; b < n; ++b) {
        if (b == a) continue;
        std::vector<int> y = k;
        ++y[a];
        if (b < 0) {
          if (std::accumulate(y.begin(), y.end(), 0) > points) continue;
        } else {
          if (y[b] == 0) continue;
          --y[b];
        }
        const double fy = objective(y);
        if (fy > f + 1e-12 * (1.0 + std::abs(f))) {
          k = std::move(y);
          f = fy;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  return to_blocks(k);
}

RunResult evaluate_allocation(std::span<SampleEvaluator> samples, std::vector<int> blocks, const Scenario& sc) {
  RunResult out;
  const int n = sc.slice_count();
  const int T = static_cast<int>(samples.size());
  out.allocation.blocks = std::move(blocks);
  out.allocation.per_sample.resize(T);
  const std::vector<double> x(out.allocation.blocks.begin(), out.allocation.blocks.end());
  parallel_for(T, [&](int t) { out.allocation.per_sample[t] = samples[t].solve(x, true); });

  auto& rep = out.report;
  rep.sample_utility.assign(n, std::vector<double>(T));
  rep.mean_utility.assign(n, 0.0);
  rep.satisfaction.assign(n, 0.0);
  rep.mean_power_w.assign(n, 0.0);
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < T; ++t) {
      const auto& o = out.allocation.per_sample[t].slices[s];
      rep.sample_utility[s][t] = o.utility;
      rep.mean_utility[s] += o.utility;
      rep.satisfaction[s] += o.satisfied;
      rep.mean_power_w[s] += o.power_w;
    }
    rep.mean_utility[s] /= T;
    rep.satisfaction[s] /= T;
    rep.mean_power_w[s] /= T;
  }
  rep.total_utility = 0.0;
  for (double m : rep.mean_utility) rep.total_utility += m;
  return out;
}

namespace {

std::vector<SampleEvaluator> make_evaluators(const Scenario& sc, const Topology& top,
                                             std::span<const ChannelSample> samples) {
  std::vector<SampleEvaluator> out;
  out.reserve(samples.size());
  for (const auto& cs : samples) out.emplace_back(sc, top, cs);
  return out;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

RunResult run_ira_admm(const Scenario& sc, const Topology& top, std::span<const ChannelSample> samples,
                       const AdmmConfig& cfg) {
  auto evs = make_evaluators(sc, top, samples);
  const int n = sc.slice_count();
  const int T = static_cast<int>(evs.size());
  const int total = sc.block_count();

  // Start from the unpenalised per-sample optima and their projected mean;
  // a uniform start traps the consensus below the TI admission thresholds.
  const std::vector<double> zeros(n, 0.0);
  const std::vector<double> uniform(n, static_cast<double>(total) / n);
  std::vector<std::vector<double>> x(T);
  parallel_for(T, [&](int t) { x[t] = subproblem_continuous(evs[t], zeros, zeros, 0.0, uniform); });
  std::vector<double> z(n, 0.0);
  for (int t = 0; t < T; ++t)
    for (int s = 0; s < n; ++s) z[s] += x[t][s] / T;
  z = project_to_simplex(z, total);
  std::vector<std::vector<double>> u(T, std::vector<double>(n, 0.0));
  std::vector<double> best_z = z;
  double best_residual = std::numeric_limits<double>::infinity();
  AdmmTrace trace;

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    parallel_for(T, [&](int t) { x[t] = subproblem_continuous(evs[t], z, u[t], cfg.rho, x[t]); });

    const std::vector<double> z_prev = z;
    std::vector<double> avg(n, 0.0);
    for (int t = 0; t < T; ++t)
      for (int s = 0; s < n; ++s) avg[s] += x[t][s] + u[t][s];
    for (double& a : avg) a /= T;
    z = project_to_simplex(avg, total);

    double primal = 0.0;
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < n; ++s) u[t][s] += x[t][s] - z[s];
      primal = std::max(primal, distance(x[t], z));
    }
    const double dual = cfg.rho * distance(z, z_prev);

    std::vector<double> utilities(T);
    parallel_for(T, [&](int t) { utilities[t] = evs[t].utility(x[t]); });
    double objective = 0.0;
    for (double v : utilities) objective += v;
    trace.iterations.push_back({iter, primal, dual, objective / T});

    if (primal < best_residual) {
      best_residual = primal;
      best_z = z;
    }
    if (primal <= cfg.primal_tol && dual <= cfg.dual_tol) {
      trace.converged = true;
      break;
    }
  }
  trace.consensus = trace.converged ? z : best_z;

  std::vector<SampleEvaluator*> ptrs;
  for (auto& ev : evs) ptrs.push_back(&ev);
  SaaObjective saa(ptrs);
  auto blocks = relax_and_round(saa, trace.consensus, total);
  RunResult out = evaluate_allocation(evs, std::move(blocks), sc);
  out.trace = std::move(trace);
  return out;
}

RunResult run_ira_admm(const Scenario& sc, const Topology& top, const AdmmConfig& cfg) {
  const auto samples = draw_samples(top, sc);
  return run_ira_admm(sc, top, samples, cfg);
}

RunResult run_ira_admm(const Scenario& sc, const Topology& top) { return run_ira_admm(sc, top, sc.solver.admm); }

RunResult run_ira(const Scenario& sc, const Topology& top, std::span<const ChannelSample> samples) {
  auto evs = make_evaluators(sc, top, samples);
  const int n = sc.slice_count();
  const int T = static_cast<int>(evs.size());
  const int total = sc.block_count();
  const int needed = sc.solver.ira_mode == IraMode::first_sample ? 1 : T;

  const std::vector<double> zeros(n, 0.0);
  const std::vector<double> uniform(n, static_cast<double>(total) / n);
  std::vector<std::vector<int>> rounded(needed);
  parallel_for(needed, [&](int t) {
    const auto x = subproblem_continuous(evs[t], zeros, zeros, 0.0, uniform);
    SaaObjective local({&evs[t]});
    rounded[t] = relax_and_round(local, x, total);
  });

  std::vector<int> blocks = rounded.front();
  if (sc.solver.ira_mode == IraMode::sample_average) {
    // Largest-remainder rounding of the per-sample average.
    std::vector<double> avg(n, 0.0);
    for (const auto& r : rounded)
      for (int s = 0; s < n; ++s) avg[s] += static_cast<double>(r[s]) / T;
    int used = 0;
    for (int s = 0; s < n; ++s) {
      blocks[s] = static_cast<int>(std::floor(avg[s] + 1e-9));
      used += blocks[s];
    }
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return avg[a] - blocks[a] > avg[b] - blocks[b]; });
    for (int k = 0; used < total && k < n; ++k, ++used) ++blocks[idx[k]];
  }
  return evaluate_allocation(evs, std::move(blocks), sc);
}

RunResult run_ira(const Scenario& sc, const Topology& top) {
  const auto samples = draw_samples(top, sc);
  return run_ira(sc, top, samples);
}

}  // namespace slicebench
