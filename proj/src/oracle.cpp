#include "slicebench/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "slicebench/allocator.hpp"
#include "slicebench/qos.hpp"
#include "slicebench/rng.hpp"

namespace slicebench::oracle {

namespace {

// Visits every integer vector of length n with sum <= total, in lexicographic order.
template <class F>
void for_each_split(int n, int total, F&& visit) {
  std::vector<int> z(n, 0);
  auto rec = [&](auto&& self, int s, int left) -> void {
    if (s == n) {
      visit(z);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      z[s] = k;
      self(self, s + 1, left - k);
    }
    z[s] = 0;
  };
  rec(rec, 0, total);
}

}  // namespace

ExhaustiveResult exhaustive_bandwidth_search(const Scenario& sc, const Topology& top,
                                             std::span<const ChannelSample> samples) {
  if (sc.slice_count() > kMaxExhaustiveSlices || sc.block_count() > kMaxExhaustiveBlocks)
    throw std::invalid_argument("exhaustive search is limited to 3 slices and 12 blocks");
  if (samples.empty()) throw std::invalid_argument("exhaustive search needs at least one sample");
  ExhaustiveResult best;
  best.utility = -std::numeric_limits<double>::infinity();
  for_each_split(sc.slice_count(), sc.block_count(), [&](const std::vector<int>& z) {
    ++best.candidates;
    double sum = 0.0;
    for (const auto& cs : samples) sum += solve_sample(z, cs, sc, top).utility();
    const double mean = sum / static_cast<double>(samples.size());
    if (mean > best.utility) {
      best.utility = mean;
      best.blocks = z;
    }
  });
  return best;
}

Estimate mm1k_monte_carlo(double lambda, double tau_s, int capacity, long long n_arrivals, std::uint64_t seed) {
  if (n_arrivals < 10000) throw std::invalid_argument("mm1k_monte_carlo needs at least 1e4 arrivals");
  Rng rng = derive_stream(seed, "oracle/mm1k");
  std::exponential_distribution<double> inter_arrival(lambda);
  std::exponential_distribution<double> service(1.0 / tau_s);

  constexpr int kBatches = 50;
  const long long batch_size = n_arrivals / kBatches;
  std::vector<long long> batch_blocked(kBatches, 0);

  int in_system = 0;
  double next_departure = std::numeric_limits<double>::infinity();
  double now = 0.0;
  long long blocked = 0;
  for (long long a = 0; a < n_arrivals; ++a) {
    now += inter_arrival(rng);
    while (in_system > 0 && next_departure <= now) {
      --in_system;
      next_departure = in_system > 0 ? next_departure + service(rng) : std::numeric_limits<double>::infinity();
    }
    if (in_system >= capacity) {
      ++blocked;
      if (a / batch_size < kBatches) ++batch_blocked[a / batch_size];
      continue;
    }
    if (in_system == 0) next_departure = now + service(rng);
    ++in_system;
  }

  Estimate e;
  e.trials = n_arrivals;
  e.mean = static_cast<double>(blocked) / static_cast<double>(n_arrivals);
  e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(n_arrivals));
  double m = 0.0;
  for (long long b : batch_blocked) m += static_cast<double>(b) / batch_size;
  m /= kBatches;
  double var = 0.0;
  for (long long b : batch_blocked) {
    const double d = static_cast<double>(b) / batch_size - m;
    var += d * d;
  }
  var /= (kBatches - 1);
  e.batch_std_error = std::sqrt(var / kBatches);
  return e;
}

Estimate ra_monte_carlo(int preambles, int users, double p_a, long long trials, std::uint64_t seed) {
  if (trials < 10000) throw std::invalid_argument("ra_monte_carlo needs at least 1e4 trials");
  if (preambles < 1) throw std::invalid_argument("ra_monte_carlo needs at least one preamble");
  Rng rng = derive_stream(seed, "oracle/random-access");
  std::bernoulli_distribution active(std::clamp(p_a, 0.0, 1.0));
  std::uniform_int_distribution<int> pick(0, preambles - 1);
  long long ok = 0;
  for (long long t = 0; t < trials; ++t) {
    const int mine = pick(rng);
    bool collided = false;
    for (int u = 1; u < users; ++u)
      if (active(rng) && pick(rng) == mine) collided = true;
    if (!collided) ++ok;
  }
  Estimate e;
  e.trials = trials;
  e.mean = static_cast<double>(ok) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(trials));
  e.batch_std_error = e.std_error;
  return e;
}

double mrt_power_closed_form(const Eigen::VectorXcd& h, double gamma_req, double noise_power_w) {
  const double g = h.squaredNorm();
  if (!(g > 0.0)) throw std::invalid_argument("mrt_power_closed_form needs a nonzero channel");
  return gamma_req * noise_power_w / g;
}

Implementations Implementations::library(std::uint64_t seed) {
  Implementations impl;
  impl.blocking = [](double lambda, double tau, int k) { return blocking_probability(lambda, tau, k); };
  impl.ra_success = [](int preambles, int users, double p_a) {
    MmtcSpec spec;
    spec.user_count = users;
    spec.activation_prob = p_a;
    return ra_success_probability(preambles * spec.preamble_width_hz, spec);
  };
  impl.beamforming = [seed](const BeamformingProblem& p) {
    SdrOptions o;
    o.seed = seed;
    return rank1_recover(solve_sdr_power_min(p, o), p, o);
  };
  return impl;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Eigen::VectorXcd random_channel(Rng& rng, int dim, double scale) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  Eigen::VectorXcd h(dim);
  for (int i = 0; i < dim; ++i) h[i] = scale * std::complex<double>(n(rng), n(rng));
  return h;
}

}  // namespace

CheckResult check_blocking(const Implementations& impl, std::uint64_t seed) {
  CheckResult r{"mm1k blocking vs discrete-event simulation", true, ""};
  const double tau = 1e-3;
  const double loads[] = {0.05, 0.2, 0.5, 0.8, 1.5};
  const int capacities[] = {1, 2, 4, 8};
  constexpr long long kArrivals = 200000;
  int cell = 0;
  for (double rho : loads) {
    for (int k : capacities) {
      const double lambda = rho / tau;
      const auto est = mm1k_monte_carlo(lambda, tau, k, kArrivals, derive_seed(seed, "blocking-" + std::to_string(cell++)));
      const double model = impl.blocking(lambda, tau, k);
      // Null-hypothesis spread, widened by batch means when arrivals are correlated.
      const double sigma = std::max({std::sqrt(std::max(model * (1.0 - model), 0.0) / kArrivals),
                                     est.std_error, est.batch_std_error, 1.0 / kArrivals});
      if (std::abs(est.mean - model) > 3.0 * sigma) {
        r.pass = false;
        r.detail += "rho=" + fmt(rho) + " K=" + std::to_string(k) + " sim=" + fmt(est.mean) +
                    " model=" + fmt(model) + "; ";
      }
    }
  }
  if (r.pass) r.detail = "20 cells within 3 sigma";
  return r;
}

CheckResult check_random_access(const Implementations& impl, std::uint64_t seed) {
  CheckResult r{"random-access success vs simulation", true, ""};
  struct Config {
    int preambles;
    int users;
    double p_a;
  };
  const Config configs[] = {{10, 600, 0.01}, {1, 2, 1.0}, {5, 100, 0.05}, {20, 600, 0.02}, {3, 50, 0.1}, {50, 1000, 0.03}};
  constexpr long long kTrials = 100000;
  int cell = 0;
  for (const auto& c : configs) {
    const auto est = ra_monte_carlo(c.preambles, c.users, c.p_a, kTrials, derive_seed(seed, "ra-" + std::to_string(cell++)));
    const double model = impl.ra_success(c.preambles, c.users, c.p_a);
    const double sigma =
        std::max({std::sqrt(std::max(model * (1.0 - model), 0.0) / kTrials), est.std_error, 1.0 / kTrials});
    if (std::abs(est.mean - model) > 3.0 * sigma) {
      r.pass = false;
      r.detail += "N=" + std::to_string(c.preambles) + " U=" + std::to_string(c.users) + " p=" + fmt(c.p_a) +
                  " sim=" + fmt(est.mean) + " model=" + fmt(model) + "; ";
    }
  }
  if (r.pass) r.detail = "6 configurations within 3 sigma";
  return r;
}

CheckResult check_single_robot_sdr(const Implementations& impl, std::uint64_t seed, int instances) {
  CheckResult r{"single-robot beamforming vs closed-form MRT power", true, ""};
  Rng rng = derive_stream(seed, "oracle/single-robot");
  std::uniform_int_distribution<int> rus(1, 3);
  std::uniform_real_distribution<double> gamma(0.1, 10.0);
  std::uniform_real_distribution<double> log_scale(-6.0, 0.0);
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const int j = rus(rng);
    BeamformingProblem p;
    p.channels = {random_channel(rng, 2 * j, std::pow(10.0, log_scale(rng)))};
    p.gamma_req = {gamma(rng)};
    p.noise_power_w = std::pow(10.0, log_scale(rng));
    p.per_ru_budget_w.assign(j, std::numeric_limits<double>::infinity());
    p.ru_antennas = contiguous_ru_antennas(j, 2);
    const double expected = mrt_power_closed_form(p.channels[0], p.gamma_req[0], p.noise_power_w);
    const auto sol = impl.beamforming(p);
    const double rel = sol.feasible ? std::abs(sol.total_power - expected) / expected : 1.0;
    worst = std::max(worst, rel);
  }
  r.pass = worst <= 1e-6;
  r.detail = "worst relative error " + fmt(worst) + " over " + std::to_string(instances) + " instances";
  return r;
}

CheckResult check_multi_robot_sdr(const Implementations& impl, std::uint64_t seed, int instances) {
  CheckResult r{"two-robot beamforming: power >= relaxation, SINR targets met", true, ""};
  Rng rng = derive_stream(seed, "oracle/two-robot");
  std::uniform_real_distribution<double> gamma(0.2, 3.0);
  double worst_sinr = 0.0;
  double worst_gap = 0.0;
  int infeasible = 0;
  for (int i = 0; i < instances; ++i) {
    BeamformingProblem p;
    p.channels = {random_channel(rng, 4, 1.0), random_channel(rng, 4, 1.0)};
    p.gamma_req = {gamma(rng), gamma(rng)};
    p.noise_power_w = 1.0;
    p.per_ru_budget_w.assign(2, std::numeric_limits<double>::infinity());
    p.ru_antennas = contiguous_ru_antennas(2, 2);
    const auto sol = impl.beamforming(p);
    if (!sol.feasible) {
      ++infeasible;
      continue;
    }
    // Independent SINR evaluation.
    for (int k = 0; k < 2; ++k) {
      const double signal = std::norm(p.channels[k].dot(sol.beamformers[k]));
      const double leak = std::norm(p.channels[k].dot(sol.beamformers[1 - k]));
      const double achieved = signal / (leak + p.noise_power_w);
      worst_sinr = std::max(worst_sinr, (p.gamma_req[k] - achieved) / p.gamma_req[k]);
    }
    double power = 0.0;
    for (const auto& w : sol.beamformers) power += w.squaredNorm();
    worst_gap = std::max(worst_gap, (sol.relaxed_objective - power) / sol.relaxed_objective);
  }
  r.pass = infeasible == 0 && worst_sinr <= 1e-6 && worst_gap <= 1e-6;
  r.detail = "infeasible " + std::to_string(infeasible) + ", worst SINR shortfall " + fmt(worst_sinr) +
             ", worst power below relaxation " + fmt(worst_gap);
  return r;
}

Scenario tiny_instance_scenario(std::uint64_t seed) {
  Scenario sc;
  sc.seed = seed;
  sc.area_side_m = 500.0;
  sc.ru_positions = {{250.0, 250.0}};
  sc.antennas_per_ru = 2;
  sc.total_bandwidth_hz = 4e5;
  sc.block_width_hz = 1e5;
  sc.noise_power_dbm = -120.0;  // same density as -110 dBm over 4 MHz
  sc.saa_samples = 2;
  sc.t_long_s = 20.0;
  sc.t_short_s = 10.0;
  sc.slices = {TiSpec{.robot_count = 1, .deadline_s = 5e-3}, EmbbSpec{.user_count = 1, .rate_req_bps = 5e5}};
  return sc;
}

double TinyComparison::relative_shortfall() const {
  if (oracle_utility == 0.0) return allocator_utility >= 0.0 ? 0.0 : 1.0;
  return (oracle_utility - allocator_utility) / std::abs(oracle_utility);
}

TinyComparison compare_tiny_instance(std::uint64_t seed) {
  const Scenario sc = tiny_instance_scenario(seed);
  const Topology top = generate_topology(sc);
  const auto samples = draw_samples(top, sc);
  const auto best = exhaustive_bandwidth_search(sc, top, samples);
  const auto run = run_ira_admm(sc, top, samples, sc.solver.admm);
  TinyComparison out;
  out.allocator_utility = run.report.total_utility;
  out.allocator_blocks = run.allocation.blocks;
  out.oracle_utility = best.utility;
  out.oracle_blocks = best.blocks;
  return out;
}

CheckResult check_tiny_instances(int seeds, double tolerance) {
  CheckResult r{"allocator vs exhaustive search on tiny instances", true, ""};
  double worst = 0.0;
  for (int s = 1; s <= seeds; ++s) {
    const auto cmp = compare_tiny_instance(static_cast<std::uint64_t>(s));
    worst = std::max(worst, cmp.relative_shortfall());
    if (cmp.relative_shortfall() > tolerance) {
      r.pass = false;
      r.detail += "seed " + std::to_string(s) + " allocator=" + fmt(cmp.allocator_utility) +
                  " oracle=" + fmt(cmp.oracle_utility) + "; ";
    }
  }
  if (r.pass) r.detail = "worst shortfall " + fmt(worst) + " over " + std::to_string(seeds) + " seeds";
  return r;
}

std::vector<CheckResult> run_suite(const Implementations& impl, std::uint64_t seed) {
  return {check_blocking(impl, seed), check_random_access(impl, seed), check_single_robot_sdr(impl, seed),
          check_multi_robot_sdr(impl, seed), check_tiny_instances()};
}

}  // namespace slicebench::oracle
