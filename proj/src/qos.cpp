#include "slicebench/qos.hpp"

#include <cmath>
#include <numbers>

namespace slicebench {

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double inverse_q(double p) {
  if (!(p > 0.0 && p < 0.5)) throw std::domain_error("inverse_q: p must lie in (0, 0.5)");
  // Hot loops call this with a handful of distinct targets.
  thread_local double last_p = -1.0;
  thread_local double last_x = 0.0;
  if (p == last_p) return last_x;

  double lo = 0.0;
  double hi = 40.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (q_function(mid) > p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  // Newton polish in log space: d/dx log Q(x) = -phi(x)/Q(x).
  for (int it = 0; it < 3; ++it) {
    const double q = q_function(x);
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    if (q <= 0.0 || phi <= 0.0) break;
    const double step = (std::log(q) - std::log(p)) * q / phi;
    if (!std::isfinite(step)) break;
    x += step;
  }
  last_p = p;
  last_x = x;
  return x;
}

namespace {

double fb_rate_with(double gamma, double n, double qinv) {
  const double v = 1.0 - 1.0 / ((1.0 + gamma) * (1.0 + gamma));
  const double r = std::log2(1.0 + gamma) - std::sqrt(v / n) * qinv * std::numbers::log2e;
  return std::max(0.0, r);
}

}  // namespace

double fb_rate(double gamma, double n, double eps) {
  return fb_rate_with(gamma, n, inverse_q(eps));
}

double gamma_required(double bits, double n, double eps) {
  const double target = bits / n;
  const double qinv = inverse_q(eps);
  if (fb_rate_with(kGammaCap, n, qinv) < target)
    throw QosInfeasible("gamma_required: blocklength too short for the payload");
  // The dispersion term only lowers the rate, so Shannon inversion brackets below.
  double lo = std::max(std::exp2(target) - 1.0, 1e-300);
  double hi = kGammaCap;
  if (fb_rate_with(lo, n, qinv) >= target) return lo;
  while (hi > lo * (1.0 + 1e-8)) {
    const double mid = std::sqrt(lo * hi);
    (fb_rate_with(mid, n, qinv) >= target ? hi : lo) = mid;
  }
  return hi;
}

int queue_capacity(double deadline_s, double tau_s, double coord_latency_s) {
  const double slack = deadline_s - coord_latency_s - tau_s;
  if (!(slack > 0.0))
    throw QosInfeasible("queue_capacity: deadline leaves no time to transmit one packet");
  return static_cast<int>(std::floor(slack / tau_s + 1e-9));
}

double blocking_probability(double lambda, double tau_s, int capacity) {
  const double rho = lambda * tau_s;
  if (rho <= 0.0) return 0.0;
  const int k = capacity;
  if (std::abs(rho - 1.0) < 1e-12) return 1.0 / (k + 1);
  if (rho < 1.0) return (1.0 - rho) * std::pow(rho, k) / (1.0 - std::pow(rho, k + 1));
  // Same expression in r = 1/rho, stable for large K.
  const double r = 1.0 / rho;
  return (1.0 - r) / (1.0 - std::pow(r, k + 1));
}

int preamble_count(double bandwidth_hz, const MmtcSpec& spec) {
  if (!(bandwidth_hz > 0.0)) return 0;
  return static_cast<int>(std::floor(bandwidth_hz / spec.preamble_width_hz * (1.0 + 1e-12)));
}

double ra_success_probability(double bandwidth_hz, const MmtcSpec& spec) {
  const int n = preamble_count(bandwidth_hz, spec);
  if (n == 0) return 0.0;
  // Each other device independently collides with probability p_a / N.
  return std::pow(1.0 - spec.activation_prob / n, spec.user_count - 1);
}

namespace {

struct BlocklengthSearch {
  const TiSpec& spec;
  double bandwidth;
  double coord;

  double blocking_at(int n, int* k_out) const {
    const double tau = n / bandwidth;
    const int k = queue_capacity(spec.deadline_s, tau, coord);
    if (k_out) *k_out = k;
    return blocking_probability(spec.robot_count * spec.arrival_rate_pkts_per_s, tau, k);
  }
  bool ok(int n) const { return blocking_at(n, nullptr) <= spec.blocking_prob; }
};

}  // namespace

std::optional<TiConstraint> try_ti_constraint(const TiSpec& spec, double slice_bandwidth_hz,
                                              const Scenario& sc) {
  if (!(slice_bandwidth_hz > 0.0)) return std::nullopt;
  const double tx_budget = sc.ti_tx_fraction * (spec.deadline_s - sc.coord_latency_s);
  const int n_max = static_cast<int>(std::floor(slice_bandwidth_hz * tx_budget * (1.0 + 1e-12)));
  const int n_min = static_cast<int>(std::ceil(spec.packet_bits - 1e-9));
  if (n_max < n_min) return std::nullopt;

  const BlocklengthSearch search{spec, slice_bandwidth_hz, sc.coord_latency_s};
  // Use the whole transmission budget unless that breaks the blocking target,
  // then the longest blocklength that still meets it.
  int n = n_max;
  if (!search.ok(n_max) && search.ok(n_min)) {
    // Blocking grows with the service time, so ok() is monotone in n.
    int lo = n_min;
    int hi = n_max;
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      (search.ok(mid) ? lo : hi) = mid;
    }
    n = lo;
  }

  TiConstraint out;
  out.blocklength_n = n;
  out.service_time_tau = n / slice_bandwidth_hz;
  out.blocking = search.blocking_at(n, &out.queue_capacity_K);
  out.blocking_ok = out.blocking <= spec.blocking_prob;
  // n >= L keeps the target rate at or below one bit per use, always reachable.
  out.gamma_req = gamma_required(spec.packet_bits, n, spec.decode_error_prob);
  return out;
}

TiConstraint ti_constraint(const TiSpec& spec, double slice_bandwidth_hz, const Scenario& sc) {
  auto out = try_ti_constraint(spec, slice_bandwidth_hz, sc);
  if (!out)
    throw QosInfeasible(
        "ti_constraint: transmission budget holds fewer channel uses than payload bits");
  return *out;
}

double shannon_rate(double bandwidth_hz, double gamma) {
  return bandwidth_hz * std::log2(1.0 + gamma);
}

}  // namespace slicebench
