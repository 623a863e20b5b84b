#include "slicebench/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <tuple>

namespace slicebench {

std::string_view algo_name(Algo algo) { return algo == Algo::ira_admm ? "ira_admm" : "ira"; }

Algo parse_algo(std::string_view name) {
  if (name == "ira_admm") return Algo::ira_admm;
  if (name == "ira") return Algo::ira;
  throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected ira_admm or ira)");
}

Scenario apply_variant(Scenario sc, const Variant& variant) {
  std::vector<SliceSpec> kept;
  for (const auto& s : sc.slices) {
    const SliceKind kind = kind_of(s);
    if (variant.drop_embb && kind == SliceKind::embb) continue;
    if (variant.drop_mmtc && kind == SliceKind::mmtc) continue;
    kept.push_back(s);
  }
  if (kept.empty()) throw ConfigError("scenario variant leaves no slices");
  sc.slices = std::move(kept);
  validate(sc);
  return sc;
}

Scenario with_ti_arrival_rate(Scenario sc, double pkts_per_s) {
  for (auto& s : sc.slices)
    if (auto* ti = std::get_if<TiSpec>(&s)) ti->arrival_rate_pkts_per_s = pkts_per_s;
  return sc;
}

double ti_arrival_rate(const Scenario& sc) {
  for (const auto& s : sc.slices)
    if (const auto* ti = std::get_if<TiSpec>(&s)) return ti->arrival_rate_pkts_per_s;
  return 0.0;
}

RunRecord run_once(const Scenario& sc, Algo algo) {
  RunRecord rec;
  rec.algo = algo;
  rec.scenario = sc;
  const Topology top = generate_topology(sc);
  const auto samples = draw_samples(top, sc);
  rec.result = algo == Algo::ira_admm ? run_ira_admm(sc, top, samples, sc.solver.admm) : run_ira(sc, top, samples);
  return rec;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> v;
  for (int k = 1; k <= 10; ++k) v.push_back(50.0 * k);
  return v;
}

void validate(const SweepSpec& spec) {
  if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    if (!(spec.values[i] > 0.0)) throw ConfigError("sweep values must be positive");
    if (i > 0 && !(spec.values[i] > spec.values[i - 1])) throw ConfigError("sweep values must be sorted ascending");
  }
  if (spec.reps < 1) throw ConfigError("sweep repetitions must be >= 1");
  if (spec.algos.empty()) throw ConfigError("sweep needs at least one algorithm");
}

std::vector<ResultRow> result_rows(const RunRecord& record) {
  const Scenario& sc = record.scenario;
  const auto& rep = record.result.report;
  std::vector<ResultRow> rows;
  for (int s = 0; s < sc.slice_count(); ++s) {
    ResultRow r;
    r.algo = std::string(algo_name(record.algo));
    r.seed = sc.seed;
    r.lambda = ti_arrival_rate(sc);
    r.slice_id = s;
    r.kind = std::string(kind_name(kind_of(sc.slices[s])));
    r.blocks = record.result.allocation.blocks[s];
    r.bandwidth_hz = r.blocks * sc.block_width_hz;
    r.utility = rep.mean_utility[s];
    r.power_w = rep.mean_power_w[s];
    r.satisfied_frac = rep.satisfaction[s];
    r.total_utility = rep.total_utility;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_row(const ResultRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%llu,%.12g,%d,%s,%d,%.12g,%.12g,%.12g,%.12g,%.12g", r.algo.c_str(),
                static_cast<unsigned long long>(r.seed), r.lambda, r.slice_id, r.kind.c_str(), r.blocks, r.bandwidth_hz,
                r.utility, r.power_w, r.satisfied_frac, r.total_utility);
  return buf;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
}

void write_trace_csv(std::ostream& out, const AdmmTrace& trace) {
  out << "iter,primal_residual,dual_residual,objective\n";
  char buf[256];
  for (const auto& it : trace.iterations) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g\n", it.iter, it.primal_residual, it.dual_residual,
                  it.objective);
    out << buf;
  }
}

int run_sweep(const Scenario& base, const SweepSpec& spec, const std::string& out_path, std::ostream* log) {
  validate(spec);
  const std::string partial_path = out_path + ".partial";
  std::ofstream partial(partial_path, std::ios::trunc);
  if (!partial) throw std::ios_base::failure("cannot write '" + partial_path + "'");
  partial << kResultsHeader << '\n' << std::flush;

  std::vector<ResultRow> rows;
  int not_converged = 0;
  for (double lambda : spec.values) {
    for (Algo algo : spec.algos) {
      for (int r = 0; r < spec.reps; ++r) {
        Scenario sc = apply_variant(with_ti_arrival_rate(base, lambda), spec.variant);
        sc.seed = base.seed + static_cast<std::uint64_t>(r);
        const RunRecord rec = run_once(sc, algo);
        if (algo == Algo::ira_admm && !rec.result.trace.converged) ++not_converged;
        for (auto& row : result_rows(rec)) {
          partial << format_row(row) << '\n';
          rows.push_back(std::move(row));
        }
        partial.flush();
        if (log)
          *log << "lambda=" << lambda << " algo=" << algo_name(algo) << " seed=" << sc.seed
               << " total_utility=" << rec.result.report.total_utility << '\n';
      }
    }
  }
  partial.close();

  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.lambda, a.algo, a.seed, a.slice_id) < std::tie(b.lambda, b.algo, b.seed, b.slice_id);
  });
  {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot write '" + out_path + "'");
    write_results_csv(out, rows);
  }
  std::filesystem::remove(partial_path);
  return not_converged;
}

}  // namespace slicebench
