#include "slicebench/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "slicebench/rng.hpp"

namespace slicebench {

using nlohmann::json;

SliceKind kind_of(const SliceSpec& spec) {
  switch (spec.index()) {
    case 0: return SliceKind::ti;
    case 1: return SliceKind::embb;
    default: return SliceKind::mmtc;
  }
}

std::string_view kind_name(SliceKind kind) {
  switch (kind) {
    case SliceKind::ti: return "ti";
    case SliceKind::embb: return "embb";
    case SliceKind::mmtc: return "mmtc";
  }
  return "?";
}

int terminal_count(const SliceSpec& spec) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TiSpec>) return s.robot_count;
        else return s.user_count;
      },
      spec);
}

double UtilityWeights::of(SliceKind kind) const {
  switch (kind) {
    case SliceKind::ti: return ti;
    case SliceKind::embb: return embb;
    case SliceKind::mmtc: return mmtc;
  }
  return 0.0;
}

int Scenario::block_count() const {
  return static_cast<int>(std::lround(total_bandwidth_hz / block_width_hz));
}

double Scenario::noise_psd() const {
  const double watts = std::pow(10.0, (noise_power_dbm - 30.0) / 10.0);
  return watts / total_bandwidth_hz;
}

int Scenario::total_terminals() const {
  int n = 0;
  for (const auto& s : slices) n += terminal_count(s);
  return n;
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

void require(bool ok, const std::string& what) {
  if (!ok) fail("invalid scenario: " + what);
}

bool is_probability(double p) { return p > 0.0 && p < 1.0; }

}  // namespace

void validate(const Scenario& sc) {
  require(sc.area_side_m > 0.0, "area_side_m must be positive");
  require(!sc.ru_positions.empty(), "at least one RU is required");
  for (std::size_t j = 0; j < sc.ru_positions.size(); ++j) {
    const auto& p = sc.ru_positions[j];
    require(p.x >= 0.0 && p.x <= sc.area_side_m && p.y >= 0.0 && p.y <= sc.area_side_m,
            "ru_positions[" + std::to_string(j) + "] lies outside the square area");
  }
  require(sc.antennas_per_ru >= 1, "antennas_per_ru must be >= 1");
  require(sc.max_ru_power_w > 0.0, "max_ru_power_w must be positive");
  require(std::isfinite(sc.noise_power_dbm), "noise_power_dbm must be finite");
  require(sc.total_bandwidth_hz > 0.0, "total_bandwidth_hz must be positive");
  require(sc.block_width_hz > 0.0, "block_width_hz must be positive");
  const double ratio = sc.total_bandwidth_hz / sc.block_width_hz;
  require(std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio),
          "total_bandwidth_hz / block_width_hz must be an integer block count");
  require(!sc.slices.empty(), "at least one slice is required");
  require(sc.block_count() >= sc.slice_count(), "block count M must be >= number of slices");
  require(sc.t_long_s > 0.0 && sc.t_short_s > 0.0, "timescales must be positive");
  const double steps = sc.t_long_s / sc.t_short_s;
  require(steps >= 1.0 - 1e-9 && std::abs(steps - std::round(steps)) <= 1e-9 * steps,
          "t_long/t_short not a positive integer");
  require(sc.saa_samples >= 1, "saa_samples must be >= 1");
  require(sc.coord_latency_s >= 0.0, "coord_latency_s must be >= 0");
  require(sc.ti_tx_fraction > 0.0 && sc.ti_tx_fraction < 1.0, "ti_tx_fraction must lie in (0,1)");
  require(sc.power_price >= 0.0, "power_price must be >= 0");
  require(sc.solver.sdr_tolerance > 0.0, "solver.sdr_tolerance must be positive");
  require(sc.solver.sdr_max_iters >= 1, "solver.sdr_max_iters must be >= 1");
  require(sc.solver.randomizations >= 0, "solver.randomizations must be >= 0");
  require(sc.solver.admm.rho > 0.0, "solver.admm.rho must be positive");
  require(sc.solver.admm.max_iters >= 1, "solver.admm.max_iters must be >= 1");
  require(sc.solver.admm.primal_tol > 0.0 && sc.solver.admm.dual_tol > 0.0,
          "solver.admm tolerances must be positive");

  for (std::size_t i = 0; i < sc.slices.size(); ++i) {
    const std::string at = "slices[" + std::to_string(i) + "]: ";
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, TiSpec>) {
            require(s.robot_count >= 1, at + "robot_count must be >= 1");
            require(s.deadline_s > 0.0, at + "deadline_s must be positive");
            require(is_probability(s.decode_error_prob), at + "decode_error_prob must lie in (0,1)");
            require(is_probability(s.blocking_prob), at + "blocking_prob must lie in (0,1)");
            require(s.arrival_rate_pkts_per_s >= 0.0, at + "arrival_rate_pkts_per_s must be >= 0");
            require(s.packet_bits > 0.0, at + "packet_bits must be positive");
            require(sc.coord_latency_s < s.deadline_s,
                    at + "coord_latency_s must be strictly below the TI deadline");
          } else if constexpr (std::is_same_v<T, EmbbSpec>) {
            require(s.user_count >= 1, at + "user_count must be >= 1");
            require(s.rate_req_bps > 0.0, at + "rate_req_bps must be positive");
          } else {
            require(s.user_count >= 1, at + "user_count must be >= 1");
            require(is_probability(s.ra_success_req), at + "ra_success_req must lie in (0,1)");
            require(is_probability(s.activation_prob), at + "activation_prob must lie in (0,1)");
            require(s.preamble_width_hz > 0.0, at + "preamble_width_hz must be positive");
          }
        },
        sc.slices[i]);
  }
}

namespace {

// Reads keys from one JSON object and rejects any key left unread.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("'" + path_ + "' must be an object");
  }

  template <typename T>
  void optional(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    out = convert<T>(*it, key);
  }

  template <typename T>
  T required(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) fail("missing required field '" + field(key) + "'");
    return convert<T>(*it, key);
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) fail("unknown key '" + field(it.key()) + "'");
    }
  }

 private:
  template <typename T>
  T convert(const json& v, const char* key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
      }
      return v.get<T>();
    } catch (const std::exception& e) {
      fail("field '" + field(key) + "': " + e.what());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

SliceSpec parse_slice(const json& j, std::size_t index) {
  ObjectReader r(j, "slices[" + std::to_string(index) + "]");
  const auto kind = r.required<std::string>("kind");
  SliceSpec out;
  if (kind == "ti") {
    TiSpec s;
    s.robot_count = r.required<int>("robot_count");
    s.deadline_s = r.required<double>("deadline_s");
    r.optional("decode_error_prob", s.decode_error_prob);
    r.optional("blocking_prob", s.blocking_prob);
    r.optional("arrival_rate_pkts_per_s", s.arrival_rate_pkts_per_s);
    r.optional("packet_bits", s.packet_bits);
    out = s;
  } else if (kind == "embb") {
    EmbbSpec s;
    s.user_count = r.required<int>("user_count");
    s.rate_req_bps = r.required<double>("rate_req_bps");
    out = s;
  } else if (kind == "mmtc") {
    MmtcSpec s;
    s.user_count = r.required<int>("user_count");
    r.optional("ra_success_req", s.ra_success_req);
    r.optional("activation_prob", s.activation_prob);
    r.optional("preamble_width_hz", s.preamble_width_hz);
    out = s;
  } else {
    fail("field '" + r.field("kind") + "': unknown slice kind '" + kind + "'");
  }
  r.finish();
  return out;
}

std::vector<Point> default_ru_positions(double side) {
  // Equilateral triangle centred in the square, circumradius 250 m.
  constexpr double radius = 250.0;
  std::vector<Point> out;
  for (int k = 0; k < 3; ++k) {
    const double angle = std::numbers::pi / 2.0 + k * 2.0 * std::numbers::pi / 3.0;
    out.push_back({side / 2.0 + radius * std::cos(angle), side / 2.0 + radius * std::sin(angle)});
  }
  return out;
}

IraMode parse_ira_mode(const std::string& s) {
  if (s == "first_sample") return IraMode::first_sample;
  if (s == "sample_average") return IraMode::sample_average;
  fail("field 'solver.ira_mode': expected 'first_sample' or 'sample_average', got '" + s + "'");
}

std::string_view ira_mode_name(IraMode m) {
  return m == IraMode::first_sample ? "first_sample" : "sample_average";
}

Scenario from_json(const json& doc) {
  Scenario sc;
  ObjectReader top(doc, "");
  bool explicit_rus = false;

  if (const json* radio = top.child("radio")) {
    ObjectReader r(*radio, "radio");
    r.optional("area_side_m", sc.area_side_m);
    if (const json* rus = r.child("ru_positions")) {
      if (!rus->is_array()) fail("field 'radio.ru_positions' must be an array of [x, y]");
      for (const auto& p : *rus) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
          fail("field 'radio.ru_positions' entries must be [x, y] number pairs");
        sc.ru_positions.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      explicit_rus = true;
    }
    r.optional("antennas_per_ru", sc.antennas_per_ru);
    r.optional("max_ru_power_w", sc.max_ru_power_w);
    r.optional("noise_power_dbm", sc.noise_power_dbm);
    r.optional("total_bandwidth_hz", sc.total_bandwidth_hz);
    r.optional("block_width_hz", sc.block_width_hz);
    r.optional("coord_latency_s", sc.coord_latency_s);
    r.optional("ti_tx_fraction", sc.ti_tx_fraction);
    r.finish();
  }
  if (!explicit_rus) sc.ru_positions = default_ru_positions(sc.area_side_m);

  if (const json* ts = top.child("timescales")) {
    ObjectReader r(*ts, "timescales");
    r.optional("t_long_s", sc.t_long_s);
    r.optional("t_short_s", sc.t_short_s);
    r.optional("saa_samples", sc.saa_samples);
    r.finish();
  }

  if (const json* ut = top.child("utility")) {
    ObjectReader r(*ut, "utility");
    if (const json* w = r.child("weights")) {
      ObjectReader rw(*w, "utility.weights");
      rw.optional("ti", sc.utility_weights.ti);
      rw.optional("embb", sc.utility_weights.embb);
      rw.optional("mmtc", sc.utility_weights.mmtc);
      rw.finish();
    }
    r.optional("power_price", sc.power_price);
    r.finish();
  }

  const json* slices = top.child("slices");
  if (!slices) fail("missing required field 'slices'");
  if (!slices->is_array()) fail("field 'slices' must be an array");
  for (std::size_t i = 0; i < slices->size(); ++i) sc.slices.push_back(parse_slice((*slices)[i], i));

  if (const json* seed = top.child("seed")) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0))
      fail("field 'seed' must be a non-negative integer");
    sc.seed = seed->get<std::uint64_t>();
  }

  if (const json* sv = top.child("solver")) {
    ObjectReader r(*sv, "solver");
    r.optional("sdr_tolerance", sc.solver.sdr_tolerance);
    r.optional("sdr_max_iters", sc.solver.sdr_max_iters);
    r.optional("randomizations", sc.solver.randomizations);
    std::string mode(ira_mode_name(sc.solver.ira_mode));
    r.optional("ira_mode", mode);
    sc.solver.ira_mode = parse_ira_mode(mode);
    if (const json* admm = r.child("admm")) {
      ObjectReader ra(*admm, "solver.admm");
      ra.optional("rho", sc.solver.admm.rho);
      ra.optional("max_iters", sc.solver.admm.max_iters);
      ra.optional("primal_tol", sc.solver.admm.primal_tol);
      ra.optional("dual_tol", sc.solver.admm.dual_tol);
      ra.finish();
    }
    r.finish();
  }
  top.finish();
  return sc;
}

json slice_to_json(const SliceSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TiSpec>) {
          return {{"kind", "ti"},
                  {"robot_count", s.robot_count},
                  {"deadline_s", s.deadline_s},
                  {"decode_error_prob", s.decode_error_prob},
                  {"blocking_prob", s.blocking_prob},
                  {"arrival_rate_pkts_per_s", s.arrival_rate_pkts_per_s},
                  {"packet_bits", s.packet_bits}};
        } else if constexpr (std::is_same_v<T, EmbbSpec>) {
          return {{"kind", "embb"}, {"user_count", s.user_count}, {"rate_req_bps", s.rate_req_bps}};
        } else {
          return {{"kind", "mmtc"},
                  {"user_count", s.user_count},
                  {"ra_success_req", s.ra_success_req},
                  {"activation_prob", s.activation_prob},
                  {"preamble_width_hz", s.preamble_width_hz}};
        }
      },
      spec);
}

}  // namespace

Scenario load_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports "line L, column C" in its message.
    fail(std::string("parse error: ") + e.what());
  }
  Scenario sc = from_json(doc);
  validate(sc);
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

std::string dump_scenario(const Scenario& sc) {
  json rus = json::array();
  for (const auto& p : sc.ru_positions) rus.push_back({p.x, p.y});
  json slices = json::array();
  for (const auto& s : sc.slices) slices.push_back(slice_to_json(s));
  json doc = {
      {"radio",
       {{"area_side_m", sc.area_side_m},
        {"ru_positions", rus},
        {"antennas_per_ru", sc.antennas_per_ru},
        {"max_ru_power_w", sc.max_ru_power_w},
        {"noise_power_dbm", sc.noise_power_dbm},
        {"total_bandwidth_hz", sc.total_bandwidth_hz},
        {"block_width_hz", sc.block_width_hz},
        {"coord_latency_s", sc.coord_latency_s},
        {"ti_tx_fraction", sc.ti_tx_fraction}}},
      {"timescales",
       {{"t_long_s", sc.t_long_s}, {"t_short_s", sc.t_short_s}, {"saa_samples", sc.saa_samples}}},
      {"utility",
       {{"weights",
         {{"ti", sc.utility_weights.ti},
          {"embb", sc.utility_weights.embb},
          {"mmtc", sc.utility_weights.mmtc}}},
        {"power_price", sc.power_price}}},
      {"slices", slices},
      {"seed", sc.seed},
      {"solver",
       {{"sdr_tolerance", sc.solver.sdr_tolerance},
        {"sdr_max_iters", sc.solver.sdr_max_iters},
        {"randomizations", sc.solver.randomizations},
        {"ira_mode", ira_mode_name(sc.solver.ira_mode)},
        {"admm",
         {{"rho", sc.solver.admm.rho},
          {"max_iters", sc.solver.admm.max_iters},
          {"primal_tol", sc.solver.admm.primal_tol},
          {"dual_tol", sc.solver.admm.dual_tol}}}}}};
  return doc.dump(2) + "\n";
}

Scenario paper_default_scenario() {
  Scenario sc;
  sc.ru_positions = default_ru_positions(sc.area_side_m);
  sc.slices = {
      TiSpec{.robot_count = 3, .deadline_s = 1e-3},
      TiSpec{.robot_count = 5, .deadline_s = 2e-3},
      EmbbSpec{.user_count = 4, .rate_req_bps = 6e6},
      EmbbSpec{.user_count = 6, .rate_req_bps = 4e6},
      EmbbSpec{.user_count = 8, .rate_req_bps = 2e6},
      MmtcSpec{},
      MmtcSpec{},
      MmtcSpec{},
  };
  return sc;
}

Topology make_topology(const Scenario& sc, std::vector<Point> terminals) {
  Topology top;
  top.ru_positions = sc.ru_positions;
  top.slice_offset.push_back(0);
  for (const auto& s : sc.slices) top.slice_offset.push_back(top.slice_offset.back() + terminal_count(s));
  if (static_cast<int>(terminals.size()) != top.slice_offset.back())
    throw std::invalid_argument("terminal count does not match the scenario slices");
  top.terminal_positions = std::move(terminals);
  top.distances.assign(sc.ru_positions.size(), std::vector<double>(top.terminal_positions.size()));
  for (std::size_t j = 0; j < sc.ru_positions.size(); ++j) {
    for (std::size_t u = 0; u < top.terminal_positions.size(); ++u) {
      const double dx = sc.ru_positions[j].x - top.terminal_positions[u].x;
      const double dy = sc.ru_positions[j].y - top.terminal_positions[u].y;
      top.distances[j][u] = std::max(kMinDistanceM, std::hypot(dx, dy));
    }
  }
  return top;
}

Topology generate_topology(const Scenario& sc, std::string_view label) {
  Rng rng = derive_stream(sc.seed, label);
  std::uniform_real_distribution<double> coord(0.0, sc.area_side_m);
  std::vector<Point> terminals(sc.total_terminals());
  for (auto& p : terminals) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  return make_topology(sc, std::move(terminals));
}

}  // namespace slicebench
