#pragma once

// Experiment configuration: a flat text format of `key = value` lines.
//
//   # comment to end of line
//   packet.k0      = 5
//   arm1.model     = gas_cell
//   arm1.pulse.t_on = auto
//
// Keys are dotted names (the full list is in README.md); values are numbers,
// bare words (enums, names) or the word `auto` where a key allows it. Each
// key may appear once. Whitespace around keys and values is ignored and
// blank lines are skipped. Unknown keys, keys that do not belong to the
// chosen model and malformed values are errors naming the line and the key.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "phaselab/errors.hpp"
#include "phaselab/interactions.hpp"

namespace phaselab {

class ConfigError : public PreconditionError {
 public:
  ConfigError(const std::string& key, const std::string& what, int line = 0)
      : PreconditionError((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                          key + ": " + what),
        key_(key),
        line_(line) {}
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

struct ArmSpec {
  std::optional<InteractionModel> model;  // empty: free arm
  bool auto_zone_length = false;
  bool auto_pulse_start = false;
  bool auto_k_ref = false;  // nondispersive_slab: k_ref follows packet.k0
};

struct SweepSpec {
  std::string parameter;  // any numeric key, e.g. packet.sigma_k or arm1.V0
  double from = 0.0;
  double to = 0.0;
  std::size_t steps = 2;

  double value(std::size_t i) const {
    if (steps < 2) return from;
    return from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
  }
};

struct ExperimentConfig {
  std::string name = "experiment";

  double k0 = 5.0;
  double sigma_k = 0.5;
  std::optional<double> x0;

  std::optional<std::size_t> n;
  std::optional<double> x_min;
  std::optional<double> x_max;
  std::size_t max_points = 2048;  // ceiling for automatic grids

  std::optional<double> t_end;
  std::optional<double> dt;
  std::optional<std::size_t> record_every;

  std::vector<ArmSpec> arms{ArmSpec{}};

  std::optional<double> band_lo;
  std::optional<double> band_hi;
  std::size_t samples = 64;
  std::optional<double> epsilon;
  double threshold = 1e-6;

  std::optional<SweepSpec> sweep;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
};

namespace config {

using Entries = std::vector<std::pair<std::string, std::string>>;

inline std::string format(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T>
std::string format_opt(const std::optional<T>& v) {
  if (!v) return "auto";
  if constexpr (std::is_same_v<T, double>) return format(*v);
  else return std::to_string(*v);
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> e) : entries_(std::move(e)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::optional<std::string> raw(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    it->second.used = true;
    return it->second.value;
  }

  double number(const std::string& key, double fallback) {
    auto v = raw(key);
    return v ? parse_number(key, *v) : fallback;
  }

  std::optional<double> number_or_auto(const std::string& key, std::optional<double> fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "auto") return std::nullopt;
    return parse_number(key, *v);
  }

  long long integer(const std::string& key, long long fallback) {
    auto v = raw(key);
    return v ? parse_integer(key, *v) : fallback;
  }

  std::optional<std::size_t> count_or_auto(const std::string& key) {
    auto v = raw(key);
    if (!v || *v == "auto") return std::nullopt;
    const auto n = parse_integer(key, *v);
    if (n < 1) fail(key, "must be a positive integer");
    return static_cast<std::size_t>(n);
  }

  std::string word(const std::string& key, const std::string& fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    if (v->empty()) fail(key, "empty value");
    return *v;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    auto it = entries_.find(key);
    throw ConfigError(key, what, it == entries_.end() ? 0 : it->second.line);
  }

  // Throws for the first key nobody asked for.
  void finish() const {
    const std::pair<const std::string, Entry>* first = nullptr;
    for (const auto& kv : entries_)
      if (!kv.second.used && (!first || kv.second.line < first->second.line)) first = &kv;
    if (!first) return;
    const auto& k = first->first;
    if (k.rfind("arm", 0) == 0 && k.find('.') != std::string::npos)
      fail(k, "unknown key, or not a parameter of the model chosen for this arm");
    fail(k, "unknown key");
  }

 private:
  double parse_number(const std::string& key, const std::string& s) const {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (b != e && *b == '+') ++b;
    double v = 0.0;
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc{} || r.ptr != e || !std::isfinite(v))
      fail(key, "expected a number, got '" + s + "'");
    return v;
  }
  long long parse_integer(const std::string& key, const std::string& s) const {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (b != e && *b == '+') ++b;
    long long v = 0;
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc{} || r.ptr != e) fail(key, "expected an integer, got '" + s + "'");
    return v;
  }

  std::map<std::string, Entry> entries_;
};

inline std::map<std::string, Entry> split(std::istream& in) {
  std::map<std::string, Entry> out;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto s = trim(line);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(s, "expected 'key = value'", no);
    const auto key = trim(std::string_view(s).substr(0, eq));
    const auto value = trim(std::string_view(s).substr(eq + 1));
    if (key.empty()) throw ConfigError("(empty key)", "expected 'key = value'", no);
    if (value.empty()) throw ConfigError(key, "missing value", no);
    if (out.count(key)) throw ConfigError(key, "duplicate key", no);
    out[key] = {value, no, false};
  }
  return out;
}

inline PulseSchedule read_pulse(Reader& r, const std::string& p, bool& auto_start) {
  PulseSchedule s;
  const auto t_on = r.number_or_auto(p + "pulse.t_on", std::nullopt);
  auto_start = !t_on;
  const double d = r.number(p + "pulse.duration", 2.0);
  if (!(d > 0.0)) r.fail(p + "pulse.duration", "must be positive");
  s.t_on = t_on.value_or(0.0);
  s.t_off = s.t_on + d;
  const auto env = r.word(p + "pulse.envelope", "smooth");
  if (env == "smooth") s.envelope = Envelope::smooth;
  else if (env == "rectangular") s.envelope = Envelope::rectangular;
  else r.fail(p + "pulse.envelope", "expected smooth or rectangular, got '" + env + "'");
  s.ramp = r.number_or_auto(p + "pulse.ramp", std::nullopt).value_or(0.0);
  if (s.ramp < 0.0) r.fail(p + "pulse.ramp", "must be non-negative");
  return s;
}

inline ArmSpec read_arm(Reader& r, const std::string& name, const std::string& fallback_model,
                        double k0) {
  const std::string p = name + ".";
  ArmSpec arm;
  const auto kind = r.word(p + "model", fallback_model);
  if (kind == "free") return arm;

  auto zone = [&](double start, double length, bool allow_auto) {
    InteractionZone z{r.number(p + "zone.start", start), length};
    const auto len = r.number_or_auto(p + "zone.length", allow_auto ? std::nullopt
                                                                     : std::optional(length));
    if (len) {
      if (!(*len > 0.0)) r.fail(p + "zone.length", "must be positive");
      z.length = *len;
    } else if (!allow_auto) {
      r.fail(p + "zone.length", "auto is only allowed for pulsed models");
    } else {
      arm.auto_zone_length = true;
    }
    return z;
  };

  if (kind == "static_slab") {
    StaticSlab m;
    m.thickness = r.number(p + "thickness", m.thickness);
    m.zone = zone(0.0, m.thickness, false);
    m.V0 = r.number(p + "V0", m.V0);
    arm.model = m;
  } else if (kind == "nondispersive_slab") {
    NondispersiveSlab m;
    m.thickness = r.number(p + "thickness", m.thickness);
    m.zone = zone(0.0, m.thickness, false);
    m.delta0 = r.number(p + "delta0", m.delta0);
    const auto k_ref = r.number_or_auto(p + "k_ref", std::nullopt);
    arm.auto_k_ref = !k_ref;
    m.k_ref = k_ref.value_or(k0);
    arm.model = m;
  } else if (kind == "gas_cell") {
    GasCell m;
    m.zone = zone(0.0, 60.0, true);
    m.V0 = r.number(p + "V0", m.V0);
    m.pulse = read_pulse(r, p, arm.auto_pulse_start);
    arm.model = m;
  } else if (kind == "electric_ab") {
    ElectricAB m;
    m.zone = zone(0.0, 60.0, true);
    m.dphi = r.number(p + "dphi", m.dphi);
    m.pulse = read_pulse(r, p, arm.auto_pulse_start);
    arm.model = m;
  } else if (kind == "scalar_ab") {
    ScalarAB m;
    m.zone = zone(0.0, 60.0, true);
    m.B = r.number(p + "B", m.B);
    m.mu = r.number(p + "mu", m.mu);
    m.pulse = read_pulse(r, p, arm.auto_pulse_start);
    arm.model = m;
  } else if (kind == "magnetic_ab") {
    MagneticAB m;
    m.zone = zone(0.0, 10.0, false);
    m.alpha = r.number(p + "alpha", m.alpha);
    arm.model = m;
  } else if (kind == "aharonov_casher") {
    AharonovCasher m;
    m.zone = zone(0.0, 10.0, false);
    m.kappa = r.number(p + "kappa", m.kappa);
    const auto s = r.integer(p + "sign", 1);
    if (s != 1 && s != -1) r.fail(p + "sign", "must be +1 or -1");
    m.sign = static_cast<int>(s);
    arm.model = m;
  } else {
    r.fail(p + "model",
           "unknown model '" + kind +
               "' (free, static_slab, nondispersive_slab, gas_cell, electric_ab, "
               "magnetic_ab, aharonov_casher, scalar_ab)");
  }
  try {
    validate(*arm.model);
  } catch (const PreconditionError& e) {
    r.fail(p + "model", e.what());
  }
  return arm;
}

inline void write_pulse(Entries& out, const std::string& p, const PulseSchedule& s, bool auto_start) {
  out.emplace_back(p + "pulse.t_on", auto_start ? "auto" : format(s.t_on));
  out.emplace_back(p + "pulse.duration", format(s.duration()));
  out.emplace_back(p + "pulse.envelope", s.envelope == Envelope::smooth ? "smooth" : "rectangular");
  out.emplace_back(p + "pulse.ramp", s.ramp > 0.0 ? format(s.ramp) : "auto");
}

inline void write_arm(Entries& out, const std::string& name, const ArmSpec& arm) {
  const std::string p = name + ".";
  if (!arm.model) {
    out.emplace_back(p + "model", "free");
    return;
  }
  out.emplace_back(p + "model", std::string(model_name(*arm.model)));
  const auto& z = zone_of(*arm.model);
  out.emplace_back(p + "zone.start", format(z.start));
  out.emplace_back(p + "zone.length", arm.auto_zone_length ? "auto" : format(z.length));
  std::visit(overloaded{
                 [&](const StaticSlab& m) {
                   out.emplace_back(p + "thickness", format(m.thickness));
                   out.emplace_back(p + "V0", format(m.V0));
                 },
                 [&](const NondispersiveSlab& m) {
                   out.emplace_back(p + "thickness", format(m.thickness));
                   out.emplace_back(p + "delta0", format(m.delta0));
                   out.emplace_back(p + "k_ref", arm.auto_k_ref ? "auto" : format(m.k_ref));
                 },
                 [&](const GasCell& m) {
                   out.emplace_back(p + "V0", format(m.V0));
                   write_pulse(out, p, m.pulse, arm.auto_pulse_start);
                 },
                 [&](const ElectricAB& m) {
                   out.emplace_back(p + "dphi", format(m.dphi));
                   write_pulse(out, p, m.pulse, arm.auto_pulse_start);
                 },
                 [&](const ScalarAB& m) {
                   out.emplace_back(p + "B", format(m.B));
                   out.emplace_back(p + "mu", format(m.mu));
                   write_pulse(out, p, m.pulse, arm.auto_pulse_start);
                 },
                 [&](const MagneticAB& m) { out.emplace_back(p + "alpha", format(m.alpha)); },
                 [&](const AharonovCasher& m) {
                   out.emplace_back(p + "kappa", format(m.kappa));
                   out.emplace_back(p + "sign", m.sign > 0 ? "+1" : "-1");
                 },
             },
             *arm.model);
}

}  // namespace detail

/// Canonical key/value listing of a configuration, defaults included, in a
/// fixed order. `parse(to_text(c))` reproduces `c`.
inline Entries entries(const ExperimentConfig& c) {
  Entries out;
  out.emplace_back("name", c.name);
  out.emplace_back("packet.k0", format(c.k0));
  out.emplace_back("packet.sigma_k", format(c.sigma_k));
  out.emplace_back("packet.x0", format_opt(c.x0));
  out.emplace_back("grid.n", format_opt(c.n));
  out.emplace_back("grid.x_min", format_opt(c.x_min));
  out.emplace_back("grid.x_max", format_opt(c.x_max));
  out.emplace_back("grid.max_points", std::to_string(c.max_points));
  out.emplace_back("schedule.t_end", format_opt(c.t_end));
  out.emplace_back("schedule.dt", format_opt(c.dt));
  out.emplace_back("schedule.record_every", format_opt(c.record_every));
  for (std::size_t i = 0; i < c.arms.size(); ++i)
    detail::write_arm(out, "arm" + std::to_string(i + 1), c.arms[i]);
  out.emplace_back("analysis.band_lo", format_opt(c.band_lo));
  out.emplace_back("analysis.band_hi", format_opt(c.band_hi));
  out.emplace_back("analysis.samples", std::to_string(c.samples));
  out.emplace_back("analysis.epsilon", format_opt(c.epsilon));
  out.emplace_back("analysis.threshold", format(c.threshold));
  if (c.sweep) {
    out.emplace_back("sweep.parameter", c.sweep->parameter);
    out.emplace_back("sweep.from", format(c.sweep->from));
    out.emplace_back("sweep.to", format(c.sweep->to));
    out.emplace_back("sweep.steps", std::to_string(c.sweep->steps));
  }
  out.emplace_back("output.dir", c.output_dir);
  out.emplace_back("seed", std::to_string(c.seed));
  return out;
}

inline std::string to_text(const ExperimentConfig& c) {
  std::string s;
  for (const auto& [k, v] : entries(c)) s += k + " = " + v + "\n";
  return s;
}

ExperimentConfig parse(std::istream& in);

inline ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

/// Re-parses `c` with `key` set to `value`; used for sweeps.
inline ExperimentConfig with_value(const ExperimentConfig& c, const std::string& key,
                                   double value) {
  std::string text;
  bool found = false;
  for (const auto& [k, v] : entries(c)) {
    if (k == key) {
      text += k + " = " + format(value) + "\n";
      found = true;
    } else if (k.rfind("sweep.", 0) != 0) {
      text += k + " = " + v + "\n";
    }
  }
  if (!found) throw ConfigError(key, "not a key of this configuration");
  auto out = parse(text);
  out.sweep.reset();
  return out;
}

inline ExperimentConfig parse(std::istream& in) {
  detail::Reader r(detail::split(in));
  ExperimentConfig c;
  c.name = r.word("name", c.name);
  c.k0 = r.number("packet.k0", c.k0);
  c.sigma_k = r.number("packet.sigma_k", c.sigma_k);
  if (!(c.k0 > 0.0)) r.fail("packet.k0", "must be positive");
  if (!(c.sigma_k > 0.0)) r.fail("packet.sigma_k", "must be positive");
  c.x0 = r.number_or_auto("packet.x0", std::nullopt);

  c.n = r.count_or_auto("grid.n");
  if (c.n && (*c.n < 256 || (*c.n & (*c.n - 1)) != 0))
    r.fail("grid.n", "must be a power of two >= 256");
  c.x_min = r.number_or_auto("grid.x_min", std::nullopt);
  c.x_max = r.number_or_auto("grid.x_max", std::nullopt);
  if (c.x_min.has_value() != c.x_max.has_value())
    r.fail(c.x_min ? "grid.x_min" : "grid.x_max", "give both grid.x_min and grid.x_max, or neither");
  if (c.x_min && !(*c.x_max > *c.x_min)) r.fail("grid.x_max", "must exceed grid.x_min");
  const auto max_points = r.integer("grid.max_points", 2048);
  if (max_points < 256) r.fail("grid.max_points", "must be at least 256");
  c.max_points = static_cast<std::size_t>(max_points);

  c.t_end = r.number_or_auto("schedule.t_end", std::nullopt);
  if (c.t_end && !(*c.t_end > 0.0)) r.fail("schedule.t_end", "must be positive");
  c.dt = r.number_or_auto("schedule.dt", std::nullopt);
  if (c.dt && !(*c.dt > 0.0)) r.fail("schedule.dt", "must be positive");
  c.record_every = r.count_or_auto("schedule.record_every");

  c.arms.clear();
  c.arms.push_back(detail::read_arm(r, "arm1", "free", c.k0));
  if (r.has("arm2.model")) c.arms.push_back(detail::read_arm(r, "arm2", "free", c.k0));

  c.band_lo = r.number_or_auto("analysis.band_lo", std::nullopt);
  c.band_hi = r.number_or_auto("analysis.band_hi", std::nullopt);
  if (c.band_lo.has_value() != c.band_hi.has_value())
    r.fail(c.band_lo ? "analysis.band_lo" : "analysis.band_hi",
           "give both band ends, or neither");
  if (c.band_lo && !(*c.band_lo > 0.0 && *c.band_hi > *c.band_lo))
    r.fail("analysis.band_hi", "band must satisfy 0 < band_lo < band_hi");
  const auto samples = r.integer("analysis.samples", 64);
  if (samples < 2) r.fail("analysis.samples", "must be at least 2");
  c.samples = static_cast<std::size_t>(samples);
  c.epsilon = r.number_or_auto("analysis.epsilon", std::nullopt);
  if (c.epsilon && !(*c.epsilon > 0.0)) r.fail("analysis.epsilon", "must be positive");
  c.threshold = r.number("analysis.threshold", c.threshold);
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) r.fail("analysis.threshold", "must lie in (0, 1)");

  if (r.has("sweep.parameter")) {
    SweepSpec s;
    s.parameter = r.word("sweep.parameter", "");
    s.from = r.number("sweep.from", 0.0);
    s.to = r.number("sweep.to", 0.0);
    const auto steps = r.integer("sweep.steps", 2);
    if (steps < 1) r.fail("sweep.steps", "must be at least 1");
    s.steps = static_cast<std::size_t>(steps);
    if (s.parameter.rfind("sweep.", 0) == 0 || s.parameter == "seed")
      r.fail("sweep.parameter", "cannot sweep '" + s.parameter + "'");
    c.sweep = s;
  } else {
    for (const char* k : {"sweep.from", "sweep.to", "sweep.steps"})
      if (r.has(k)) r.fail(k, "requires sweep.parameter");
  }

  c.output_dir = r.word("output.dir", c.output_dir);
  const auto seed = r.integer("seed", 1);
  if (seed < 0) r.fail("seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  r.finish();

  if (c.sweep) {
    // Every point must itself be a valid configuration.
    for (std::size_t i = 0; i < c.sweep->steps; ++i) {
      try {
        with_value(c, c.sweep->parameter, c.sweep->value(i));
      } catch (const ConfigError& e) {
        if (e.key() == c.sweep->parameter && e.line() == 0)
          r.fail("sweep.parameter", "'" + c.sweep->parameter + "' is not a numeric key of this configuration");
        r.fail("sweep.parameter", "point " + std::to_string(i) + " is invalid: " + e.what());
      }
    }
  }
  return c;
}

inline ExperimentConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  return parse(in);
}

}  // namespace config

}  // namespace phaselab
