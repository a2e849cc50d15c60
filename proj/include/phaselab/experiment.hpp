#pragma once

// Config-driven runs: plan, propagate each arm, extract delta(k), compare
// static models with the transfer-matrix oracle, recombine two arms, and
// write the report files.

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "phaselab/analysis.hpp"
#include "phaselab/config.hpp"
#include "phaselab/interferometer.hpp"
#include "phaselab/layout.hpp"
#include "phaselab/oracle.hpp"
#include "phaselab/propagator.hpp"

namespace phaselab {

struct OracleComparison {
  double k = 0.0;  // grid wavenumber nearest the packet's k0
  double dynamic_delta = 0.0;
  double exact_delta = 0.0;  // of the potential the run simulates
  double difference = 0.0;   // wrapped to (-pi, pi]
  double band_mean_reflectance = 0.0;
  double dynamic_reflectance = 0.0;
  oracle::OracleSweep design;  // exact sweep of the model itself
  PhaseShiftCurve eikonal;
};

struct ArmOutcome {
  std::string label;
  std::optional<InteractionModel> model;
  EhrenfestTrace trace;
  /// Final state; the transmitted component (renormalized) for reflective
  /// models.
  WaveFunction final_state;
  double transmitted = 1.0;
  double negative_momentum = 0.0;  // before post-selection
  PhaseShiftCurve curve;
  DispersivityReport report;
  /// "dynamic": verdict from the extracted curve. "oracle_eikonal": from the
  /// model's designed eta(k), which a fixed-potential run cannot realize.
  std::string verdict_source = "dynamic";
  EhrenfestResidual ehrenfest;
  std::optional<OracleComparison> oracle;
  std::optional<SpectralFringe> against_free;
  double runtime_s = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;    // as given (with overrides)
  ExperimentConfig resolved;  // every auto value filled in
  Plan plan;
  double epsilon = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  std::vector<ArmOutcome> arms;
  std::optional<FringeResult> fringe;
  std::optional<SpectralFringe> predicted;
  double runtime_s = 0.0;
};

namespace experiment {

inline PlanRequest plan_request(const ExperimentConfig& c) {
  PlanRequest r;
  r.k0 = c.k0;
  r.sigma_k = c.sigma_k;
  r.x0 = c.x0;
  r.n = c.n;
  r.x_min = c.x_min;
  r.x_max = c.x_max;
  r.max_points = c.max_points;
  r.t_end = c.t_end;
  r.dt = c.dt;
  r.record_every = c.record_every;
  for (const auto& a : c.arms)
    if (a.model) r.arms.push_back({*a.model, a.auto_zone_length, a.auto_pulse_start});
  return r;
}

// Zone length that scales the default tolerance; 1 for a free run.
inline double zone_length(const Plan& p) {
  return p.models.empty() ? 1.0 : zone_of(p.models.front()).length;
}

/// Plans the run and checks every precondition that needs no propagation.
inline Plan check(const ExperimentConfig& c) {
  const auto p = plan_run(plan_request(c));
  validate(p.packet, p.grid);
  for (const auto& m : p.models) {
    validate(p.schedule, p.grid, m);
    validate_band(m, c.k0 - 5.0 * c.sigma_k, c.k0 + 5.0 * c.sigma_k);
  }
  if (p.models.empty()) validate(p.schedule, p.grid, std::nullopt);
  return p;
}

inline ExperimentConfig resolve(const ExperimentConfig& c, const Plan& p, double eps, double lo,
                                double hi) {
  ExperimentConfig r = c;
  r.x0 = p.packet.x0;
  r.n = p.grid.size();
  r.x_min = p.grid.x_min();
  r.x_max = p.grid.x_max();
  r.t_end = p.schedule.t_end;
  r.dt = p.schedule.dt;
  r.record_every = p.schedule.record_every;
  std::size_t next = 0;
  for (auto& a : r.arms) {
    if (!a.model) continue;
    a.model = p.models[next++];
    a.auto_zone_length = a.auto_pulse_start = a.auto_k_ref = false;
  }
  r.epsilon = eps;
  r.band_lo = lo;
  r.band_hi = hi;
  r.sweep.reset();
  return r;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline ArmOutcome run_arm(const std::string& label, const std::optional<InteractionModel>& model,
                          const WaveFunction& psi0, const MomentumSpectrum& chi, const Plan& plan,
                          const ExperimentConfig& c, double eps) {
  const auto t0 = std::chrono::steady_clock::now();
  ArmOutcome a;
  a.label = label;
  a.model = model;
  auto r = propagate(psi0, model, plan.schedule);
  a.trace = std::move(r.trace);
  a.negative_momentum = negative_momentum_probability(r.final_state);
  const bool reflective = model && is_reflective(*model);
  if (reflective) {
    auto fwd = transmitted_component(r.final_state);
    a.transmitted = fwd.probability;
    a.final_state = std::move(fwd.state);
  } else {
    a.final_state = std::move(r.final_state);
  }
  ExtractOptions opt;
  opt.relative_threshold = c.threshold;
  a.curve = extract_phase(chi, a.final_state, opt);
  a.report = dispersivity(a.curve, eps);
  a.ehrenfest = ehrenfest_residual(a.trace, a.curve, chi);
  if (model) a.against_free = visibility_prediction(a.curve, chi);

  if (reflective) {
    OracleComparison o;
    const std::size_t i = static_cast<std::size_t>(
        std::min_element(a.curve.k.begin(), a.curve.k.end(),
                         [&](double x, double y) { return std::abs(x - c.k0) < std::abs(y - c.k0); }) -
        a.curve.k.begin());
    const auto real = oracle::realized_segments(*model);
    o.k = a.curve.k[i];
    o.dynamic_delta = a.curve.delta[i];
    o.exact_delta = oracle::scatter(real, o.k).delta;
    o.difference = std::remainder(o.dynamic_delta - o.exact_delta, 2.0 * std::numbers::pi);
    const auto& g = chi.grid();
    double wr = 0.0, w = 0.0, peak = 0.0;
    for (const auto& v : chi.values()) peak = std::max(peak, std::norm(v));
    for (std::size_t m = 0; m < g.size(); ++m) {
      const double k = g.k(m);
      const double wt = std::norm(chi.values()[m]);
      if (k <= 0.0 || wt <= c.threshold * peak) continue;
      wr += wt * oracle::scatter(real, k).reflectance;
      w += wt;
    }
    o.band_mean_reflectance = wr / w;
    o.dynamic_reflectance = 1.0 - a.transmitted;
    const double lo = c.band_lo.value_or(a.curve.k_lo), hi = c.band_hi.value_or(a.curve.k_hi);
    const auto design = oracle::segments_of(*model);
    o.design = oracle::sweep(design, lo, hi, c.samples);
    o.eikonal = oracle::eikonal_sweep(design, lo, hi, c.samples);
    if (std::holds_alternative<NondispersiveSlab>(*model)) {
      a.verdict_source = "oracle_eikonal";
      a.report = dispersivity(o.eikonal, eps);
    }
    a.oracle = std::move(o);
  }
  a.runtime_s = seconds_since(t0);
  return a;
}

}  // namespace experiment

/// Runs one configuration. With `threads > 1` the two arms propagate
/// concurrently.
inline ExperimentResult run_experiment(const ExperimentConfig& c, unsigned threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.config = c;
  res.plan = experiment::check(c);
  res.epsilon = c.epsilon.value_or(default_epsilon(experiment::zone_length(res.plan)));

  const auto psi0 = gaussian_packet(res.plan.packet, res.plan.grid);
  const auto chi = to_momentum(psi0);

  std::vector<std::optional<InteractionModel>> models;
  std::size_t next = 0;
  for (const auto& a : c.arms)
    models.push_back(a.model ? std::optional(res.plan.models[next++]) : std::nullopt);

  auto arm = [&](std::size_t i) {
    return experiment::run_arm("arm" + std::to_string(i + 1), models[i], psi0, chi, res.plan, c,
                               res.epsilon);
  };
  if (models.size() == 2 && threads > 1) {
    auto second = std::async(std::launch::async, arm, 1);
    res.arms.push_back(arm(0));
    res.arms.push_back(second.get());
  } else {
    for (std::size_t i = 0; i < models.size(); ++i) res.arms.push_back(arm(i));
  }

  res.band_lo = c.band_lo.value_or(res.arms[0].curve.k_lo);
  res.band_hi = c.band_hi.value_or(res.arms[0].curve.k_hi);
  if (res.arms.size() == 2) {
    res.fringe = interfere(res.arms[0].final_state, res.arms[1].final_state);
    PhaseShiftCurve rel = res.arms[0].curve;
    const auto& other = res.arms[1].curve;
    if (other.k != rel.k) throw AnalysisError("arms were analysed on different bands");
    for (std::size_t i = 0; i < rel.size(); ++i) rel.delta[i] = other.delta[i] - rel.delta[i];
    rel.d_delta_dk = finite_difference_slope(rel.k, rel.delta);
    res.predicted = visibility_prediction(rel, chi);
  }
  res.resolved = experiment::resolve(c, res.plan, res.epsilon, res.band_lo, res.band_hi);
  res.runtime_s = experiment::seconds_since(t0);
  return res;
}

// --- reports -----------------------------------------------------------------

namespace report {

using json = nlohmann::ordered_json;

inline std::string cell(double v) { return config::format(v); }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row_strings(header); }

  template <class... T>
  void row(const T&... v) {
    std::vector<std::string> s{to_cell(v)...};
    if (s.size() != cols_) throw PreconditionError("csv: row width does not match header");
    row_strings(s);
  }
  void row_vector(const std::vector<std::string>& s) {
    if (s.size() != cols_) throw PreconditionError("csv: row width does not match header");
    row_strings(s);
  }
  const std::string& str() const noexcept { return text_; }

 private:
  static std::string to_cell(double v) { return cell(v); }
  static std::string to_cell(const std::string& v) { return v; }
  static std::string to_cell(const char* v) { return v; }
  static std::string to_cell(std::size_t v) { return std::to_string(v); }
  void row_strings(const std::vector<std::string>& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) text_ += ',';
      text_ += s[i];
    }
    text_ += '\n';
  }
  std::size_t cols_;
  std::string text_;
};

inline std::string phase_table(const ArmOutcome& a) {
  const bool st = a.oracle.has_value();
  std::vector<std::string> h{"k", "delta", "d_delta_dk", "weight"};
  if (st) h.insert(h.end(), {"exact_delta", "exact_reflectance", "eikonal_delta"});
  Csv t(h);
  const auto design = st ? oracle::segments_of(*a.model) : std::vector<oracle::Segment>{};
  std::vector<double> exact;
  if (st) {
    std::vector<double> raw;
    for (double k : a.curve.k) raw.push_back(oracle::scatter(design, k).delta);
    exact = unwrap_from(raw, raw.size() / 2);
  }
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    const double k = a.curve.k[i];
    if (st)
      t.row(k, a.curve.delta[i], a.curve.d_delta_dk[i], a.curve.weight[i], exact[i],
            oracle::scatter(design, k).reflectance, oracle::eikonal_phase(design, k));
    else
      t.row(k, a.curve.delta[i], a.curve.d_delta_dk[i], a.curve.weight[i]);
  }
  return t.str();
}

inline std::string oracle_table(const OracleComparison& o) {
  Csv t({"k", "delta", "d_delta_dk", "reflectance", "transmittance", "eikonal_delta",
         "eikonal_slope"});
  const auto& c = o.design.curve;
  for (std::size_t i = 0; i < c.size(); ++i)
    t.row(c.k[i], c.delta[i], c.d_delta_dk[i], o.design.reflectance[i], o.design.transmittance[i],
          o.eikonal.delta[i], o.eikonal.d_delta_dk[i]);
  return t.str();
}

inline std::string trace_table(const EhrenfestTrace& tr) {
  Csv t({"t", "mean_x", "mean_p", "mean_F", "norm", "zone_containment", "forward_mean_x",
         "forward_probability"});
  for (std::size_t i = 0; i < tr.size(); ++i)
    t.row(tr.times[i], tr.mean_x[i], tr.mean_p[i], tr.mean_F[i], tr.norm[i],
          tr.zone_containment[i], tr.forward_mean_x[i], tr.forward_probability[i]);
  return t.str();
}

inline json entries_json(const ExperimentConfig& c) {
  json j = json::object();
  for (const auto& [k, v] : config::entries(c)) j[k] = v;
  return j;
}

inline json arm_json(const ArmOutcome& a, bool timings) {
  json j;
  j["label"] = a.label;
  j["model"] = a.model ? std::string(model_name(*a.model)) : "free";
  j["delta_mean"] = a.report.mean_delta;
  j["max_abs_slope"] = a.report.max_abs_slope;
  j["weighted_mean_slope"] = a.report.weighted_mean_slope;
  j["epsilon"] = a.report.epsilon;
  j["verdict"] = to_string(a.report.verdict);
  j["verdict_source"] = a.verdict_source;
  if (a.verdict_source != "dynamic") {
    const auto dyn = dispersivity(a.curve, a.report.epsilon);
    j["dynamic_max_abs_slope"] = dyn.max_abs_slope;
    j["dynamic_delta_mean"] = dyn.mean_delta;
  }
  if (a.model) j["predicted_phase"] = predicted_phase(*a.model, a.curve.k[a.curve.size() / 2]);
  j["band"] = {a.curve.k_lo, a.curve.k_hi};
  j["peak_abs_force"] = a.trace.peak_abs_force();
  j["norm_drift"] = a.trace.max_norm_drift();
  j["momentum_drift"] = a.trace.max_momentum_drift();
  j["negative_momentum_probability"] = a.negative_momentum;
  j["transmitted_probability"] = a.transmitted;
  j["ehrenfest"] = {{"displacement", a.ehrenfest.displacement},
                    {"slope_term", a.ehrenfest.slope_term},
                    {"residual", a.ehrenfest.residual},
                    {"free_displacement", free_displacement(a.trace)}};
  if (a.against_free)
    j["against_free_arm"] = {{"phase", a.against_free->phase},
                             {"visibility", a.against_free->visibility}};
  if (a.oracle) {
    const auto& o = *a.oracle;
    j["oracle"] = {{"k", o.k},
                   {"dynamic_delta", o.dynamic_delta},
                   {"exact_delta", o.exact_delta},
                   {"difference", o.difference},
                   {"reflectance_band_mean", o.band_mean_reflectance},
                   {"reflectance_dynamic", o.dynamic_reflectance}};
  }
  if (timings) j["runtime_s"] = a.runtime_s;
  return j;
}

inline json fringe_json(const ExperimentResult& r) {
  json j;
  if (r.fringe) {
    j["I_O"] = r.fringe->I_O;
    j["I_H"] = r.fringe->I_H;
    j["relative_phase"] = r.fringe->relative_phase;
    j["visibility"] = r.fringe->visibility;
    j["predicted_phase"] = r.predicted->phase;
    j["predicted_visibility"] = r.predicted->visibility;
  }
  return j;
}

inline json summary(const ExperimentResult& r, bool timings = true) {
  json j;
  j["name"] = r.config.name;
  j["config"] = entries_json(r.config);
  j["resolved"] = entries_json(r.resolved);
  j["grid"] = {{"n", r.plan.grid.size()},
               {"x_min", r.plan.grid.x_min()},
               {"x_max", r.plan.grid.x_max()},
               {"dx", r.plan.grid.dx()},
               {"k_max", r.plan.grid.k_max()}};
  j["steps"] = r.plan.schedule.steps();
  j["arms"] = json::array();
  for (const auto& a : r.arms) j["arms"].push_back(arm_json(a, timings));
  if (r.fringe) j["interferometer"] = fringe_json(r);
  if (timings) j["runtime_s"] = r.runtime_s;
  return j;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + p.string());
  out << text;
}

/// Writes summary.json, resolved.cfg and the per-arm CSV tables into `dir`.
inline void write_run(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "summary.json", summary(r).dump(2) + "\n");
  write_file(dir / "resolved.cfg", config::to_text(r.resolved));
  for (const auto& a : r.arms) {
    write_file(dir / ("phase_" + a.label + ".csv"), phase_table(a));
    write_file(dir / ("trace_" + a.label + ".csv"), trace_table(a.trace));
    if (a.oracle) write_file(dir / ("oracle_" + a.label + ".csv"), oracle_table(*a.oracle));
  }
  if (r.fringe) {
    Csv t({"I_O", "I_H", "relative_phase", "visibility", "predicted_phase",
           "predicted_visibility"});
    t.row(r.fringe->I_O, r.fringe->I_H, r.fringe->relative_phase, r.fringe->visibility,
          r.predicted->phase, r.predicted->visibility);
    write_file(dir / "fringe.csv", t.str());
  }
}

}  // namespace report

// --- sweeps ------------------------------------------------------------------

struct SweepPoint {
  double value = 0.0;
  std::optional<ExperimentResult> result;
  std::string error;  // set when the point failed
};

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Results are
/// stored by index, so the order of completion does not matter.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
}

/// Runs every sweep point. A point that throws is recorded with its error
/// message and does not stop the others.
inline std::vector<SweepPoint> run_sweep(const ExperimentConfig& c, unsigned threads) {
  if (!c.sweep) throw PreconditionError("config has no sweep section");
  const auto& s = *c.sweep;
  std::vector<SweepPoint> pts(s.steps);
  std::vector<ExperimentConfig> cfgs;
  for (std::size_t i = 0; i < s.steps; ++i) {
    pts[i].value = s.value(i);
    cfgs.push_back(config::with_value(c, s.parameter, pts[i].value));
    experiment::check(cfgs.back());  // fail before any compute
  }
  parallel_for(s.steps, threads, [&](std::size_t i) {
    try {
      pts[i].result = run_experiment(cfgs[i], 1);
    } catch (const std::exception& e) {
      pts[i].error = e.what();
    }
  });
  return pts;
}

namespace report {

inline std::string sweep_table(const ExperimentConfig& c, const std::vector<SweepPoint>& pts) {
  std::vector<std::string> h{"index", c.sweep->parameter};
  for (std::size_t a = 0; a < c.arms.size(); ++a) {
    const std::string p = "arm" + std::to_string(a + 1) + "_";
    for (const char* f : {"delta_mean", "max_abs_slope", "verdict", "ehrenfest_residual",
                          "peak_abs_force", "visibility_vs_free"})
      h.push_back(p + f);
  }
  for (const char* f : {"I_O", "I_H", "relative_phase", "visibility", "predicted_phase",
                        "predicted_visibility", "error"})
    h.push_back(f);
  Csv t(h);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::string> row{std::to_string(i), cell(pts[i].value)};
    const auto& r = pts[i].result;
    for (std::size_t a = 0; a < c.arms.size(); ++a) {
      if (!r) {
        row.insert(row.end(), 6, "");
        continue;
      }
      const auto& arm = r->arms[a];
      row.push_back(cell(arm.report.mean_delta));
      row.push_back(cell(arm.report.max_abs_slope));
      row.push_back(to_string(arm.report.verdict));
      row.push_back(cell(arm.ehrenfest.residual));
      row.push_back(cell(arm.trace.peak_abs_force()));
      row.push_back(arm.against_free ? cell(arm.against_free->visibility) : "");
    }
    if (r && r->fringe) {
      for (double v : {r->fringe->I_O, r->fringe->I_H, r->fringe->relative_phase,
                       r->fringe->visibility, r->predicted->phase, r->predicted->visibility})
        row.push_back(cell(v));
    } else {
      row.insert(row.end(), 6, "");
    }
    std::string err = pts[i].error;
    for (auto& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    row.push_back(err);
    t.row_vector(row);
  }
  return t.str();
}

inline void write_sweep(const ExperimentConfig& c, const std::vector<SweepPoint>& pts,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json j;
  j["name"] = c.name;
  j["config"] = entries_json(c);
  j["parameter"] = c.sweep->parameter;
  j["points"] = json::array();
  for (const auto& p : pts) {
    json pj;
    pj["value"] = p.value;
    if (p.result) {
      pj["summary"] = summary(*p.result);
    } else {
      pj["error"] = p.error;
    }
    j["points"].push_back(pj);
  }
  write_file(dir / "summary.json", j.dump(2) + "\n");
  write_file(dir / "sweep.csv", sweep_table(c, pts));
}

}  // namespace report

}  // namespace phaselab
