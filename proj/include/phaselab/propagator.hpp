#pragma once

// Time evolution under H = (p - A(x))^2 / 2 + V(x, t) by symmetric
// (Strang) splitting:
//
//   psi <- e^{-i V(t+dt) dt/2} K e^{-i V(t) dt/2} psi,
//   K   = e^{i L(x)} F^-1 e^{-i k^2 dt / 2} F e^{-i L(x)},   L' = A.
//
// A is nonzero only for the gauge-coupled models; V only for the local
// scalar ones. Conjugating the free kinetic step with the gauge factor is the
// exact exponential of the minimally coupled kinetic operator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "phaselab/core.hpp"
#include "phaselab/interactions.hpp"

namespace phaselab {

struct Schedule {
  double t_start = 0.0;
  double t_end = 1.0;
  double dt = 1e-3;
  std::size_t record_every = 10;

  std::size_t steps() const noexcept {
    return static_cast<std::size_t>(std::llround((t_end - t_start) / dt));
  }
};

/// Expectation values recorded during a run. `mean_p` is the mechanical
/// momentum <p - A>, which equals <p> outside any gauge zone.
struct EhrenfestTrace {
  std::vector<double> times;
  std::vector<double> mean_x;
  std::vector<double> mean_p;
  std::vector<double> mean_F;
  std::vector<double> norm;
  std::vector<double> zone_containment;
  /// <x> of the k > 0 component alone, renormalized; equals mean_x when
  /// nothing is reflected.
  std::vector<double> forward_mean_x;
  std::vector<double> forward_probability;

  std::size_t size() const noexcept { return times.size(); }

  double peak_abs_force() const noexcept {
    double f = 0.0;
    for (double v : mean_F) f = std::max(f, std::abs(v));
    return f;
  }
  double max_norm_drift() const noexcept {
    double d = 0.0;
    for (double v : norm) d = std::max(d, std::abs(v - norm.front()));
    return d;
  }
  double max_momentum_drift() const noexcept {
    double d = 0.0;
    for (double v : mean_p) d = std::max(d, std::abs(v - mean_p.front()));
    return d;
  }
};

struct PropagationResult {
  WaveFunction final_state;
  EhrenfestTrace trace;
};

struct PropagateOptions {
  /// Largest packet mass allowed outside the zone while a pulse is on.
  double containment_tolerance = 1e-8;
  /// Largest |psi| at the grid ends relative to its peak.
  double boundary_tolerance = 1e-8;
  double norm_tolerance = 1e-8;
  /// Turning this off lets a pulse act on a packet straddling the zone
  /// edges; useful for exposing edge forces.
  bool enforce_containment = true;
  /// Require the run to end once the interaction can no longer act.
  bool require_complete = true;
  bool check_guards = true;
};

/// Exact free evolution: chi(k) -> chi(k) exp(-i k^2 t / 2).
inline WaveFunction free_reference(const WaveFunction& psi0, double t) {
  const auto chi = to_momentum(psi0);
  const auto& g = chi.grid();
  std::vector<cplx> out(chi.values().begin(), chi.values().end());
  for (std::size_t m = 0; m < out.size(); ++m) {
    const double k = g.k(m);
    out[m] *= std::polar(1.0, -0.5 * k * k * t);
  }
  return to_position(MomentumSpectrum(g, std::move(out), psi0.time() + t));
}

inline void validate(const Schedule& s, const SpatialGrid& grid,
                     const std::optional<InteractionModel>& model, bool check_guards = true) {
  if (!(s.dt > 0.0)) throw PreconditionError("schedule dt must be positive");
  if (!(s.t_end > s.t_start)) throw PreconditionError("schedule requires t_end > t_start");
  if (s.record_every == 0) throw PreconditionError("schedule record_every must be >= 1");
  const double ratio = (s.t_end - s.t_start) / s.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw PreconditionError("schedule duration is not an integer number of steps");
  if (!check_guards) return;
  const double kmax = grid.k_max();
  if (s.dt * kmax * kmax / 2.0 >= 0.5)
    throw PreconditionError("dt too large for the grid: dt k_max^2 / 2 must be < 0.5");
  if (model && s.dt * max_abs_potential(*model) >= 0.1)
    throw PreconditionError("dt too large for the potential: dt max|V| must be < 0.1");
}

namespace detail {

// Cumulative trapezoid of A on the grid.
inline std::vector<double> gauge_phase(const InteractionModel& model, const SpatialGrid& g) {
  const std::size_t n = g.size();
  std::vector<double> lambda(n, 0.0);
  double prev = gauge_potential(model, g.x(0));
  for (std::size_t j = 1; j < n; ++j) {
    const double cur = gauge_potential(model, g.x(j));
    lambda[j] = lambda[j - 1] + 0.5 * (prev + cur) * g.dx();
    prev = cur;
  }
  return lambda;
}

// Amplitude of a pulsed uniform potential: V(x, t) = amp * env(t) on the zone.
inline double pulse_amplitude(const InteractionModel& model) {
  return std::visit(overloaded{
                        [](const GasCell& m) { return m.V0; },
                        [](const ElectricAB& m) { return m.dphi; },
                        [](const ScalarAB& m) { return -m.mu * m.B; },
                        [](const auto&) { return 0.0; },
                    },
                    model);
}

class Stepper {
 public:
  Stepper(const SpatialGrid& g, const std::optional<InteractionModel>& model, double dt)
      : g_(g), model_(model), dt_(dt), n_(g.size()), plan_(FftPlan::get(g.size())) {
    kinetic_.resize(n_);
    for (std::size_t q = 0; q < n_; ++q) {
      const double m = q < n_ / 2 ? static_cast<double>(q) : static_cast<double>(q) - n_;
      const double k = m * g.dk();
      // The inverse transform is unnormalized; fold 1/n in here.
      kinetic_[q] = std::polar(1.0 / static_cast<double>(n_), -0.5 * k * k * dt);
    }
    scratch_.resize(n_);
    spectrum_.resize(n_);
    if (!model_) return;

    const auto& zone = zone_of(*model_);
    zone_lo_ = n_;
    zone_hi_ = 0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (zone.contains(g.x(j))) {
        zone_lo_ = std::min(zone_lo_, j);
        zone_hi_ = j + 1;
      }
    }
    if (zone_lo_ >= zone_hi_) zone_lo_ = zone_hi_ = 0;

    if (is_gauge_coupled(*model_)) {
      const auto lambda = gauge_phase(*model_, g);
      gauge_in_.resize(n_);
      gauge_out_.resize(n_);
      for (std::size_t j = 0; j < n_; ++j) {
        gauge_in_[j] = std::polar(1.0, -lambda[j]);
        gauge_out_[j] = std::polar(1.0, lambda[j]);
      }
    } else if (auto p = pulse_of(*model_)) {
      pulse_ = *p;
      pulse_amp_ = pulse_amplitude(*model_);
    } else {
      static_kick_.resize(n_);
      for (std::size_t j = 0; j < n_; ++j)
        static_kick_[j] = std::polar(1.0, -0.5 * dt * local_potential(*model_, g.x(j), 0.0));
    }
  }

  void kick(std::vector<cplx>& psi, double t) const {
    if (!static_kick_.empty()) {
      for (std::size_t j = 0; j < n_; ++j) psi[j] *= static_kick_[j];
    } else if (pulse_) {
      const double v = pulse_amp_ * pulse_->value(t);
      if (v == 0.0) return;
      const cplx f = std::polar(1.0, -0.5 * dt_ * v);
      for (std::size_t j = zone_lo_; j < zone_hi_; ++j) psi[j] *= f;
    }
  }

  void drift(std::vector<cplx>& psi) {
    if (!gauge_in_.empty())
      for (std::size_t j = 0; j < n_; ++j) psi[j] *= gauge_in_[j];
    plan_.forward(psi, spectrum_);
    for (std::size_t q = 0; q < n_; ++q) spectrum_[q] *= kinetic_[q];
    plan_.backward(spectrum_, psi);
    if (!gauge_out_.empty())
      for (std::size_t j = 0; j < n_; ++j) psi[j] *= gauge_out_[j];
  }

  void step(std::vector<cplx>& psi, double t) {
    kick(psi, t);
    drift(psi);
    kick(psi, t + dt_);
  }

  /// True when the pulse can be nonzero anywhere in [t, t + dt].
  bool pulse_active(double t) const noexcept {
    return pulse_ && t + dt_ > pulse_->support_begin() && t < pulse_->support_end();
  }

  double mass_in_zone(const std::vector<cplx>& psi) const noexcept {
    double s = 0.0;
    for (std::size_t j = zone_lo_; j < zone_hi_; ++j) s += std::norm(psi[j]);
    return s * g_.dx();
  }

  /// <p - A>, computed as <p> of e^{-i L} psi.
  double mechanical_momentum(const std::vector<cplx>& psi) {
    if (!gauge_in_.empty()) {
      for (std::size_t j = 0; j < n_; ++j) scratch_[j] = psi[j] * gauge_in_[j];
      plan_.forward(scratch_, spectrum_);
    } else {
      plan_.forward(psi, spectrum_);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < n_; ++q) {
      const double m = q < n_ / 2 ? static_cast<double>(q) : static_cast<double>(q) - n_;
      const double w = std::norm(spectrum_[q]);
      num += m * g_.dk() * w;
      den += w;
    }
    return num / den;
  }

  const SpatialGrid& grid() const noexcept { return g_; }
  bool has_zone() const noexcept { return zone_hi_ > zone_lo_; }

 private:
  SpatialGrid g_;
  std::optional<InteractionModel> model_;
  double dt_;
  std::size_t n_;
  const FftPlan& plan_;
  std::vector<cplx> kinetic_, scratch_, spectrum_;
  std::vector<cplx> static_kick_, gauge_in_, gauge_out_;
  std::optional<PulseSchedule> pulse_;
  double pulse_amp_ = 0.0;
  std::size_t zone_lo_ = 0, zone_hi_ = 0;
};

// <x> of the k > 0 component and its probability.
inline std::pair<double, double> forward_component_position(const WaveFunction& psi) {
  const auto chi = to_momentum(psi);
  const auto& g = chi.grid();
  std::vector<cplx> fwd(chi.values().begin(), chi.values().end());
  for (std::size_t m = 0; m < fwd.size(); ++m)
    if (g.k(m) <= 0.0) fwd[m] = 0.0;
  const MomentumSpectrum fwd_spec(g, std::move(fwd), chi.time());
  const double p = fwd_spec.norm_squared() / chi.norm_squared();
  if (!(p > 0.0)) return {0.0, 0.0};
  return {expectation(to_position(fwd_spec), Observable::position), p};
}

}  // namespace detail

/// Evolves psi0 from schedule.t_start to schedule.t_end under `model` (free
/// motion when empty), recording an Ehrenfest trace.
///
/// Throws PhysicsViolation if the norm drifts, if the packet reaches the grid
/// ends, or if a pulse is on while packet mass sits outside the zone. With
/// `require_complete`, also throws when the run ends before the interaction
/// is done with the packet: transmitted past the zone for static zones, zone
/// emptied for reflective slabs, pulse over for pulsed models.
inline PropagationResult propagate(const WaveFunction& psi0,
                                   const std::optional<InteractionModel>& model,
                                   const Schedule& schedule, const PropagateOptions& opt = {}) {
  const auto& g = psi0.grid();
  if (model) validate(*model);
  validate(schedule, g, model, opt.check_guards);

  detail::Stepper stepper(g, model, schedule.dt);
  std::vector<cplx> psi(psi0.amplitudes().begin(), psi0.amplitudes().end());
  const std::size_t n_steps = schedule.steps();
  const double norm0 = psi0.norm_squared();

  EhrenfestTrace trace;
  auto record = [&](std::size_t step, double t) {
    const WaveFunction state(g, psi, t);
    const double nrm = state.norm_squared();
    if (std::abs(nrm - norm0) > opt.norm_tolerance)
      throw PhysicsViolation("norm drift " + num(std::abs(nrm - norm0)) +
                                 " exceeds tolerance (unstable step)",
                             step, t);
    trace.times.push_back(t);
    trace.mean_x.push_back(expectation(state, Observable::position));
    trace.mean_p.push_back(stepper.mechanical_momentum(psi));
    trace.mean_F.push_back(model ? mean_force(state, *model, t) : 0.0);
    trace.norm.push_back(nrm);
    trace.zone_containment.push_back(stepper.has_zone() ? stepper.mass_in_zone(psi) / nrm : 0.0);
    const auto [fx, fp] = detail::forward_component_position(state);
    trace.forward_mean_x.push_back(fx);
    trace.forward_probability.push_back(fp);
  };
  auto check_boundary = [&](std::size_t step, double t) {
    double peak = 0.0;
    for (const auto& a : psi) peak = std::max(peak, std::norm(a));
    const double edge = std::max(std::norm(psi.front()), std::norm(psi.back()));
    const double tol = opt.boundary_tolerance * opt.boundary_tolerance;
    if (edge > tol * peak)
      throw PhysicsViolation("packet reached the grid boundary", step, t);
  };

  record(0, schedule.t_start);
  for (std::size_t s = 0; s < n_steps; ++s) {
    const double t = schedule.t_start + static_cast<double>(s) * schedule.dt;
    if (opt.enforce_containment && stepper.pulse_active(t)) {
      double total = 0.0;
      for (const auto& a : psi) total += std::norm(a);
      const double outside = total * g.dx() - stepper.mass_in_zone(psi);
      if (outside > opt.containment_tolerance)
        throw PhysicsViolation("idealization violated: pulse active while packet mass " +
                                   num(outside) + " lies outside the zone",
                               s, t);
    }
    stepper.step(psi, t);
    check_boundary(s + 1, t + schedule.dt);
    if ((s + 1) % schedule.record_every == 0 || s + 1 == n_steps)
      record(s + 1, schedule.t_start + static_cast<double>(s + 1) * schedule.dt);
  }

  WaveFunction final_state(g, std::move(psi), schedule.t_end);

  if (model && opt.require_complete) {
    const auto& zone = zone_of(*model);
    const double total = final_state.norm_squared();
    if (auto p = pulse_of(*model)) {
      if (schedule.t_end < p->support_end())
        throw PreconditionError("run ends before the pulse has switched off");
    } else if (is_reflective(*model)) {
      const double inside = final_state.probability_in(zone.start, zone.end()) / total;
      if (inside >= 1e-8)
        throw PreconditionError("run ends with " + num(inside) +
                                " of the packet still inside the slab zone");
    } else {
      const double beyond =
          final_state.probability_in(zone.end(), g.x_max()) / total;
      if (beyond < 1.0 - 1e-8)
        throw PreconditionError("run ends before transmission is complete (mass beyond zone " +
                                num(beyond) + ")");
    }
  }
  return {std::move(final_state), std::move(trace)};
}

}  // namespace phaselab
