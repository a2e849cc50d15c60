#pragma once

// Interaction-zone models. Each model is a plain value carrying its zone and
// parameters; free functions give its dynamical ingredients (local potential,
// momentum coupling, gauge profile) and its closed-form phase prediction.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "phaselab/core.hpp"

namespace phaselab {

/// The region [start, start + length] outside of which V vanishes.
struct InteractionZone {
  double start = 0.0;
  double length = 10.0;

  double end() const noexcept { return start + length; }
  bool contains(double x) const noexcept { return x >= start && x <= end(); }
};

enum class Envelope { rectangular, smooth };

/// Time window during which a pulsed interaction is switched on.
///
/// The smooth envelope uses raised-cosine ramps of width `ramp` centred on
/// t_on and t_off, so that the envelope integrates to t_off - t_on for either
/// shape. A non-positive ramp selects the default 0.1 (t_off - t_on).
struct PulseSchedule {
  double t_on = 0.0;
  double t_off = 1.0;
  Envelope envelope = Envelope::smooth;
  double ramp = 0.0;

  double duration() const noexcept { return t_off - t_on; }
  double ramp_time() const noexcept {
    if (envelope == Envelope::rectangular) return 0.0;
    return ramp > 0.0 ? ramp : 0.1 * duration();
  }
  /// First and last instants at which the envelope can be nonzero.
  double support_begin() const noexcept { return t_on - 0.5 * ramp_time(); }
  double support_end() const noexcept { return t_off + 0.5 * ramp_time(); }

  double value(double t) const noexcept {
    if (envelope == Envelope::rectangular) return (t >= t_on && t < t_off) ? 1.0 : 0.0;
    const double tau = ramp_time();
    auto rise = [tau](double s) {
      const double u = std::clamp(s / tau + 0.5, 0.0, 1.0);
      return 0.5 - 0.5 * std::cos(std::numbers::pi * u);
    };
    return std::min(rise(t - t_on), 1.0 - rise(t - t_off));
  }

  double integral() const noexcept { return duration(); }
};

/// Sharp slab of constant height V0 on [zone.start, zone.start + thickness].
/// Index of refraction eta(k) = sqrt(1 - 2 V0 / k^2).
struct StaticSlab {
  InteractionZone zone{0.0, 2.0};
  double thickness = 2.0;
  double V0 = 2.0;

  double eta(double k) const { return std::sqrt(1.0 - 2.0 * V0 / (k * k)); }
  double height() const noexcept { return V0; }
};

/// Slab whose index eta(k) = 1 + delta0 / (k b) makes the eikonal phase
/// k b (eta - 1) equal to delta0 at every k. Dynamical runs realize the
/// potential k^2 (1 - eta^2) / 2 at the reference wavenumber k_ref.
struct NondispersiveSlab {
  InteractionZone zone{0.0, 2.0};
  double thickness = 2.0;
  double delta0 = -0.5;
  double k_ref = 5.0;

  double eta(double k) const noexcept { return 1.0 + delta0 / (k * thickness); }
  double potential_at(double k) const noexcept {
    const double e = eta(k);
    return 0.5 * k * k * (1.0 - e * e);
  }
  double height() const noexcept { return potential_at(k_ref); }
};

/// Uniform potential V0 switched on inside the whole zone during a pulse.
struct GasCell {
  InteractionZone zone{0.0, 60.0};
  double V0 = 0.3;
  PulseSchedule pulse{};
};

/// Potential difference dphi(t) = dphi * envelope(t) (charge absorbed)
/// applied to the conducting shield around one arm.
struct ElectricAB {
  InteractionZone zone{0.0, 60.0};
  double dphi = 0.4;
  PulseSchedule pulse{};
};

/// Vector potential A(x) = (alpha / l)(1 - cos(2 pi (x - start) / l)) on the
/// zone, zero outside; \int A dx = alpha.
struct MagneticAB {
  InteractionZone zone{0.0, 10.0};
  double alpha = 1.2;
};

/// Magnetic moment in an electric field: coupling sign * kappa * p inside the
/// zone, realized in gauge-covariant form (p + sign kappa f(x))^2 / 2 with f
/// the same zone profile as MagneticAB, normalized to \int f dx = l.
struct AharonovCasher {
  InteractionZone zone{0.0, 10.0};
  double kappa = 0.08;
  int sign = +1;
};

/// Polarized moment in a pulsed uniform field: V(t) = -mu B(t) in the zone,
/// with B(t) = B * envelope(t).
struct ScalarAB {
  InteractionZone zone{0.0, 60.0};
  double B = 0.25;
  double mu = 1.0;
  PulseSchedule pulse{};
};

using InteractionModel = std::variant<StaticSlab, NondispersiveSlab, GasCell, ElectricAB,
                                      MagneticAB, AharonovCasher, ScalarAB>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline const InteractionZone& zone_of(const InteractionModel& model) {
  return std::visit([](const auto& m) -> const InteractionZone& { return m.zone; }, model);
}

inline std::string_view model_name(const InteractionModel& model) {
  return std::visit(overloaded{
                        [](const StaticSlab&) { return std::string_view("static_slab"); },
                        [](const NondispersiveSlab&) { return std::string_view("nondispersive_slab"); },
                        [](const GasCell&) { return std::string_view("gas_cell"); },
                        [](const ElectricAB&) { return std::string_view("electric_ab"); },
                        [](const MagneticAB&) { return std::string_view("magnetic_ab"); },
                        [](const AharonovCasher&) { return std::string_view("aharonov_casher"); },
                        [](const ScalarAB&) { return std::string_view("scalar_ab"); },
                    },
                    model);
}

/// The pulse of a time-dependent model, if it has one.
inline std::optional<PulseSchedule> pulse_of(const InteractionModel& model) {
  return std::visit(
      [](const auto& m) -> std::optional<PulseSchedule> {
        if constexpr (requires { m.pulse; }) return m.pulse;
        else return std::nullopt;
      },
      model);
}

/// Slabs exert forces at their faces and reflect part of the wave.
inline bool is_reflective(const InteractionModel& model) {
  return std::holds_alternative<StaticSlab>(model) ||
         std::holds_alternative<NondispersiveSlab>(model);
}

inline bool is_force_free(const InteractionModel& model) { return !is_reflective(model); }

/// True for models coupling through a vector-potential-like term.
inline bool is_gauge_coupled(const InteractionModel& model) {
  return std::holds_alternative<MagneticAB>(model) ||
         std::holds_alternative<AharonovCasher>(model);
}

namespace detail {

inline void check_zone(const InteractionZone& z) {
  if (!(z.length > 0.0)) throw PreconditionError("interaction zone length must be positive");
}

inline void check_pulse(const PulseSchedule& p) {
  if (!(p.t_on < p.t_off)) throw PreconditionError("pulse requires t_on < t_off");
  if (p.ramp_time() > p.duration())
    throw PreconditionError("pulse ramp time exceeds the pulse duration");
}

// Raised-cosine zone profile with unit mean: \int_zone f dx = length.
inline double zone_profile(const InteractionZone& z, double x) noexcept {
  if (!z.contains(x)) return 0.0;
  return 1.0 - std::cos(2.0 * std::numbers::pi * (x - z.start) / z.length);
}

}  // namespace detail

/// Throws PreconditionError when a model's own invariants fail.
inline void validate(const InteractionModel& model) {
  detail::check_zone(zone_of(model));
  std::visit(overloaded{
                 [](const StaticSlab& m) {
                   if (!(m.V0 > 0.0)) throw PreconditionError("static_slab: V0 must be positive");
                   if (!(m.thickness > 0.0) || m.thickness > m.zone.length + 1e-12)
                     throw PreconditionError("static_slab: thickness must lie in (0, zone length]");
                 },
                 [](const NondispersiveSlab& m) {
                   if (!(m.delta0 < 0.0))
                     throw PreconditionError("nondispersive_slab: delta0 must be negative");
                   if (!(m.thickness > 0.0) || m.thickness > m.zone.length + 1e-12)
                     throw PreconditionError(
                         "nondispersive_slab: thickness must lie in (0, zone length]");
                   if (!(m.eta(m.k_ref) > 0.0))
                     throw PreconditionError("nondispersive_slab: eta(k_ref) must be positive");
                 },
                 [](const GasCell& m) { detail::check_pulse(m.pulse); },
                 [](const ElectricAB& m) { detail::check_pulse(m.pulse); },
                 [](const MagneticAB&) {},
                 [](const AharonovCasher& m) {
                   if (m.sign != 1 && m.sign != -1)
                     throw PreconditionError("aharonov_casher: sign must be +1 or -1");
                 },
                 [](const ScalarAB& m) { detail::check_pulse(m.pulse); },
             },
             model);
}

/// Checks the band-dependent invariants: eta real and below one for the
/// static slab, eta positive for the designed slab.
inline void validate_band(const InteractionModel& model, double k_lo, double k_hi) {
  if (const auto* s = std::get_if<StaticSlab>(&model)) {
    if (!(k_lo * k_lo > 2.0 * s->V0))
      throw PreconditionError("static_slab: eta is imaginary on part of the band (k^2 <= 2 V0)");
  }
  if (const auto* s = std::get_if<NondispersiveSlab>(&model)) {
    if (!(s->eta(k_lo) > 0.0) || !(s->eta(k_hi) > 0.0))
      throw PreconditionError("nondispersive_slab: eta <= 0 on the band");
  }
}

/// V(x, t) for the local scalar models; zero outside the zone and outside
/// the pulse. Throws for the momentum-coupled models.
inline double local_potential(const InteractionModel& model, double x, double t) {
  return std::visit(
      overloaded{
          [x](const StaticSlab& m) {
            return (x >= m.zone.start && x <= m.zone.start + m.thickness) ? m.V0 : 0.0;
          },
          [x](const NondispersiveSlab& m) {
            return (x >= m.zone.start && x <= m.zone.start + m.thickness) ? m.height() : 0.0;
          },
          [x, t](const GasCell& m) { return m.zone.contains(x) ? m.V0 * m.pulse.value(t) : 0.0; },
          [x, t](const ElectricAB& m) {
            return m.zone.contains(x) ? m.dphi * m.pulse.value(t) : 0.0;
          },
          [x, t](const ScalarAB& m) {
            return m.zone.contains(x) ? -m.mu * m.B * m.pulse.value(t) : 0.0;
          },
          [](const MagneticAB&) -> double {
            throw PreconditionError("magnetic_ab is not a local scalar model");
          },
          [](const AharonovCasher&) -> double {
            throw PreconditionError("aharonov_casher is not a local scalar model");
          },
      },
      model);
}

/// Vector potential A(x) of the gauge-coupled models, for H = (p - A)^2 / 2.
/// Zero for every other model.
inline double gauge_potential(const InteractionModel& model, double x) {
  if (const auto* m = std::get_if<MagneticAB>(&model))
    return m->alpha / m->zone.length * detail::zone_profile(m->zone, x);
  if (const auto* m = std::get_if<AharonovCasher>(&model))
    return -m->sign * m->kappa * detail::zone_profile(m->zone, x);
  return 0.0;
}

/// Interior coupling as a function of momentum for the momentum-coupled
/// models: AC gives sign * kappa * k; MagneticAB with a uniform interior
/// gauge A = alpha / l gives the p-linear part -(alpha / l) k. Local scalar
/// models have none.
inline std::optional<std::function<double(double)>> momentum_coupling(
    const InteractionModel& model, double /*t*/) {
  if (const auto* m = std::get_if<AharonovCasher>(&model)) {
    const double c = m->sign * m->kappa;
    return [c](double k) { return c * k; };
  }
  if (const auto* m = std::get_if<MagneticAB>(&model)) {
    const double c = -m->alpha / m->zone.length;
    return [c](double k) { return c * k; };
  }
  return std::nullopt;
}

/// Closed-form (eikonal) phase shift at wavenumber k, with the convention
/// psi_out = e^{i delta} psi_free.
inline double predicted_phase(const InteractionModel& model, double k) {
  return std::visit(
      overloaded{
          [k](const StaticSlab& m) {
            if (!(k * k > 2.0 * m.V0))
              throw PreconditionError("static_slab: eta undefined at k = " + num(k));
            return k * m.thickness * (m.eta(k) - 1.0);
          },
          [k](const NondispersiveSlab& m) {
            if (!(m.eta(k) > 0.0))
              throw PreconditionError("nondispersive_slab: eta <= 0 at k = " + num(k));
            return m.delta0;
          },
          [](const GasCell& m) { return -m.V0 * m.pulse.integral(); },
          [](const ElectricAB& m) { return -m.dphi * m.pulse.integral(); },
          [](const ScalarAB& m) { return m.mu * m.B * m.pulse.integral(); },
          [](const MagneticAB& m) { return m.alpha; },
          [](const AharonovCasher& m) { return -m.sign * m.kappa * m.zone.length; },
      },
      model);
}

/// Largest |V| the model produces, used for time-step guards.
inline double max_abs_potential(const InteractionModel& model) {
  return std::visit(overloaded{
                        [](const StaticSlab& m) { return std::abs(m.V0); },
                        [](const NondispersiveSlab& m) { return std::abs(m.height()); },
                        [](const GasCell& m) { return std::abs(m.V0); },
                        [](const ElectricAB& m) { return std::abs(m.dphi); },
                        [](const ScalarAB& m) { return std::abs(m.mu * m.B); },
                        [](const MagneticAB&) { return 0.0; },
                        [](const AharonovCasher&) { return 0.0; },
                    },
                    model);
}

/// <F> = -<dV/dx> at time t, by central differences of the sampled local
/// potential. Zero for gauge-coupled models, which carry no scalar potential.
inline double mean_force(const WaveFunction& psi, const InteractionModel& model, double t) {
  if (is_gauge_coupled(model)) return 0.0;
  const auto& g = psi.grid();
  const auto a = psi.amplitudes();
  const std::size_t n = g.size();
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = local_potential(model, g.x(j), t);
  double f = 0.0, norm = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    norm += std::norm(a[j]);
    if (j == 0 || j + 1 == n) continue;
    const double dv = (v[j + 1] - v[j - 1]) / (2.0 * g.dx());
    f -= dv * std::norm(a[j]);
  }
  return f / norm;
}

}  // namespace phaselab
