#pragma once

// Automatic sizing of a run: packet start, pulse timing, zone length for
// pulsed models, grid and schedule. The rules are Gaussian-tail bounds on
// the packet width sigma(t) = sqrt(sigma_x0^2 + sigma_k^2 t^2):
//
//   containment  7.5 sigma  (tail at the zone edges while a pulse is on; the
//                           edge kicks that tail and the kicked part must
//                           stay under the boundary guard)
//   transmission 6   sigma  (mass still short of the zone end at t_end;
//                           7 for gauge-coupled models, whose profile mixes
//                           slow in-zone parts into the band's lower edge)
//   boundary     10  sigma  (|psi| at the grid ends relative to the peak)

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "phaselab/core.hpp"
#include "phaselab/errors.hpp"
#include "phaselab/interactions.hpp"
#include "phaselab/propagator.hpp"

namespace phaselab {

struct ArmRequest {
  InteractionModel model;
  /// Pulsed models: zone length chosen to contain the packet for the whole
  /// pulse, rounded up to a multiple of 5.
  bool auto_zone_length = false;
  /// Pulsed models: pulse shifted to start as soon as the packet is inside
  /// the zone. The model's pulse is read as t_on = 0, t_off = duration.
  bool auto_pulse_start = false;
};

struct PlanRequest {
  double k0 = 5.0;
  double sigma_k = 0.5;
  std::vector<ArmRequest> arms;  // free arms are left out

  std::optional<double> x0;
  std::optional<std::size_t> n;
  std::optional<double> x_min;
  std::optional<double> x_max;
  std::optional<double> t_end;
  std::optional<double> dt;
  std::optional<std::size_t> record_every;

  /// Added to sigma(t) in every bound; room for non-Gaussian packets.
  double extra_width = 0.0;
  std::size_t max_points = 2048;
};

struct Plan {
  SpatialGrid grid;
  GaussianPacketSpec packet;
  std::vector<InteractionModel> models;
  Schedule schedule;
};

namespace layout {

inline constexpr double containment_z = 7.5;
inline constexpr double transmission_z = 6.0;
inline constexpr double gauge_transmission_z = 7.0;
inline constexpr double boundary_z = 10.0;

// Smallest t >= 0 with f(t) >= 0 for f increasing past its root.
template <class F>
double first_root(F f, const char* what) {
  if (f(0.0) >= 0.0) return 0.0;
  double hi = 1.0;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e5) throw PreconditionError(what);
  }
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-10 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) >= 0.0 ? hi : lo) = mid;
  }
  return hi;
}

inline std::optional<double> slab_thickness(const InteractionModel& m) {
  if (const auto* s = std::get_if<StaticSlab>(&m)) return s->thickness;
  if (const auto* s = std::get_if<NondispersiveSlab>(&m)) return s->thickness;
  return std::nullopt;
}

// Height of the static potential a slab realizes in a dynamical run.
inline double slab_height(const InteractionModel& m) {
  if (const auto* s = std::get_if<StaticSlab>(&m)) return s->V0;
  return std::get<NondispersiveSlab>(m).height();
}

inline PulseSchedule& pulse_ref(InteractionModel& m) {
  return std::visit(
      [](auto& v) -> PulseSchedule& {
        if constexpr (requires { v.pulse; }) return v.pulse;
        else throw PreconditionError("model has no pulse");
      },
      m);
}

inline InteractionZone& zone_ref(InteractionModel& m) {
  return std::visit([](auto& v) -> InteractionZone& { return v.zone; }, m);
}

}  // namespace layout

/// Resolves every automatic quantity of a run. Throws PreconditionError when
/// no layout within `max_points` grid points satisfies the bounds, or when
/// explicit overrides contradict them.
inline Plan plan_run(const PlanRequest& req) {
  using namespace layout;
  if (!(req.sigma_k > 0.0) || !(req.k0 > 0.0))
    throw PreconditionError("packet: k0 and sigma_k must be positive");
  if (!(req.k0 - 5.0 * req.sigma_k > 0.0))
    throw PreconditionError("packet: k0 - 5 sigma_k must be positive (no k <= 0 content)");
  const double sx0 = 0.5 / req.sigma_k;
  const double k0 = req.k0;
  auto spread = [&](double t) {
    return std::sqrt(sx0 * sx0 + req.sigma_k * req.sigma_k * t * t) + req.extra_width;
  };

  double first_start = 0.0;
  for (std::size_t i = 0; i < req.arms.size(); ++i)
    first_start = i == 0 ? zone_of(req.arms[i].model).start
                         : std::min(first_start, zone_of(req.arms[i].model).start);
  const double x0 = req.x0.value_or(first_start - 7.0 * spread(0.0) - 1.0);
  auto centre = [&](double t) { return x0 + k0 * t; };

  // Interaction timing and the earliest admissible end time.
  std::vector<InteractionModel> models;
  double t_needed = 0.0;
  double mirror_extent = 0.0;  // furthest excursion of a reflected part left of a face
  bool reflective = false;
  for (const auto& arm : req.arms) {
    InteractionModel m = arm.model;
    validate(m);
    const InteractionZone zone = zone_of(m);
    if (pulse_of(m)) {
      auto& p = layout::pulse_ref(m);
      if (arm.auto_pulse_start) {
        const double d = p.t_off - p.t_on;
        PulseSchedule shape = p;
        shape.t_on = 0.0;
        shape.t_off = d;
        const double half_ramp = 0.5 * shape.ramp_time();
        const double ts = layout::first_root(
            [&](double t) { return centre(t) - containment_z * spread(t) - zone.start; },
            ("layout: packet too broad to be contained (needs k0 > " + num(containment_z) +
             " sigma_k)").c_str());
        p.t_on = ts + half_ramp;
        p.t_off = p.t_on + d;
      }
      const double tb = p.support_begin();
      const double te = p.support_end();
      if (tb < 0.0) throw PreconditionError("pulse starts before t = 0");
      if (arm.auto_zone_length) {
        const double need = centre(te) + containment_z * spread(te) - zone.start;
        layout::zone_ref(m).length = 5.0 * std::ceil(need / 5.0);
      }
      const InteractionZone& z = zone_of(m);
      if (centre(tb) - containment_z * spread(tb) < z.start ||
          centre(te) + containment_z * spread(te) > z.end())
        throw PreconditionError(std::string(model_name(m)) +
                                ": packet is not contained in the zone while the pulse is on");
      t_needed = std::max(t_needed, te);
    } else {
      double lag = 0.0;
      if (is_reflective(m)) {
        reflective = true;
        const double v = layout::slab_height(m);
        const double k_lo = k0 - 5.0 * req.sigma_k;
        if (!(k_lo * k_lo > 2.0 * v))
          throw PreconditionError(std::string(model_name(m)) +
                                  ": packet band reaches k^2 <= 2 V (tunnelling regime)");
        const double b = *layout::slab_thickness(m);
        lag = b * (1.0 / std::sqrt(1.0 - 2.0 * v / (k_lo * k_lo)) - 1.0) + 1.0;
      }
      if (centre(0.0) + transmission_z * spread(0.0) > zone.start)
        throw PreconditionError(std::string(model_name(m)) +
                                ": packet overlaps the zone at t = 0");
      const double z = is_gauge_coupled(m) ? gauge_transmission_z : transmission_z;
      const double t = layout::first_root(
          [&](double t) { return centre(t) - z * spread(t) - lag - zone.end(); },
          "layout: packet never clears the zone");
      t_needed = std::max(t_needed, t);
    }
    models.push_back(std::move(m));
  }
  if (req.arms.empty()) t_needed = 2.0 * std::abs(x0) / k0;

  double T = 0.5 * std::ceil(t_needed / 0.5);
  if (req.t_end) {
    if (*req.t_end < t_needed - 1e-12)
      throw PreconditionError("schedule.t_end = " + num(*req.t_end) +
                              " ends before the interaction is complete (needs >= " +
                              num(t_needed) + ")");
    T = *req.t_end;
  }

  // Spatial extent.
  double left = x0 - boundary_z * spread(0.0);
  const double right = centre(T) + boundary_z * spread(T);
  if (reflective) {
    for (const auto& m : models)
      if (is_reflective(m)) {
        const double face = zone_of(m).start;
        mirror_extent = std::max(mirror_extent, centre(T) - face);
        left = std::min(left, face - mirror_extent - boundary_z * spread(T));
      }
  }

  // Resolution: k_max covers 2x (3x for sharp slabs) the packet's reach.
  std::optional<double> slab_b;
  std::optional<double> slab_face;
  for (const auto& m : models)
    if (auto b = layout::slab_thickness(m); b && !slab_b) {
      slab_b = b;
      slab_face = zone_of(m).start;
    }
  const double k_req = (slab_b ? 3.0 : 2.0) * (k0 + 10.0 * req.sigma_k);
  double dx = std::numbers::pi / k_req;
  // Sharp slab edges ring across the whole box; at dx <= 0.1 the ringing
  // stays under the boundary guard.
  if (slab_b) dx = *slab_b / std::ceil(*slab_b / std::min(dx, 0.1));

  double x_min, x_max;
  std::size_t n;
  if (req.x_min && req.x_max) {
    x_min = *req.x_min;
    x_max = *req.x_max;
    if (req.n) {
      n = *req.n;
    } else {
      n = std::max<std::size_t>(256, std::bit_ceil(static_cast<std::size_t>(
                                          std::ceil((x_max - x_min) / dx))));
    }
  } else {
    if (req.x_min || req.x_max)
      throw PreconditionError("grid: give both x_min and x_max, or neither");
    if (req.n) {
      n = *req.n;
      dx = (right - left) / static_cast<double>(n);
      if (dx * k_req > std::numbers::pi * (1.0 + 1e-12))
        throw PreconditionError("grid: n = " + std::to_string(n) +
                                " under-resolves the packet (needs dx <= " +
                                num(std::numbers::pi / k_req) + ")");
      x_min = left;
      x_max = right;
    } else {
      const auto cells = static_cast<std::size_t>(std::ceil((right - left) / dx)) + 2;
      n = std::max<std::size_t>(256, std::bit_ceil(cells));
      const double pad = static_cast<double>(n) * dx - (right - left);
      x_min = left - 0.5 * pad;
      if (slab_face) {
        // Put the slab faces halfway between samples.
        const double j = std::round((*slab_face - x_min) / dx - 0.5);
        x_min = *slab_face - (j + 0.5) * dx;
      }
      x_max = x_min + static_cast<double>(n) * dx;
    }
  }
  if (n > req.max_points && !req.n)
    throw PreconditionError("layout needs " + std::to_string(n) + " grid points (limit " +
                            std::to_string(req.max_points) + "); narrow the packet or the zone");
  const auto grid = make_grid(x_min, x_max, n);

  // Time step: stability guards with 10% headroom, and an integer step count.
  double vmax = 0.0;
  for (const auto& m : models) vmax = std::max(vmax, max_abs_potential(m));
  const double km = grid.k_max();
  double dt_max = 0.9 / (km * km);
  if (vmax > 0.0) dt_max = std::min(dt_max, 0.09 / vmax);
  Schedule s;
  s.t_start = 0.0;
  if (req.dt) {
    s.dt = *req.dt;
    if (!req.t_end) T = s.dt * std::ceil(T / s.dt - 1e-9);
  } else {
    s.dt = T / std::ceil(T / dt_max);
  }
  s.t_end = T;
  s.record_every =
      req.record_every.value_or(std::max<std::size_t>(1, static_cast<std::size_t>(0.02 / s.dt)));

  return {grid, {x0, k0, req.sigma_k}, std::move(models), s};
}

}  // namespace phaselab
