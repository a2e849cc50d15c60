#pragma once

// Exact stationary scattering by 2x2 transfer matrices for stacks of
// uniform segments, each described by an index of refraction eta(k) so that
// the interior wavenumber is eta(k) k. Independent of the time-dependent
// propagator; serves as its ground truth for static slabs.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "phaselab/curve.hpp"
#include "phaselab/errors.hpp"
#include "phaselab/interactions.hpp"

namespace phaselab::oracle {

using cplx = std::complex<double>;

struct Segment {
  double width = 1.0;
  std::function<double(double)> eta = [](double) { return 1.0; };

  /// Constant potential V0: eta(k) = sqrt(1 - 2 V0 / k^2).
  static Segment uniform(double width, double V0) {
    return {width, [V0](double k) { return std::sqrt(1.0 - 2.0 * V0 / (k * k)); }};
  }
  static Segment vacuum(double width) { return {width, [](double) { return 1.0; }}; }
};

struct ScatteringAmplitudes {
  cplx t{1.0, 0.0};
  cplx r{0.0, 0.0};
  /// arg t; with psi = t e^{ikx} to the right of the stack this is the phase
  /// relative to free propagation over the same length.
  double delta = 0.0;
  double reflectance = 0.0;    // |r|^2
  double transmittance = 1.0;  // |t|^2
};

/// 2x2 complex matrix, row-major.
using Matrix2 = std::array<cplx, 4>;

inline Matrix2 multiply(const Matrix2& a, const Matrix2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

/// Plane-wave transfer matrix of a stack whose left face sits at `offset`.
/// Maps (A, B) of A e^{ikx} + B e^{-ikx} on the left to the same on the right,
/// with x absolute.
inline Matrix2 transfer_matrix(const std::vector<Segment>& segments, double k,
                               double offset = 0.0) {
  if (!(k > 0.0)) throw PreconditionError("oracle: k must be positive");
  // (psi, psi') across the stack: product of real propagation matrices.
  double m00 = 1.0, m01 = 0.0, m10 = 0.0, m11 = 1.0;
  double width = 0.0;
  for (const auto& s : segments) {
    if (!(s.width > 0.0)) throw PreconditionError("oracle: segment width must be positive");
    const double eta = s.eta(k);
    if (!(eta > 0.0))
      throw PreconditionError("oracle: eta <= 0 (or undefined) at k = " + num(k));
    const double q = eta * k;
    const double c = std::cos(q * s.width), sn = std::sin(q * s.width);
    const double a00 = c, a01 = sn / q, a10 = -q * sn, a11 = c;
    const double n00 = a00 * m00 + a01 * m10, n01 = a00 * m01 + a01 * m11;
    const double n10 = a10 * m00 + a11 * m10, n11 = a10 * m01 + a11 * m11;
    m00 = n00, m01 = n01, m10 = n10, m11 = n11;
    width += s.width;
  }
  // (psi, psi')(x) = S(x) (A, B),  S(x) = [[e, 1/e], [ik e, -ik / e]],  e = e^{ikx}.
  const cplx I(0.0, 1.0);
  const cplx el = std::polar(1.0, k * offset);
  const cplx er = std::polar(1.0, k * (offset + width));
  const Matrix2 s_left{el, 1.0 / el, I * k * el, -I * k / el};
  // S^{-1}(x) = 1/(-2ik) [[-ik/e, -1/e], [-ik e, e]]
  const cplx d = -2.0 * I * k;
  const Matrix2 s_right_inv{(-I * k / er) / d, (-1.0 / er) / d, (-I * k * er) / d, er / d};
  const Matrix2 m{m00, m01, m10, m11};
  return multiply(s_right_inv, multiply(m, s_left));
}

/// Amplitudes for incidence from the left from a plane-wave transfer matrix.
inline ScatteringAmplitudes amplitudes_from(const Matrix2& p) {
  ScatteringAmplitudes a;
  a.t = 1.0 / p[3];
  a.r = -p[2] / p[3];
  a.delta = std::arg(a.t);
  a.reflectance = std::norm(a.r);
  a.transmittance = std::norm(a.t);
  return a;
}

inline ScatteringAmplitudes scatter(const std::vector<Segment>& segments, double k) {
  return amplitudes_from(transfer_matrix(segments, k));
}

/// Eikonal (no-reflection) phase: sum of k w (eta - 1) over segments.
inline double eikonal_phase(const std::vector<Segment>& segments, double k) {
  double d = 0.0;
  for (const auto& s : segments) d += k * s.width * (s.eta(k) - 1.0);
  return d;
}

struct OracleSweep {
  PhaseShiftCurve curve;  // exact delta(k); weights set to 1
  std::vector<double> reflectance;
  std::vector<double> transmittance;
};

namespace detail {
inline std::vector<double> band_samples(double k_lo, double k_hi, std::size_t n) {
  if (n < 16) throw PreconditionError("oracle sweep needs at least 16 samples");
  if (!(k_hi > k_lo) || !(k_lo > 0.0)) throw PreconditionError("oracle sweep: invalid band");
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i)
    k[i] = k_lo + (k_hi - k_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return k;
}

inline PhaseShiftCurve finish_curve(std::vector<double> k, const std::vector<double>& raw) {
  PhaseShiftCurve c;
  c.delta = unwrap_from(raw, raw.size() / 2);
  c.d_delta_dk = finite_difference_slope(k, c.delta);
  c.weight.assign(k.size(), 1.0);
  c.k_lo = k.front();
  c.k_hi = k.back();
  c.k = std::move(k);
  return c;
}
}  // namespace detail

/// Exact delta(k), R(k), T(k) on n uniform samples of [k_lo, k_hi].
inline OracleSweep sweep(const std::vector<Segment>& segments, double k_lo, double k_hi,
                         std::size_t n) {
  auto k = detail::band_samples(k_lo, k_hi, n);
  OracleSweep out;
  std::vector<double> raw;
  for (double kv : k) {
    const auto a = scatter(segments, kv);
    raw.push_back(a.delta);
    out.reflectance.push_back(a.reflectance);
    out.transmittance.push_back(a.transmittance);
  }
  out.curve = detail::finish_curve(std::move(k), raw);
  return out;
}

/// Eikonal delta(k) on the same sampling as `sweep`.
inline PhaseShiftCurve eikonal_sweep(const std::vector<Segment>& segments, double k_lo,
                                     double k_hi, std::size_t n) {
  auto k = detail::band_samples(k_lo, k_hi, n);
  PhaseShiftCurve c;
  c.delta.reserve(n);
  for (double kv : k) c.delta.push_back(eikonal_phase(segments, kv));
  c.d_delta_dk = finite_difference_slope(k, c.delta);
  c.weight.assign(k.size(), 1.0);
  c.k_lo = k.front();
  c.k_hi = k.back();
  c.k = std::move(k);
  return c;
}

/// Segment stack of a static model. Time-dependent and gauge-coupled models
/// have no stationary description here.
inline std::vector<Segment> segments_of(const InteractionModel& model) {
  std::vector<Segment> out;
  if (const auto* s = std::get_if<StaticSlab>(&model)) {
    out.push_back(Segment::uniform(s->thickness, s->V0));
    if (s->zone.length > s->thickness) out.push_back(Segment::vacuum(s->zone.length - s->thickness));
    return out;
  }
  if (const auto* s = std::get_if<NondispersiveSlab>(&model)) {
    const double b = s->thickness, d0 = s->delta0;
    out.push_back({b, [b, d0](double k) { return 1.0 + d0 / (k * b); }});
    if (s->zone.length > b) out.push_back(Segment::vacuum(s->zone.length - b));
    return out;
  }
  throw PreconditionError("oracle handles static slabs only, not " +
                          std::string(model_name(model)));
}

/// Segments of the potential a time-domain run actually simulates. Equal to
/// segments_of except for NondispersiveSlab, whose run holds the fixed height
/// potential_at(k_ref) and so matches the designed eta(k) only at k_ref.
inline std::vector<Segment> realized_segments(const InteractionModel& model) {
  if (const auto* s = std::get_if<NondispersiveSlab>(&model))
    return segments_of(StaticSlab{s->zone, s->thickness, s->height()});
  return segments_of(model);
}

}  // namespace phaselab::oracle
