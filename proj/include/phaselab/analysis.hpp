#pragma once

// Phase-shift extraction from simulated states and the checks built on it:
// dispersivity of delta(k) and the identity
//
//   <x>_T = <x>_0 + <v>_0 T - \int |chi(k)|^2 d delta/dk dk
//
// which holds for every transmission-complete run, dispersive or not. The
// minus sign comes from x -> i d/dk acting on e^{i delta(k)}: a phase that
// grows with k (a slow, repulsive region) leaves the packet behind.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "phaselab/core.hpp"
#include "phaselab/curve.hpp"
#include "phaselab/propagator.hpp"

namespace phaselab {

struct ExtractOptions {
  /// Band = contiguous k > 0 region around the spectral peak with
  /// |chi_in|^2 above this fraction of its maximum.
  double relative_threshold = 1e-6;
  double jump_limit = 0.5 * std::numbers::pi;
};

/// delta(k) = arg[chi_out(k) e^{+i k^2 T / 2} / chi_in(k)] over the band,
/// T the time elapsed between the two states. The curve weight is the output
/// spectral density |chi_out|^2, which for lossless runs equals |chi_in|^2
/// and for reflective ones is the transmitted weight.
inline PhaseShiftCurve extract_phase(const MomentumSpectrum& chi_in, const WaveFunction& psi_T,
                                     const ExtractOptions& opt = {}) {
  if (!(chi_in.grid() == psi_T.grid()))
    throw PreconditionError("extract_phase: input spectrum and final state use different grids");
  const auto chi_out = to_momentum(psi_T);
  const auto& g = chi_in.grid();
  const double T = psi_T.time() - chi_in.time();
  const auto in = chi_in.values();
  const auto out = chi_out.values();

  std::size_t peak = 0;
  double peak_w = 0.0;
  for (std::size_t m = 0; m < in.size(); ++m) {
    if (g.k(m) > 0.0 && std::norm(in[m]) > peak_w) {
      peak_w = std::norm(in[m]);
      peak = m;
    }
  }
  if (!(peak_w > 0.0)) throw AnalysisError("extract_phase: input spectrum has no k > 0 amplitude");
  const double floor = opt.relative_threshold * peak_w;
  std::size_t lo = peak, hi = peak;
  while (lo > 0 && g.k(lo - 1) > 0.0 && std::norm(in[lo - 1]) > floor) --lo;
  while (hi + 1 < in.size() && std::norm(in[hi + 1]) > floor) ++hi;
  if (hi - lo < 2) throw AnalysisError("extract_phase: band amplitude below threshold");

  PhaseShiftCurve c;
  std::vector<double> raw;
  for (std::size_t m = lo; m <= hi; ++m) {
    const double k = g.k(m);
    if (!(std::norm(out[m]) > 0.0))
      throw AnalysisError("extract_phase: output amplitude vanishes at k = " + num(k));
    c.k.push_back(k);
    raw.push_back(std::arg(out[m] * std::conj(in[m]) * std::polar(1.0, 0.5 * k * k * T)));
    c.weight.push_back(std::norm(out[m]));
  }
  c.delta = unwrap_from(raw, raw.size() / 2, opt.jump_limit);
  c.d_delta_dk = finite_difference_slope(c.k, c.delta);
  c.k_lo = c.k.front();
  c.k_hi = c.k.back();
  return c;
}

enum class Verdict { nondispersive, dispersive };

inline const char* to_string(Verdict v) {
  return v == Verdict::nondispersive ? "nondispersive" : "dispersive";
}

struct DispersivityReport {
  double max_abs_slope = 0.0;
  /// \int w d delta/dk dk / \int w dk; the packet lags free motion by this
  /// much.
  double weighted_mean_slope = 0.0;
  double mean_delta = 0.0;
  double epsilon = 0.0;
  Verdict verdict = Verdict::nondispersive;
};

inline DispersivityReport dispersivity(const PhaseShiftCurve& curve, double epsilon) {
  DispersivityReport r;
  r.epsilon = epsilon;
  double wsum = 0.0, slope = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    r.max_abs_slope = std::max(r.max_abs_slope, std::abs(curve.d_delta_dk[i]));
    const double w = curve.weight.empty() ? 1.0 : curve.weight[i];
    wsum += w;
    slope += w * curve.d_delta_dk[i];
    mean += w * curve.delta[i];
  }
  if (wsum > 0.0) {
    r.weighted_mean_slope = slope / wsum;
    r.mean_delta = mean / wsum;
  }
  r.verdict = r.max_abs_slope < epsilon ? Verdict::nondispersive : Verdict::dispersive;
  return r;
}

/// Default dispersivity tolerance for a zone of length l.
inline double default_epsilon(double zone_length) { return 1e-3 * zone_length; }

struct TransmittedComponent {
  WaveFunction state;  // k > 0 part, renormalized
  double probability = 0.0;
};

/// Post-selects the forward-moving (transmitted) part of a state that has
/// left the interaction zone.
inline TransmittedComponent transmitted_component(const WaveFunction& psi) {
  const auto chi = to_momentum(psi);
  const auto& g = chi.grid();
  std::vector<cplx> fwd(chi.values().begin(), chi.values().end());
  for (std::size_t m = 0; m < fwd.size(); ++m)
    if (g.k(m) <= 0.0) fwd[m] = 0.0;
  MomentumSpectrum spec(g, std::move(fwd), chi.time());
  const double p = spec.norm_squared() / chi.norm_squared();
  if (!(p > 0.0)) throw AnalysisError("transmitted_component: nothing is transmitted");
  return {to_position(spec).normalized(), p};
}

struct EhrenfestResidual {
  double displacement = 0.0;  // <x>_T - <x>_0 - <v>_0 T
  double slope_term = 0.0;    // \int w d delta/dk
  double residual = 0.0;      // displacement + slope_term
};

/// Evaluates the displacement identity for a finished run.
///
/// When the run reflects part of the packet, the transmitted component is
/// compared with the matching filtered initial state: |chi_in| is reweighted
/// to the curve's transmitted weight, and <x>_0, <v>_0 are taken from that
/// state. For lossless runs this reduces to the plain identity.
inline EhrenfestResidual ehrenfest_residual(const EhrenfestTrace& trace,
                                            const PhaseShiftCurve& curve,
                                            const MomentumSpectrum& chi_in) {
  if (trace.size() < 2) throw PreconditionError("ehrenfest_residual: incomplete trace");
  if (curve.size() < 3) throw PreconditionError("ehrenfest_residual: empty phase curve");
  const double T = trace.times.back() - trace.times.front();
  const auto& g = chi_in.grid();
  const auto in = chi_in.values();

  std::vector<cplx> filtered(in.size(), cplx{});
  double wsum = 0.0, vsum = 0.0, ssum = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const std::size_t m = g.nearest_k_index(curve.k[i]);
    const double w = curve.weight[i];
    const double a = std::abs(in[m]);
    if (a > 0.0) filtered[m] = in[m] * (std::sqrt(w) / a);
    wsum += w;
    vsum += w * curve.k[i];
    ssum += w * curve.d_delta_dk[i];
  }
  const auto psi_sel = to_position(MomentumSpectrum(g, std::move(filtered), chi_in.time()));
  const double x0 = expectation(psi_sel, Observable::position);
  const double v0 = vsum / wsum;

  EhrenfestResidual r;
  r.displacement = trace.forward_mean_x.back() - x0 - v0 * T;
  r.slope_term = ssum / wsum;
  r.residual = r.displacement + r.slope_term;
  return r;
}

/// <x>_T - <x>_0 - <p>_0 T straight from the trace; zero for force-free runs.
inline double free_displacement(const EhrenfestTrace& trace) {
  const double T = trace.times.back() - trace.times.front();
  return trace.mean_x.back() - trace.mean_x.front() - trace.mean_p.front() * T;
}

/// Probability in k < 0.
inline double negative_momentum_probability(const WaveFunction& psi) {
  const auto chi = to_momentum(psi);
  const auto& g = chi.grid();
  const auto c = chi.values();
  double s = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m)
    if (g.k(m) < 0.0) s += std::norm(c[m]);
  return s * g.dk() / chi.norm_squared();
}

}  // namespace phaselab
