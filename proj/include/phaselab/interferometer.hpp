#pragma once

// Ideal Mach-Zehnder recombination of two independently propagated arms.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>

#include "phaselab/core.hpp"
#include "phaselab/curve.hpp"

namespace phaselab {

/// Output-port intensities of a lossless 50/50 recombiner. Equal arms send
/// everything to O. relative_phase = arg <psi1|psi2>, the phase of arm 2
/// relative to arm 1.
struct FringeResult {
  double I_O = 0.0;
  double I_H = 0.0;
  double relative_phase = 0.0;
  double visibility = 0.0;
};

inline FringeResult interfere(const WaveFunction& psi1, const WaveFunction& psi2) {
  if (!(psi1.grid() == psi2.grid()))
    throw PreconditionError("interfere: arms use different grids");
  if (std::abs(psi1.time() - psi2.time()) > 1e-9)
    throw PreconditionError("interfere: arms are at different times");
  const auto a = psi1.amplitudes();
  const auto b = psi2.amplitudes();
  const double dx = psi1.grid().dx();
  cplx overlap{};
  double n1 = 0.0, n2 = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    overlap += std::conj(a[j]) * b[j];
    n1 += std::norm(a[j]);
    n2 += std::norm(b[j]);
  }
  overlap *= dx;
  n1 *= dx;
  n2 *= dx;
  FringeResult f;
  const double total = n1 + n2;
  f.I_O = (total + 2.0 * overlap.real()) / (2.0 * total);
  f.I_H = (total - 2.0 * overlap.real()) / (2.0 * total);
  f.relative_phase = std::arg(overlap);
  f.visibility = std::abs(overlap) / std::sqrt(n1 * n2);
  return f;
}

struct SpectralFringe {
  double phase = 0.0;
  double visibility = 0.0;
};

/// arg and modulus of \int |chi|^2 e^{i delta(k)} dk / \int |chi|^2 dk over
/// the curve's band: the fringe phase and contrast an arm with this delta(k)
/// shows against a free arm. Requires the band to hold all but 1e-6 of the
/// spectrum's probability.
inline SpectralFringe visibility_prediction(const PhaseShiftCurve& curve,
                                            const MomentumSpectrum& chi) {
  const auto& g = chi.grid();
  const auto c = chi.values();
  cplx sum{};
  double inside = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const std::size_t m = g.nearest_k_index(curve.k[i]);
    if (std::abs(g.k(m) - curve.k[i]) > 1e-9 * std::max(1.0, std::abs(curve.k[i])))
      throw PreconditionError("visibility_prediction: curve is not sampled on the spectrum grid");
    const double w = std::norm(c[m]);
    sum += w * std::polar(1.0, curve.delta[i]);
    inside += w;
  }
  double total = 0.0;
  for (const auto& v : c) total += std::norm(v);
  if (!(total > 0.0) || (total - inside) / total > 1e-6)
    throw PreconditionError("visibility_prediction: band coverage insufficient (" +
                            num((total - inside) / std::max(total, 1e-300)) +
                            " of the spectrum lies outside)");
  return {std::arg(sum), std::abs(sum) / inside};
}

}  // namespace phaselab
