#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "phaselab/errors.hpp"

namespace phaselab {

/// delta(k) sampled over a band of increasing wavenumbers, with its slope and
/// the spectral weight carried at each sample.
struct PhaseShiftCurve {
  std::vector<double> k;
  std::vector<double> delta;       // radians, unwrapped
  std::vector<double> d_delta_dk;  // length units
  std::vector<double> weight;      // |chi(k)|^2, unnormalized
  double k_lo = 0.0;
  double k_hi = 0.0;

  std::size_t size() const noexcept { return k.size(); }
};

/// Central differences inside, one-sided at the ends.
inline std::vector<double> finite_difference_slope(const std::vector<double>& x,
                                                   const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  if (n == 2) {
    d[0] = d[1] = (y[1] - y[0]) / (x[1] - x[0]);
    return d;
  }
  // second-order one-sided stencils at the ends (nonuniform spacing allowed)
  auto edge = [&](std::size_t a, std::size_t b, std::size_t c) {
    const double h1 = x[b] - x[a], h2 = x[c] - x[a];
    return (h2 * h2 * (y[b] - y[a]) - h1 * h1 * (y[c] - y[a])) / (h1 * h2 * (h2 - h1));
  };
  d.front() = edge(0, 1, 2);
  d.back() = edge(n - 1, n - 2, n - 3);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
  return d;
}

/// Unwraps principal-value phases outward from `center`. A raw step larger
/// than `jump_limit` between neighbours means the phase is undersampled and
/// raises AnalysisError.
inline std::vector<double> unwrap_from(const std::vector<double>& raw, std::size_t center,
                                       double jump_limit = 0.5 * std::numbers::pi) {
  std::vector<double> out(raw.size());
  if (raw.empty()) return out;
  auto step = [&](std::size_t from, std::size_t to) {
    double d = std::remainder(raw[to] - out[from], 2.0 * std::numbers::pi);
    if (std::abs(d) > jump_limit)
      throw AnalysisError("phase unwrap step " + num(d) + " rad at sample " +
                          std::to_string(to) + " exceeds limit (aliasing or under-resolution)");
    out[to] = out[from] + d;
  };
  out[center] = raw[center];
  for (std::size_t i = center + 1; i < raw.size(); ++i) step(i - 1, i);
  for (std::size_t i = center; i-- > 0;) step(i + 1, i);
  return out;
}

}  // namespace phaselab
