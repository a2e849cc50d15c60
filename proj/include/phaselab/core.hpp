#pragma once

// Grids, wave functions, momentum spectra and the transform between them.
//
// Units are natural throughout: hbar = m = 1, so omega(k) = k^2 / 2 and the
// group velocity equals the wavenumber.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phaselab/errors.hpp"
#include "phaselab/fft.hpp"

namespace phaselab {

/// Uniform periodic grid on [x_min, x_max) with n samples.
///
/// The conjugate momentum grid has spacing dk = 2 pi / (n dx) and is always
/// exposed in sorted order, k_m = (m - n/2) dk for m = 0 .. n-1, covering
/// [-pi/dx, pi/dx).
class SpatialGrid {
 public:
  SpatialGrid() = default;

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return (x_max_ - x_min_) / static_cast<double>(n_); }
  double dk() const noexcept { return 2.0 * std::numbers::pi / (static_cast<double>(n_) * dx()); }
  double k_max() const noexcept { return std::numbers::pi / dx(); }

  double x(std::size_t j) const noexcept { return x_min_ + static_cast<double>(j) * dx(); }
  double k(std::size_t m) const noexcept {
    return (static_cast<double>(m) - static_cast<double>(n_ / 2)) * dk();
  }

  std::vector<double> positions() const {
    std::vector<double> out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = x(j);
    return out;
  }
  std::vector<double> wavenumbers() const {
    std::vector<double> out(n_);
    for (std::size_t m = 0; m < n_; ++m) out[m] = k(m);
    return out;
  }

  /// Index of the sample nearest to wavenumber k (clamped to the grid).
  std::size_t nearest_k_index(double kv) const noexcept {
    const double m = std::round(kv / dk()) + static_cast<double>(n_ / 2);
    return static_cast<std::size_t>(std::clamp(m, 0.0, static_cast<double>(n_ - 1)));
  }

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;

 private:
  friend SpatialGrid make_grid(double, double, std::size_t);
  SpatialGrid(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {}

  double x_min_ = 0.0;
  double x_max_ = 1.0;
  std::size_t n_ = 0;
};

/// Builds a grid. Requires n a power of two, n >= 256 and x_max > x_min.
inline SpatialGrid make_grid(double x_min, double x_max, std::size_t n) {
  if (n < 256 || !std::has_single_bit(n))
    throw PreconditionError("grid size must be a power of two >= 256, got " + std::to_string(n));
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
    throw PreconditionError("degenerate grid extent [" + num(x_min) + ", " +
                            num(x_max) + ")");
  return SpatialGrid(x_min, x_max, n);
}

/// psi(x, t) sampled on a grid. Immutable once built.
class WaveFunction {
 public:
  WaveFunction() = default;
  WaveFunction(SpatialGrid grid, std::vector<cplx> amp, double time)
      : grid_(grid), amp_(std::move(amp)), time_(time) {
    if (amp_.size() != grid_.size())
      throw PreconditionError("wave function has " + std::to_string(amp_.size()) +
                              " samples, grid has " + std::to_string(grid_.size()));
  }

  const SpatialGrid& grid() const noexcept { return grid_; }
  std::span<const cplx> amplitudes() const noexcept { return amp_; }
  double time() const noexcept { return time_; }

  /// sum |psi|^2 dx
  double norm_squared() const noexcept {
    double s = 0.0;
    for (const auto& a : amp_) s += std::norm(a);
    return s * grid_.dx();
  }

  WaveFunction normalized() const {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw PreconditionError("cannot normalize a zero wave function");
    std::vector<cplx> out(amp_);
    const double s = 1.0 / std::sqrt(n2);
    for (auto& a : out) a *= s;
    return {grid_, std::move(out), time_};
  }

  /// Probability inside [a, b].
  double probability_in(double a, double b) const noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < amp_.size(); ++j) {
      const double xj = grid_.x(j);
      if (xj >= a && xj <= b) s += std::norm(amp_[j]);
    }
    return s * grid_.dx();
  }

 private:
  SpatialGrid grid_;
  std::vector<cplx> amp_;
  double time_ = 0.0;
};

/// chi(k, t) on the sorted conjugate grid of `grid()`.
///
/// Normalized as the continuum Fourier transform,
/// chi(k) = (2 pi)^(-1/2) \int psi(x) e^{-ikx} dx, so that
/// sum |chi|^2 dk = sum |psi|^2 dx.
class MomentumSpectrum {
 public:
  MomentumSpectrum() = default;
  MomentumSpectrum(SpatialGrid grid, std::vector<cplx> chi, double time)
      : grid_(grid), chi_(std::move(chi)), time_(time) {
    if (chi_.size() != grid_.size())
      throw PreconditionError("spectrum has " + std::to_string(chi_.size()) +
                              " samples, grid has " + std::to_string(grid_.size()));
  }

  const SpatialGrid& grid() const noexcept { return grid_; }
  std::span<const cplx> values() const noexcept { return chi_; }
  double time() const noexcept { return time_; }

  double norm_squared() const noexcept {
    double s = 0.0;
    for (const auto& c : chi_) s += std::norm(c);
    return s * grid_.dk();
  }

  /// Probability carried by k > 0.
  double forward_probability() const noexcept {
    double s = 0.0;
    for (std::size_t m = 0; m < chi_.size(); ++m)
      if (grid_.k(m) > 0.0) s += std::norm(chi_[m]);
    return s * grid_.dk();
  }

 private:
  SpatialGrid grid_;
  std::vector<cplx> chi_;
  double time_ = 0.0;
};

inline MomentumSpectrum to_momentum(const WaveFunction& psi) {
  const auto& g = psi.grid();
  const std::size_t n = g.size();
  const auto& plan = detail::FftPlan::get(n);
  std::vector<cplx> native(n);
  plan.forward(psi.amplitudes(), native);

  const double scale = g.dx() / std::sqrt(2.0 * std::numbers::pi);
  std::vector<cplx> chi(n);
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t q = (m + n / 2) % n;
    chi[m] = scale * native[q] * std::polar(1.0, -g.k(m) * g.x_min());
  }
  return {g, std::move(chi), psi.time()};
}

inline WaveFunction to_position(const MomentumSpectrum& spec) {
  const auto& g = spec.grid();
  const std::size_t n = g.size();
  const auto& plan = detail::FftPlan::get(n);
  const auto chi = spec.values();
  std::vector<cplx> native(n);
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t q = (m + n / 2) % n;
    native[q] = chi[m] * std::polar(1.0, g.k(m) * g.x_min());
  }
  std::vector<cplx> amp(n);
  plan.backward(native, amp);
  const double scale = g.dk() / std::sqrt(2.0 * std::numbers::pi);
  for (auto& a : amp) a *= scale;
  return {g, std::move(amp), spec.time()};
}

/// Builds a spectrum by sampling an arbitrary chi(k) on the grid.
inline MomentumSpectrum sample_spectrum(const SpatialGrid& grid,
                                        const std::function<cplx(double)>& chi, double time = 0.0) {
  std::vector<cplx> out(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) out[m] = chi(grid.k(m));
  return {grid, std::move(out), time};
}

/// Minimum-uncertainty packet parameters. x0 sits left of the interaction
/// zone (x0 < 0) and the packet moves right (k0 - 5 sigma_k > 0).
struct GaussianPacketSpec {
  double x0 = -20.0;
  double k0 = 5.0;
  double sigma_k = 0.5;

  double sigma_x() const noexcept { return 0.5 / sigma_k; }
  /// Free-evolution position spread at time t.
  double sigma_x_at(double t) const noexcept {
    return std::sqrt(sigma_x() * sigma_x() + sigma_k * sigma_k * t * t);
  }
};

inline void validate(const GaussianPacketSpec& spec, const SpatialGrid& grid) {
  if (!(spec.sigma_k > 0.0)) throw PreconditionError("packet sigma_k must be positive");
  if (!(spec.k0 > 0.0)) throw PreconditionError("packet k0 must be positive");
  if (!(spec.k0 - 5.0 * spec.sigma_k > 0.0))
    throw PreconditionError("packet has negative-momentum content: k0 - 5 sigma_k <= 0");
  if (!(spec.x0 < 0.0)) throw PreconditionError("packet must start left of the zone (x0 < 0)");
  // |psi| falls to 1e-8 of its peak at ~8.6 sigma_x; demand 10.
  const double reach = 10.0 * spec.sigma_x();
  if (spec.x0 - reach < grid.x_min() || spec.x0 + reach > grid.x_max())
    throw PreconditionError("packet support exceeds grid margins");
  if (spec.k0 + 10.0 * spec.sigma_k > grid.k_max())
    throw PreconditionError("packet spectrum exceeds grid Nyquist wavenumber");
}

/// psi(x, 0) proportional to exp(-(x-x0)^2 / (4 sigma_x^2) + i k0 (x - x0)),
/// sigma_x = 1 / (2 sigma_k), normalized on the grid.
inline WaveFunction gaussian_packet(const GaussianPacketSpec& spec, const SpatialGrid& grid) {
  validate(spec, grid);
  const double sx = spec.sigma_x();
  std::vector<cplx> amp(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double u = grid.x(j) - spec.x0;
    amp[j] = std::polar(std::exp(-u * u / (4.0 * sx * sx)), spec.k0 * u);
  }
  return WaveFunction(grid, std::move(amp), 0.0).normalized();
}

enum class Observable { position, momentum, kinetic_energy };

namespace detail {

inline double position_moment(const WaveFunction& psi) {
  const auto a = psi.amplitudes();
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double w = std::norm(a[j]);
    num += psi.grid().x(j) * w;
    den += w;
  }
  return num / den;
}

inline double momentum_moment(const MomentumSpectrum& chi, int power) {
  const auto c = chi.values();
  double num = 0.0, den = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m) {
    const double w = std::norm(c[m]);
    num += std::pow(chi.grid().k(m), power) * w;
    den += w;
  }
  return num / den;
}

}  // namespace detail

/// <x>, <p> or <p^2/2> of a wave function. Moments are normalized by the
/// state's own norm, so the caller need not renormalize first.
inline double expectation(const WaveFunction& psi, Observable obs) {
  switch (obs) {
    case Observable::position:
      return detail::position_moment(psi);
    case Observable::momentum:
      return detail::momentum_moment(to_momentum(psi), 1);
    case Observable::kinetic_energy:
      return 0.5 * detail::momentum_moment(to_momentum(psi), 2);
  }
  return 0.0;
}

/// Momentum variance of a state.
inline double momentum_spread(const WaveFunction& psi) {
  const auto chi = to_momentum(psi);
  const double m1 = detail::momentum_moment(chi, 1);
  const double m2 = detail::momentum_moment(chi, 2);
  return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

}  // namespace phaselab
