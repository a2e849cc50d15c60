#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "phaselab/analysis.hpp"
#include "phaselab/interferometer.hpp"
#include "phaselab/oracle.hpp"

using namespace phaselab;

namespace {

SpatialGrid coarse_grid() { return make_grid(-102.5, 102.3, 1024); }
SpatialGrid slab_grid() { return make_grid(-102.45, 102.35, 2048); }

WaveFunction times(const WaveFunction& psi, cplx f) {
  std::vector<cplx> a(psi.amplitudes().begin(), psi.amplitudes().end());
  for (auto& v : a) v *= f;
  return WaveFunction(psi.grid(), std::move(a), psi.time());
}

// Oracle delta(k) sampled on the grid wavenumbers of chi's band.
PhaseShiftCurve oracle_curve_on_grid(const InteractionModel& m, const MomentumSpectrum& chi) {
  const auto& g = chi.grid();
  const auto segs = oracle::segments_of(m);
  double peak = 0.0;
  for (const auto& v : chi.values()) peak = std::max(peak, std::norm(v));
  PhaseShiftCurve c;
  std::vector<double> raw;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = std::norm(chi.values()[i]);
    if (g.k(i) <= 0.0 || w <= 1e-7 * peak) continue;
    c.k.push_back(g.k(i));
    c.weight.push_back(w);
    raw.push_back(oracle::scatter(segs, g.k(i)).delta);
  }
  c.delta = unwrap_from(raw, raw.size() / 2);
  c.d_delta_dk = finite_difference_slope(c.k, c.delta);
  c.k_lo = c.k.front();
  c.k_hi = c.k.back();
  return c;
}

}  // namespace

TEST(Interfere, IdenticalArms) {
  const auto psi = gaussian_packet({-20.0, 5.0, 0.5}, coarse_grid());
  const auto f = interfere(psi, psi);
  EXPECT_NEAR(f.I_O, 1.0, 1e-12);
  EXPECT_NEAR(f.I_H, 0.0, 1e-12);
  EXPECT_NEAR(f.visibility, 1.0, 1e-12);
  EXPECT_NEAR(f.relative_phase, 0.0, 1e-12);
}

TEST(Interfere, AntiphaseArms) {
  const auto psi = gaussian_packet({-20.0, 5.0, 0.5}, coarse_grid());
  const auto f = interfere(psi, times(psi, -1.0));
  EXPECT_NEAR(f.I_O, 0.0, 1e-12);
  EXPECT_NEAR(f.I_H, 1.0, 1e-12);
}

TEST(InterfereProperty, IntensitiesSumToOne) {
  const auto g = coarse_grid();
  const auto a = gaussian_packet({-20.0, 5.0, 0.5}, g);
  for (int i = 0; i < 50; ++i) {
    const double phi = 0.13 * i;
    const auto b = gaussian_packet({-20.0 + 0.05 * i, 5.0 + 0.01 * i, 0.4}, g);
    const auto f = interfere(a, times(b, std::polar(1.0, phi)));
    EXPECT_NEAR(f.I_O + f.I_H, 1.0, 1e-12);
    EXPECT_GE(f.visibility, 0.0);
    EXPECT_LE(f.visibility, 1.0 + 1e-12);
  }
}

TEST(Interfere, RejectsMismatchedArms) {
  const auto a = gaussian_packet({-20.0, 5.0, 0.5}, coarse_grid());
  const auto b = gaussian_packet({-20.0, 5.0, 0.5}, slab_grid());
  EXPECT_THROW(interfere(a, b), PreconditionError);
  const WaveFunction later(a.grid(), std::vector<cplx>(a.amplitudes().begin(), a.amplitudes().end()), 1.0);
  EXPECT_THROW(interfere(a, later), PreconditionError);
}

TEST(Interfere, GasCellAgainstFreeArm) {
  const auto g = coarse_grid();
  const auto psi0 = gaussian_packet({-20.0, 5.0, 0.2}, g);
  const GasCell cell{{-45.0, 120.0}, 0.3, {4.0, 6.0, Envelope::smooth, 0.0}};
  const Schedule s{0.0, 7.0, 0.0025, 40};
  const auto arm = propagate(psi0, InteractionModel{cell}, s).final_state;
  const auto free = propagate(psi0, std::nullopt, s).final_state;
  const auto f = interfere(arm, free);
  EXPECT_NEAR(f.I_O, 0.5 * (1.0 + std::cos(0.6)), 1e-3);
  EXPECT_GT(f.visibility, 0.999);
  EXPECT_NEAR(f.relative_phase, 0.6, 1e-3);  // free arm leads the cell arm by 0.6
}

TEST(Interfere, AharonovCasherArms) {
  const auto g = coarse_grid();
  const auto psi0 = gaussian_packet({-20.0, 5.0, 0.3}, g);
  const Schedule s{0.0, 12.0, 0.004, 25};
  const auto plus = propagate(psi0, InteractionModel{AharonovCasher{{0.0, 10.0}, 0.08, +1}}, s);
  const auto minus = propagate(psi0, InteractionModel{AharonovCasher{{0.0, 10.0}, 0.08, -1}}, s);
  const auto f = interfere(plus.final_state, minus.final_state);
  EXPECT_NEAR(f.relative_phase, 2.0 * 0.08 * 10.0, 1e-3);
  EXPECT_NEAR(f.visibility, 1.0, 1e-4);
}

TEST(VisibilityPrediction, ConstantPhaseFactorsOut) {
  const auto chi = to_momentum(gaussian_packet({-20.0, 5.0, 0.5}, coarse_grid()));
  auto c = oracle_curve_on_grid(NondispersiveSlab{{0.0, 2.0}, 2.0, -0.5, 5.0}, chi);
  for (auto& d : c.delta) d = 0.9;
  const auto p = visibility_prediction(c, chi);
  EXPECT_NEAR(p.phase, 0.9, 1e-12);
  EXPECT_NEAR(p.visibility, 1.0, 1e-12);
}

TEST(VisibilityPrediction, RequiresBandCoverage) {
  const auto chi = to_momentum(gaussian_packet({-20.0, 5.0, 0.5}, coarse_grid()));
  auto c = oracle_curve_on_grid(StaticSlab{{0.0, 2.0}, 2.0, 2.0}, chi);
  c.k.resize(c.k.size() / 2);
  c.delta.resize(c.k.size());
  EXPECT_THROW(visibility_prediction(c, chi), PreconditionError);
  auto off = oracle_curve_on_grid(StaticSlab{{0.0, 2.0}, 2.0, 2.0}, chi);
  for (auto& k : off.k) k += 0.3 * chi.grid().dk();
  EXPECT_THROW(visibility_prediction(off, chi), PreconditionError);
}

TEST(VisibilityPrediction, StaticSlabLosesContrastWithBandwidth) {
  const auto g = slab_grid();
  const InteractionModel slab = StaticSlab{{0.0, 2.0}, 2.0, 2.0};
  double last = 1.0;
  for (double sk : {0.2, 0.5, 1.0}) {
    const auto chi = to_momentum(gaussian_packet({-20.0, 8.0, sk}, g));
    const auto p = visibility_prediction(oracle_curve_on_grid(slab, chi), chi);
    EXPECT_LT(p.visibility, last) << sk;
    last = p.visibility;
  }
  EXPECT_LT(last, 0.999);
}

TEST(VisibilityPrediction, MatchesSpatialOverlapForSlabArm) {
  const auto g = slab_grid();
  const auto psi0 = gaussian_packet({-20.0, 5.0, 0.35}, g);
  const InteractionModel slab = StaticSlab{{0.0, 2.0}, 2.0, 2.0};
  const Schedule s{0.0, 12.0, 0.001, 100};
  const auto arm = transmitted_component(propagate(psi0, slab, s).final_state).state;
  const auto free = free_reference(psi0, 12.0);
  const auto chi = to_momentum(psi0);
  const auto spatial = interfere(free, arm);
  const auto spectral = visibility_prediction(extract_phase(chi, arm), chi);
  EXPECT_NEAR(spatial.visibility, spectral.visibility, 1e-3);
  EXPECT_NEAR(spatial.relative_phase, spectral.phase, 1e-3);
  EXPECT_LT(spatial.visibility, 0.999);
}
