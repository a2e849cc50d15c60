#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "phaselab/interactions.hpp"

using namespace phaselab;

namespace {
PulseSchedule window(double on, double off, Envelope e = Envelope::rectangular) {
  return {on, off, e, 0.0};
}
}  // namespace

TEST(LocalPotential, GasCellFollowsItsSchedule) {
  const InteractionModel m = GasCell{{0.0, 40.0}, 0.3, window(10.0, 12.0)};
  EXPECT_DOUBLE_EQ(local_potential(m, 20.0, 11.0), 0.3);
  EXPECT_DOUBLE_EQ(local_potential(m, 20.0, 13.0), 0.0);
  EXPECT_DOUBLE_EQ(local_potential(m, -1.0, 11.0), 0.0);
  EXPECT_DOUBLE_EQ(local_potential(m, 41.0, 11.0), 0.0);
}

TEST(LocalPotential, StaticSlabIsTimeIndependent) {
  const InteractionModel m = StaticSlab{{0.0, 2.0}, 2.0, 2.0};
  EXPECT_DOUBLE_EQ(local_potential(m, 1.0, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(local_potential(m, 1.0, 123.0), 2.0);
  EXPECT_DOUBLE_EQ(local_potential(m, 2.5, 0.0), 0.0);
}

TEST(LocalPotential, ScalarAndElectricPulses) {
  const InteractionModel sab = ScalarAB{{0.0, 40.0}, 0.25, 2.0, window(1.0, 3.0)};
  EXPECT_DOUBLE_EQ(local_potential(sab, 5.0, 2.0), -0.5);
  const InteractionModel eab = ElectricAB{{0.0, 40.0}, 0.4, window(1.0, 3.0)};
  EXPECT_DOUBLE_EQ(local_potential(eab, 5.0, 2.0), 0.4);
}

TEST(LocalPotential, MomentumCoupledModelsHaveNone) {
  EXPECT_THROW(local_potential(MagneticAB{}, 1.0, 0.0), PreconditionError);
  EXPECT_THROW(local_potential(AharonovCasher{}, 1.0, 0.0), PreconditionError);
}

TEST(MomentumCoupling, AharonovCasherLinearInK) {
  const auto plus = momentum_coupling(AharonovCasher{{0.0, 10.0}, 0.08, +1}, 0.0);
  const auto minus = momentum_coupling(AharonovCasher{{0.0, 10.0}, 0.08, -1}, 0.0);
  ASSERT_TRUE(plus && minus);
  EXPECT_NEAR((*plus)(5.0), 0.4, 1e-15);
  EXPECT_NEAR((*minus)(5.0), -0.4, 1e-15);
  EXPECT_FALSE(momentum_coupling(StaticSlab{}, 0.0));
  EXPECT_FALSE(momentum_coupling(GasCell{}, 0.0));
}

TEST(MomentumCoupling, MagneticInteriorCouplingReproducesFluxPhase) {
  // -\int V dt over the crossing time l / k equals the predicted phase.
  const MagneticAB m{{0.0, 10.0}, 1.2};
  const auto v = momentum_coupling(m, 0.0);
  ASSERT_TRUE(v);
  for (double k : {3.0, 5.0, 8.0}) EXPECT_NEAR(-(*v)(k) * m.zone.length / k, predicted_phase(m, k), 1e-14);
}

TEST(PredictedPhase, StaticSlabEikonal) {
  // eta = sqrt(1 - 2*2/25) = sqrt(0.84); delta = 5*2*(sqrt(0.84) - 1).
  const double expect = 10.0 * (std::sqrt(0.84) - 1.0);
  EXPECT_NEAR(predicted_phase(StaticSlab{{0.0, 2.0}, 2.0, 2.0}, 5.0), expect, 1e-14);
  EXPECT_NEAR(expect, -0.8348, 1e-4);
  EXPECT_THROW(predicted_phase(StaticSlab{{0.0, 2.0}, 2.0, 2.0}, 1.5), PreconditionError);
}

TEST(PredictedPhase, ClosedFormsOfForceFreeModels) {
  EXPECT_DOUBLE_EQ(predicted_phase(NondispersiveSlab{{0.0, 2.0}, 2.0, -0.5, 5.0}, 7.0), -0.5);
  EXPECT_NEAR(predicted_phase(GasCell{{0.0, 40.0}, 0.3, window(10.0, 12.0)}, 5.0), -0.6, 1e-15);
  EXPECT_NEAR(predicted_phase(GasCell{{0.0, 40.0}, 0.3, window(10.0, 12.0, Envelope::smooth)}, 5.0),
              -0.6, 1e-15);
  EXPECT_DOUBLE_EQ(std::abs(predicted_phase(MagneticAB{{0.0, 10.0}, 1.2}, 4.0)), 1.2);
  EXPECT_NEAR(predicted_phase(ScalarAB{{0.0, 40.0}, 0.25, 2.0, window(0.0, 1.5)}, 4.0), 0.75, 1e-15);
  EXPECT_NEAR(predicted_phase(ElectricAB{{0.0, 40.0}, 0.4, window(0.0, 1.5)}, 4.0), -0.6, 1e-15);
}

TEST(PredictedPhase, AharonovCasherRelativePhase) {
  const AharonovCasher plus{{0.0, 10.0}, 0.08, +1};
  const AharonovCasher minus{{0.0, 10.0}, 0.08, -1};
  for (double k : {3.0, 5.0, 9.0})
    EXPECT_NEAR(std::abs(predicted_phase(plus, k) - predicted_phase(minus, k)), 2.0 * 0.08 * 10.0,
                1e-14);
}

TEST(PredictedPhase, ForceFreeModelsAreExactlyFlat) {
  const std::vector<InteractionModel> models{
      NondispersiveSlab{{0.0, 2.0}, 2.0, -0.5, 5.0}, GasCell{}, ElectricAB{}, MagneticAB{},
      AharonovCasher{}, ScalarAB{}};
  for (const auto& m : models) {
    const double ref = predicted_phase(m, 3.0);
    for (int i = 0; i <= 100; ++i) EXPECT_EQ(predicted_phase(m, 3.0 + 0.07 * i), ref) << model_name(m);
  }
}

TEST(NondispersiveSlabProperty, IndexReproducesDesignedPhase) {
  // k b (eta(k) - 1) = delta0 identically, at 100 sampled k.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uk(0.5, 20.0);
  const NondispersiveSlab s{{0.0, 2.0}, 2.0, -0.5, 5.0};
  for (int i = 0; i < 100; ++i) {
    const double k = uk(rng);
    EXPECT_NEAR(k * s.thickness * (s.eta(k) - 1.0), s.delta0, 1e-13);
  }
}

TEST(PulseSchedule, SmoothEnvelopeIntegratesToDuration) {
  const PulseSchedule p{10.0, 12.0, Envelope::smooth, 0.0};
  EXPECT_DOUBLE_EQ(p.ramp_time(), 0.2);
  EXPECT_DOUBLE_EQ(p.value(p.t_on), 0.5);
  EXPECT_DOUBLE_EQ(p.value(11.0), 1.0);
  EXPECT_DOUBLE_EQ(p.value(p.support_begin()), 0.0);
  EXPECT_DOUBLE_EQ(p.value(p.support_end()), 0.0);
  // Midpoint quadrature on a fine grid as an independent check.
  const int n = 200000;
  const double a = 9.0, b = 13.0, h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += p.value(a + (i + 0.5) * h) * h;
  EXPECT_NEAR(s, 2.0, 1e-9);
}

TEST(Validate, RejectsBrokenModels) {
  EXPECT_THROW(validate(StaticSlab{{0.0, 2.0}, 3.0, 2.0}), PreconditionError);
  EXPECT_THROW(validate(StaticSlab{{0.0, 2.0}, 2.0, -1.0}), PreconditionError);
  EXPECT_THROW(validate(NondispersiveSlab{{0.0, 2.0}, 2.0, 0.5, 5.0}), PreconditionError);
  EXPECT_THROW(validate(GasCell{{0.0, 40.0}, 0.3, window(12.0, 10.0)}), PreconditionError);
  EXPECT_THROW(validate(AharonovCasher{{0.0, 10.0}, 0.1, 2}), PreconditionError);
  EXPECT_THROW(validate(MagneticAB{{0.0, -1.0}, 1.0}), PreconditionError);
  EXPECT_THROW(validate_band(StaticSlab{{0.0, 2.0}, 2.0, 2.0}, 1.9, 6.0), PreconditionError);
  EXPECT_NO_THROW(validate_band(StaticSlab{{0.0, 2.0}, 2.0, 2.0}, 2.1, 6.0));
}

TEST(GaugeProfile, ContinuousAndNormalized) {
  const MagneticAB m{{0.0, 10.0}, 1.2};
  EXPECT_DOUBLE_EQ(gauge_potential(m, 0.0), 0.0);
  EXPECT_NEAR(gauge_potential(m, 10.0), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(gauge_potential(m, -0.1), 0.0);
  const int n = 100000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += gauge_potential(m, (i + 0.5) * 10.0 / n) * 10.0 / n;
  EXPECT_NEAR(s, 1.2, 1e-9);
  const AharonovCasher ac{{0.0, 10.0}, 0.08, +1};
  s = 0.0;
  for (int i = 0; i < n; ++i) s += gauge_potential(ac, (i + 0.5) * 10.0 / n) * 10.0 / n;
  EXPECT_NEAR(s, predicted_phase(ac, 5.0), 1e-9);
}

TEST(MeanForce, VanishesForUniformPotentialOverPacket) {
  const auto g = make_grid(-100.0, 100.0, 2048);
  const auto psi = gaussian_packet({-20.0, 5.0, 0.5}, g);
  // Packet centred deep inside a uniform zone.
  const InteractionModel cell = GasCell{{-60.0, 80.0}, 0.3, window(0.0, 5.0)};
  EXPECT_LT(std::abs(mean_force(psi, cell, 1.0)), 1e-10);
  EXPECT_EQ(mean_force(psi, MagneticAB{}, 0.0), 0.0);
}
