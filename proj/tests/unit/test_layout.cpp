#include <gtest/gtest.h>

#include <cmath>

#include "phaselab/analysis.hpp"
#include "phaselab/layout.hpp"

using namespace phaselab;

namespace {

double spread(double sk, double t) {
  const double s0 = 0.5 / sk;
  return std::sqrt(s0 * s0 + sk * sk * t * t);
}

PlanRequest one_arm(InteractionModel m, double k0, double sk, bool auto_pulse = false,
                    bool auto_zone = false) {
  PlanRequest r;
  r.k0 = k0;
  r.sigma_k = sk;
  r.arms.push_back({std::move(m), auto_zone, auto_pulse});
  return r;
}

}  // namespace

TEST(Layout, AutoPulseStartsOnceThePacketIsInside) {
  const GasCell cell{{0.0, 60.0}, 0.3, {0.0, 2.0, Envelope::smooth, 0.0}};
  const auto p = plan_run(one_arm(cell, 5.0, 0.5, true, true));
  const auto& g = std::get<GasCell>(p.models[0]);
  const double tb = g.pulse.support_begin();
  const double te = g.pulse.support_end();
  EXPECT_NEAR(g.pulse.duration(), 2.0, 1e-12);
  // the packet tail just touches the zone start when the ramp begins
  EXPECT_NEAR(p.packet.x0 + 5.0 * tb - layout::containment_z * spread(0.5, tb), 0.0, 1e-6);
  EXPECT_LE(p.packet.x0 + 5.0 * te + layout::containment_z * spread(0.5, te), g.zone.end());
  EXPECT_EQ(std::fmod(g.zone.length, 5.0), 0.0);
  EXPECT_GE(p.schedule.t_end, te);
}

TEST(Layout, ScheduleMeetsStepGuards) {
  for (const InteractionModel& m :
       {InteractionModel{StaticSlab{}}, InteractionModel{MagneticAB{}},
        InteractionModel{AharonovCasher{}}, InteractionModel{NondispersiveSlab{}}}) {
    const auto p = plan_run(one_arm(m, 5.0, 0.5));
    EXPECT_NO_THROW(validate(p.schedule, p.grid, p.models[0]));
    EXPECT_NO_THROW(validate(p.packet, p.grid));
    EXPECT_LE(p.grid.size(), 2048u);
    const double ratio = p.schedule.t_end / p.schedule.dt;
    EXPECT_NEAR(ratio, std::round(ratio), 1e-9 * ratio);
  }
}

TEST(Layout, SlabFacesFallBetweenSamples) {
  const auto p = plan_run(one_arm(StaticSlab{{0.0, 2.0}, 2.0, 2.0}, 5.0, 0.5));
  const double dx = p.grid.dx();
  EXPECT_NEAR(dx, 0.1, 1e-12);
  for (double face : {0.0, 2.0}) {
    const double u = (face - p.grid.x_min()) / dx - 0.5;
    EXPECT_NEAR(u, std::round(u), 1e-9);
  }
}

TEST(Layout, ReflectiveModelsGetRoomOnTheLeft) {
  const auto slab = plan_run(one_arm(StaticSlab{}, 5.0, 0.5));
  const auto gauge = plan_run(one_arm(MagneticAB{{0.0, 2.0}, 1.2}, 5.0, 0.5));
  EXPECT_LT(slab.grid.x_min(), gauge.grid.x_min() - 20.0);
}

TEST(Layout, TwoArmsShareOneLayout) {
  PlanRequest r;
  r.k0 = 5.0;
  r.sigma_k = 0.3;
  r.arms.push_back({AharonovCasher{{0.0, 10.0}, 0.08, +1}, false, false});
  r.arms.push_back({AharonovCasher{{0.0, 10.0}, 0.08, -1}, false, false});
  const auto p = plan_run(r);
  EXPECT_EQ(p.models.size(), 2u);
  EXPECT_GT(p.packet.x0 + 5.0 * p.schedule.t_end - 6.0 * spread(0.3, p.schedule.t_end), 10.0);
}

// The gauge profile mixes slow components still inside the zone into the
// band's lower edge; the run has to last until they are out.
TEST(Layout, GaugeRunsWaitForTheSlowEdge) {
  const AharonovCasher ac{{0.0, 10.0}, 0.08, +1};
  const auto p = plan_run(one_arm(ac, 4.0, 0.5));
  const double T = p.schedule.t_end;
  EXPECT_GE(p.packet.x0 + 4.0 * T - 7.0 * spread(0.5, T), 10.0);
  const auto psi0 = gaussian_packet(p.packet, p.grid);
  const auto r = propagate(psi0, p.models[0], p.schedule);
  const auto c = extract_phase(to_momentum(psi0), r.final_state);
  EXPECT_LT(dispersivity(c, 1e-2).max_abs_slope, 1e-3);
}

TEST(Layout, Rejections) {
  EXPECT_THROW(plan_run(one_arm(StaticSlab{{0.0, 2.0}, 2.0, 2.0}, 2.5, 0.2)), PreconditionError);
  EXPECT_THROW(plan_run(one_arm(MagneticAB{}, 1.0, 0.3)), PreconditionError);

  auto short_run = one_arm(MagneticAB{}, 5.0, 0.5);
  short_run.t_end = 1.0;
  EXPECT_THROW(plan_run(short_run), PreconditionError);

  auto big = one_arm(GasCell{{0.0, 60.0}, 0.3, {0.0, 40.0, Envelope::smooth, 0.0}}, 5.0, 0.5,
                     true, true);
  EXPECT_THROW(plan_run(big), PreconditionError);

  auto fixed = one_arm(GasCell{{0.0, 20.0}, 0.3, {0.0, 2.0, Envelope::smooth, 0.0}}, 5.0, 0.5,
                       true, false);
  EXPECT_THROW(plan_run(fixed), PreconditionError);

  auto half = one_arm(MagneticAB{}, 5.0, 0.5);
  half.x_min = -50.0;
  EXPECT_THROW(plan_run(half), PreconditionError);
}

TEST(Layout, ExplicitDtKeepsWholeSteps) {
  auto r = one_arm(MagneticAB{}, 5.0, 0.5);
  r.dt = 0.002;
  const auto p = plan_run(r);
  EXPECT_DOUBLE_EQ(p.schedule.dt, 0.002);
  EXPECT_NO_THROW(validate(p.schedule, p.grid, p.models[0]));
}

// Every planned run should pass all of the propagator's guards.
class PlannedRun : public ::testing::TestWithParam<int> {};

TEST_P(PlannedRun, PropagatesCleanly) {
  const std::vector<InteractionModel> models{
      GasCell{{0.0, 60.0}, 0.3, {0.0, 2.0, Envelope::smooth, 0.0}},
      ElectricAB{{0.0, 60.0}, 0.4, {0.0, 1.5, Envelope::smooth, 0.0}},
      ScalarAB{{0.0, 60.0}, 0.25, 1.0, {0.0, 2.0, Envelope::smooth, 0.0}},
      MagneticAB{},
      AharonovCasher{},
      StaticSlab{},
      NondispersiveSlab{},
  };
  const auto& m = models[static_cast<std::size_t>(GetParam())];
  const bool pulsed = pulse_of(m).has_value();
  const auto p = plan_run(one_arm(m, 5.0, 0.5, pulsed, pulsed));
  const auto psi0 = gaussian_packet(p.packet, p.grid);
  const auto r = propagate(psi0, p.models[0], p.schedule);
  EXPECT_LT(r.trace.max_norm_drift(), 1e-10);
  if (!is_reflective(m)) {
    const auto c = extract_phase(to_momentum(psi0), r.final_state);
    EXPECT_NEAR(c.delta[c.size() / 2], predicted_phase(p.models[0], 5.0), 2e-3);
  }
}

INSTANTIATE_TEST_SUITE_P(AllModels, PlannedRun, ::testing::Range(0, 7));
