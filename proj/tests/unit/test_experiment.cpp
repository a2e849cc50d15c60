#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "phaselab/experiment.hpp"

using namespace phaselab;
namespace fs = std::filesystem;

namespace {

ExperimentConfig bundled(const std::string& name) {
  const char* dir = std::getenv("PHASELAB_CONFIG_DIR");
  const std::string base = dir ? dir : "configs";
  return config::load(base + "/" + name + ".cfg");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("phaselab_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Experiment, GasCellConfig) {
  const auto r = run_experiment(bundled("gas_cell"), 2);
  const auto& a = r.arms[0];
  EXPECT_EQ(a.report.verdict, Verdict::nondispersive);
  EXPECT_NEAR(std::abs(a.report.mean_delta), 0.6, 1e-3);
  ASSERT_TRUE(r.fringe);
  EXPECT_NEAR(r.fringe->I_O, 0.5 * (1.0 + std::cos(0.6)), 1e-3);
  EXPECT_GT(r.fringe->visibility, 0.999);
  EXPECT_NEAR(r.fringe->relative_phase, r.predicted->phase, 1e-3);
}

TEST(Experiment, NondispersiveSlabConfig) {
  const auto r = run_experiment(bundled("nondispersive_slab"));
  const auto& a = r.arms[0];
  EXPECT_EQ(a.verdict_source, "oracle_eikonal");
  EXPECT_EQ(a.report.verdict, Verdict::nondispersive);
  EXPECT_GT(a.trace.peak_abs_force(), 1e-2);
  ASSERT_TRUE(a.oracle);
  EXPECT_LT(std::abs(a.oracle->difference), 2e-3);
  EXPECT_GT(a.oracle->band_mean_reflectance, 1e-4);
}

TEST(Experiment, StaticSlabConfig) {
  const auto r = run_experiment(bundled("static_slab"));
  const auto& a = r.arms[0];
  EXPECT_EQ(a.verdict_source, "dynamic");
  EXPECT_EQ(a.report.verdict, Verdict::dispersive);
  ASSERT_TRUE(a.oracle);
  EXPECT_LT(std::abs(a.oracle->difference), 2e-3);
  EXPECT_LT(std::abs(a.ehrenfest.residual), 1e-2 * 2.0);
  EXPECT_NEAR(a.oracle->dynamic_reflectance, a.oracle->band_mean_reflectance,
              0.1 * a.oracle->band_mean_reflectance);
}

TEST(Experiment, TablesAreByteIdenticalAcrossRuns) {
  const auto c = bundled("static_slab");
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  report::write_run(run_experiment(c, 1), d1);
  report::write_run(run_experiment(c, 2), d2);
  int tables = 0;
  for (const auto& f : fs::directory_iterator(d1)) {
    if (f.path().extension() != ".csv" && f.path().extension() != ".cfg") continue;
    ++tables;
    EXPECT_EQ(slurp(f.path()), slurp(d2 / f.path().filename())) << f.path();
  }
  EXPECT_GE(tables, 6);
}

TEST(Experiment, ResolvedConfigReproducesTheRun) {
  const auto c = bundled("magnetic_ab");
  const auto r1 = run_experiment(c);
  const auto r2 = run_experiment(config::parse(config::to_text(r1.resolved)));
  EXPECT_EQ(report::phase_table(r1.arms[0]), report::phase_table(r2.arms[0]));
  EXPECT_EQ(report::trace_table(r1.arms[0].trace), report::trace_table(r2.arms[0].trace));
}

TEST(Experiment, SummaryEchoesDefaults) {
  const auto r = run_experiment(config::parse("arm1.model = magnetic_ab\n"));
  const auto j = report::summary(r, false);
  EXPECT_EQ(j["config"]["arm1.alpha"], "1.2");
  EXPECT_EQ(j["config"]["schedule.dt"], "auto");
  EXPECT_NE(j["resolved"]["schedule.dt"], "auto");
  EXPECT_EQ(j["config"]["analysis.samples"], "64");
  EXPECT_EQ(j["arms"][0]["verdict"], "nondispersive");
}

TEST(Experiment, SweepJoinIsOrderedAndThreadIndependent) {
  const auto c = bundled("gas_cell");
  const auto one = run_sweep(c, 1);
  const auto four = run_sweep(c, 4);
  ASSERT_EQ(one.size(), 7u);
  EXPECT_EQ(report::sweep_table(c, one), report::sweep_table(c, four));
  for (std::size_t i = 0; i < one.size(); ++i) {
    ASSERT_TRUE(one[i].result) << one[i].error;
    const double v0 = one[i].value;
    EXPECT_NEAR(one[i].result->arms[0].report.mean_delta, -2.0 * v0, 1e-3);
    EXPECT_NEAR(one[i].result->fringe->I_O, 0.5 * (1.0 + std::cos(2.0 * v0)), 1e-3);
  }
}

TEST(Experiment, PhysicsViolationNamesTheStep) {
  // a box far too small for the packet: it reaches the boundary mid-run
  auto c = config::parse(
      "arm1.model = magnetic_ab\ngrid.x_min = -20\ngrid.x_max = 30\ngrid.n = 512\n");
  try {
    run_experiment(c);
    FAIL() << "expected a physics violation";
  } catch (const PhysicsViolation& e) {
    EXPECT_GT(e.step(), 0u);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(Experiment, RejectsBeforeCompute) {
  EXPECT_THROW(experiment::check(config::parse("arm1.model = static_slab\npacket.k0 = 2.2\n"
                                               "packet.sigma_k = 0.1\n")),
               PreconditionError);
  EXPECT_THROW(experiment::check(config::parse("arm1.model = magnetic_ab\nschedule.dt = 0.5\n")),
               PreconditionError);
}

// Every point of every bundled sweep runs to completion.
class BundledSweep : public ::testing::TestWithParam<const char*> {};

TEST_P(BundledSweep, EveryPointCompletes) {
  const auto c = bundled(GetParam());
  if (!c.sweep) GTEST_SKIP() << "no sweep";
  const auto pts = run_sweep(c, std::max(1u, std::thread::hardware_concurrency()));
  for (const auto& p : pts)
    EXPECT_TRUE(p.error.empty()) << c.sweep->parameter << " = " << p.value << ": " << p.error;
}

INSTANTIATE_TEST_SUITE_P(Configs, BundledSweep,
                         ::testing::Values("free", "gas_cell", "electric_ab", "scalar_ab",
                                           "magnetic_ab", "aharonov_casher", "static_slab",
                                           "nondispersive_slab"));
