#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "phaselab/config.hpp"

using namespace phaselab;

namespace {

int error_line(const std::string& text) {
  try {
    config::parse(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_key(const std::string& text) {
  try {
    config::parse(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesCommentsAndWhitespace) {
  const auto c = config::parse(R"(
# gas cell behind arm 1
name = cell     # trailing comment
  packet.k0 =   6
packet.sigma_k=0.2
arm1.model = gas_cell
arm1.V0 = 0.3
arm1.pulse.duration = 2
arm1.zone.length = auto
arm1.pulse.t_on = auto
arm2.model = free
)");
  EXPECT_EQ(c.name, "cell");
  EXPECT_EQ(c.k0, 6.0);
  EXPECT_EQ(c.sigma_k, 0.2);
  ASSERT_EQ(c.arms.size(), 2u);
  const auto& g = std::get<GasCell>(*c.arms[0].model);
  EXPECT_EQ(g.V0, 0.3);
  EXPECT_EQ(g.pulse.duration(), 2.0);
  EXPECT_TRUE(c.arms[0].auto_pulse_start);
  EXPECT_TRUE(c.arms[0].auto_zone_length);
  EXPECT_FALSE(c.arms[1].model.has_value());
}

TEST(Config, EmptyFileGivesFreeRunDefaults) {
  const auto c = config::parse("");
  ASSERT_EQ(c.arms.size(), 1u);
  EXPECT_FALSE(c.arms[0].model);
  EXPECT_FALSE(c.dt);
  EXPECT_EQ(c.samples, 64u);
  EXPECT_EQ(c.seed, 1u);
}

TEST(Config, ModelDefaults) {
  const auto c = config::parse("arm1.model = nondispersive_slab\npacket.k0 = 7\n");
  const auto& s = std::get<NondispersiveSlab>(*c.arms[0].model);
  EXPECT_EQ(s.k_ref, 7.0);
  EXPECT_TRUE(c.arms[0].auto_k_ref);
  EXPECT_EQ(s.zone.length, s.thickness);
  const auto a = config::parse("arm1.model = aharonov_casher\narm1.sign = -1\n");
  EXPECT_EQ(std::get<AharonovCasher>(*a.arms[0].model).sign, -1);
}

TEST(ConfigProperty, TextRoundTripIsExact) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  const char* models[] = {"static_slab", "nondispersive_slab", "gas_cell", "electric_ab",
                          "magnetic_ab", "aharonov_casher",    "scalar_ab", "free"};
  for (int i = 0; i < 200; ++i) {
    std::string text = "packet.k0 = " + config::format(4.0 + u(rng)) +
                       "\npacket.sigma_k = " + config::format(0.1 * u(rng)) +
                       "\narm1.model = " + models[i % 8] + "\nschedule.dt = " +
                       config::format(1e-3 * u(rng)) + "\n";
    if (i % 3 == 0) text += "arm2.model = " + std::string(models[(i / 3) % 8]) + "\n";
    const auto c = config::parse(text);
    const auto again = config::parse(config::to_text(c));
    EXPECT_EQ(config::entries(c), config::entries(again)) << text;
  }
}

TEST(Config, ReportsLineAndKey) {
  EXPECT_EQ(error_line("packet.k0 = 5\n\npacket.bogus = 1\n"), 3);
  EXPECT_EQ(error_key("packet.k0 = 5\n\npacket.bogus = 1\n"), "packet.bogus");
  EXPECT_EQ(error_line("packet.k0 = five\n"), 1);
  EXPECT_EQ(error_line("packet.k0 = 5\npacket.k0 = 6\n"), 2);
  EXPECT_EQ(error_line("packet.k0 5\n"), 1);
  EXPECT_EQ(error_line("packet.k0 =\n"), 1);
  EXPECT_EQ(error_key("packet.sigma_k = -1\n"), "packet.sigma_k");
  EXPECT_EQ(error_key("arm1.model = gas_cell\narm1.alpha = 1\n"), "arm1.alpha");
  EXPECT_EQ(error_key("arm1.model = warp_drive\n"), "arm1.model");
  EXPECT_EQ(error_key("arm1.model = aharonov_casher\narm1.sign = 2\n"), "arm1.sign");
  EXPECT_EQ(error_key("arm1.model = magnetic_ab\narm1.zone.length = auto\n"), "arm1.zone.length");
  EXPECT_EQ(error_key("arm1.model = static_slab\narm1.V0 = -2\n"), "arm1.model");
  EXPECT_EQ(error_key("grid.n = 1000\n"), "grid.n");
  EXPECT_EQ(error_key("grid.x_min = -10\n"), "grid.x_min");
  EXPECT_EQ(error_key("sweep.steps = 3\n"), "sweep.steps");
  EXPECT_EQ(error_key("arm2.V0 = 1\n"), "arm2.V0");
}

TEST(Config, SweepPointsAreValidatedUpFront) {
  const auto ok = config::parse(
      "arm1.model = static_slab\nsweep.parameter = arm1.V0\nsweep.from = 1\nsweep.to = 3\n"
      "sweep.steps = 5\n");
  ASSERT_TRUE(ok.sweep);
  EXPECT_EQ(ok.sweep->value(4), 3.0);
  const auto p = config::with_value(ok, "arm1.V0", 2.5);
  EXPECT_EQ(std::get<StaticSlab>(*p.arms[0].model).V0, 2.5);
  EXPECT_FALSE(p.sweep);

  EXPECT_EQ(error_key("arm1.model = magnetic_ab\nsweep.parameter = arm1.V0\n"), "sweep.parameter");
  EXPECT_EQ(error_key("arm1.model = static_slab\nsweep.parameter = arm1.V0\nsweep.from = -1\n"
                      "sweep.to = 1\nsweep.steps = 3\n"),
            "sweep.parameter");
}

TEST(Config, BundledConfigsParse) {
  const char* dir = std::getenv("PHASELAB_CONFIG_DIR");
  if (!dir) GTEST_SKIP() << "PHASELAB_CONFIG_DIR not set";
  int count = 0;
  for (const auto& f : std::filesystem::directory_iterator(dir)) {
    if (f.path().extension() != ".cfg") continue;
    ++count;
    EXPECT_NO_THROW(config::load(f.path().string())) << f.path();
  }
  EXPECT_EQ(count, 8);
}
