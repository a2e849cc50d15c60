// phaselab: run an experiment config, sweep one of its parameters, or run a
// verification suite.
//
//   phaselab run configs/gas_cell.cfg -o out/gas
//   phaselab sweep configs/magnetic_ab.cfg --threads 8
//   phaselab verify converse
//
// Exit status: 0 ok, 1 a verification criterion failed, 2 bad config or
// precondition, 3 a physics guard tripped during propagation.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "phaselab/experiment.hpp"
#include "phaselab/verification.hpp"

using namespace phaselab;

namespace {

struct Options {
  std::string config_path;
  std::string suite = "all";
  std::string output;
  std::optional<double> epsilon;
  std::optional<double> dt;
  std::vector<std::string> set;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load(const Options& o) {
  auto c = config::load(o.config_path);
  for (const auto& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(kv, "--set expects key=value");
    const auto key = config::detail::trim(std::string_view(kv).substr(0, eq));
    const auto value = config::detail::trim(std::string_view(kv).substr(eq + 1));
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ConfigError(key, "--set takes numeric values only, got '" + value + "'");
    }
    const auto sweep = c.sweep;
    c = config::with_value(c, key, v);
    c.sweep = sweep;
  }
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.dt) c.dt = *o.dt;
  if (o.seed) c.seed = *o.seed;
  return c;
}

std::filesystem::path out_dir(const Options& o, const ExperimentConfig& c) {
  return o.output.empty() ? std::filesystem::path(c.output_dir) : std::filesystem::path(o.output);
}

void print_result(const ExperimentResult& r) {
  std::printf("%s: n = %zu, dt = %s, t_end = %s, epsilon = %s, band [%s, %s]\n",
              r.config.name.c_str(), r.plan.grid.size(), config::format(r.plan.schedule.dt).c_str(),
              config::format(r.plan.schedule.t_end).c_str(), config::format(r.epsilon).c_str(),
              config::format(r.band_lo).c_str(), config::format(r.band_hi).c_str());
  for (const auto& a : r.arms) {
    std::printf("  %s %-18s delta = %-12s max|d delta/dk| = %-12s %s (%s)\n", a.label.c_str(),
                a.model ? std::string(model_name(*a.model)).c_str() : "free",
                config::format(a.report.mean_delta).c_str(),
                config::format(a.report.max_abs_slope).c_str(), to_string(a.report.verdict),
                a.verdict_source.c_str());
    std::printf("       ehrenfest residual %s, peak |<F>| %s, norm drift %s\n",
                config::format(a.ehrenfest.residual).c_str(),
                config::format(a.trace.peak_abs_force()).c_str(),
                config::format(a.trace.max_norm_drift()).c_str());
  }
  if (r.fringe)
    std::printf("  fringe: I_O = %s, I_H = %s, phase = %s (predicted %s), visibility = %s "
                "(predicted %s)\n",
                config::format(r.fringe->I_O).c_str(), config::format(r.fringe->I_H).c_str(),
                config::format(r.fringe->relative_phase).c_str(),
                config::format(r.predicted->phase).c_str(),
                config::format(r.fringe->visibility).c_str(),
                config::format(r.predicted->visibility).c_str());
}

int cmd_run(const Options& o) {
  const auto c = load(o);
  const auto r = run_experiment(c, o.threads);
  const auto dir = out_dir(o, c);
  report::write_run(r, dir);
  print_result(r);
  std::printf("wrote %s\n", dir.string().c_str());
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto c = load(o);
  if (!c.sweep) throw ConfigError("sweep.parameter", "config has no sweep section");
  const auto pts = run_sweep(c, o.threads);
  const auto dir = out_dir(o, c);
  report::write_sweep(c, pts, dir);
  std::size_t failed = 0;
  for (const auto& p : pts) {
    if (!p.result) {
      ++failed;
      std::printf("  %s = %-10s error: %s\n", c.sweep->parameter.c_str(),
                  config::format(p.value).c_str(), p.error.c_str());
      continue;
    }
    std::printf("  %s = %-10s", c.sweep->parameter.c_str(), config::format(p.value).c_str());
    for (const auto& a : p.result->arms)
      std::printf("  %s delta %-12s %s", a.label.c_str(), config::format(a.report.mean_delta).c_str(),
                  to_string(a.report.verdict));
    if (p.result->fringe)
      std::printf("  visibility %s", config::format(p.result->fringe->visibility).c_str());
    std::printf("\n");
  }
  std::printf("wrote %s (%zu points, %zu failed)\n", dir.string().c_str(), pts.size(), failed);
  return 0;
}

int cmd_verify(const Options& o) {
  const auto wanted = suite_criteria(o.suite);
  Battery battery(o.threads, o.seed.value_or(1));
  const auto reports = run_criteria(battery, wanted);
  bool ok = true;
  for (const auto& r : reports) {
    std::printf("%s\n", summary_line(r).c_str());
    for (const auto& c : r.checks)
      std::printf("    %s%s %s\n", c.passed ? "ok  " : "FAIL",
                  c.supplementary ? " (supplementary)" : "", describe(c).c_str());
    ok = ok && r.passed();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phaselab: wave packets through interferometer interaction zones"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  };
  auto experiment_flags = [&](CLI::App* sub) {
    sub->add_option("config", o.config_path, "config file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output", o.output, "output directory (default: output.dir)");
    sub->add_option("--epsilon", o.epsilon, "dispersivity tolerance on max|d delta/dk|");
    sub->add_option("--dt", o.dt, "time step");
    sub->add_option("--set", o.set, "override a numeric key, e.g. --set arm1.V0=0.5");
    sub->add_option("--seed", o.seed, "seed recorded with the run");
    common(sub);
  };

  auto* run = app.add_subcommand("run", "run one experiment and write its tables");
  experiment_flags(run);
  auto* sweep = app.add_subcommand("sweep", "run every point of the config's sweep");
  experiment_flags(sweep);
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", o.suite,
                     "theorem, converse, ehrenfest, oracle, visibility, hygiene or all")
      ->check(CLI::IsMember({"theorem", "converse", "ehrenfest", "oracle", "visibility",
                             "hygiene", "all"}));
  verify->add_option("--seed", o.seed, "seed for the random-packet probe");
  common(verify);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(o);
    if (sweep->parsed()) return cmd_sweep(o);
    return cmd_verify(o);
  } catch (const PhysicsViolation& e) {
    std::fprintf(stderr, "physics violation: %s\n", e.what());
    return 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "precondition: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
