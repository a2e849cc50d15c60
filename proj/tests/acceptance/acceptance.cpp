// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `-v` also lists every check.

#include <cstdio>
#include <cstring>
#include <thread>

#include "phaselab/verification.hpp"

int main(int argc, char** argv) {
  bool verbose = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "-v") == 0) verbose = true;

  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  phaselab::Battery battery(threads, 1);
  const auto reports = phaselab::run_criteria(battery, {1, 2, 3, 4, 5, 6, 7, 8});

  bool ok = true;
  for (const auto& r : reports) {
    std::printf("%s\n", phaselab::summary_line(r).c_str());
    if (verbose)
      for (const auto& c : r.checks)
        std::printf("    %s%s %s\n", c.passed ? "ok  " : "FAIL", c.supplementary ? " (supplementary)" : "",
                    phaselab::describe(c).c_str());
    ok = ok && r.passed();
  }
  return ok ? 0 : 1;
}
