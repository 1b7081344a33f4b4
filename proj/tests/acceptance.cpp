// SPDX-License-Identifier: Apache-2.0
// One line per acceptance criterion; exit status is nonzero if any fails.
#include <algorithm>
#include <cstdio>
#include <thread>

#include "setchain/bench/suites.hpp"

using namespace setchain::bench;

namespace {

constexpr std::uint64_t kSeeds = 100;
constexpr std::size_t kTraceSteps = 200;
constexpr double kSafetyBudgetSeconds = 300;
constexpr double kModelBudgetSeconds = 120;

int failures = 0;

void report(const char* criterion, const SuiteResult& r, bool extra_ok = true, const char* extra = "") {
  const bool ok = r.passed() && extra_ok;
  if (!ok) ++failures;
  // summary() leads with the suite verdict; the criterion verdict also
  // covers the runtime budget.
  std::printf("%s %-10s | %s%s\n", ok ? "PASS" : "FAIL", criterion, r.summary().substr(5).c_str(), extra);
  for (const auto& f : r.failures) std::printf("       %s\n", f.c_str());
  std::fflush(stdout);
}

}  // namespace

int main() {
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());

  const PropertySuites props = run_property_suites(kSeeds, threads);
  report("safety", props.safety, props.safety.wall_seconds < kSafetyBudgetSeconds,
         " [budget 300 s]");
  report("liveness", props.liveness);
  report("lemmas", props.lemmas);

  SuiteResult contract = run_brb_suite(kSeeds);
  const SuiteResult sbc = run_sbc_suite(kSeeds);
  contract.absorb(sbc);
  contract.wall_seconds += sbc.wall_seconds;
  contract.name = "brb+sbc contract";
  report("brb-sbc", contract);

  report("client", run_client_suite(kSeeds));

  const SuiteResult model = run_byzmodel_suite(kSeeds, kTraceSteps, threads);
  report("byz-model", model, model.wall_seconds < kModelBudgetSeconds, " [budget 120 s]");

  report("H1", run_h1());
  report("H3", run_h3());
  report("H4", run_h4());
  report("H5", run_h5());
  report("incentives", run_incentives_suite());

  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
