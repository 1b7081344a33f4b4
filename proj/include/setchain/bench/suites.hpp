// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "setchain/bench/bench.hpp"
#include "setchain/model/model.hpp"

namespace setchain::bench {

/// Outcome of one checking suite or hypothesis run.
struct SuiteResult {
  std::string name;
  std::uint64_t cases = 0;
  std::uint64_t failure_count = 0;
  // First few failures, verbatim.
  std::vector<std::string> failures;
  // Measured quantity for hypothesis checks, with the bound it is held to.
  std::optional<double> value;
  std::string detail;
  double wall_seconds = 0;

  bool passed() const { return cases > 0 && failure_count == 0; }
  void fail(std::string what);
  void absorb(const SuiteResult& other);
  std::string summary() const;
};

/// {4,7,10} servers x {fast, fast-agg} x {none, silent, havoc} x seeds.
std::vector<Scenario> property_matrix(std::uint64_t seeds);

struct PropertySuites {
  SuiteResult safety;    // checks made after every handler
  SuiteResult liveness;  // checks made at quiescence
  SuiteResult lemmas;    // stamp-once, prefix equality, oracle convergence
};
PropertySuites run_property_suites(std::uint64_t seeds, unsigned threads);

/// Validity, local and global termination, no duplication, under silent,
/// equivocating and forging Byzantine members. (4,1) and (7,2).
SuiteResult run_brb_suite(std::uint64_t seeds);

/// Termination, agreement, validity, nontriviality and censorship
/// resistance after gst, plus inform validity. (4,1) and (7,2).
SuiteResult run_sbc_suite(std::uint64_t seeds);

/// Quorum-read soundness, zero false confirmations under lying and
/// forged-digest servers, and full confirmation with correct servers.
SuiteResult run_client_suite(std::uint64_t seeds);

/// Forward and stuttered backward trace mappings between the f-adversary and
/// single-adversary models, and receive-within-knowledge on every
/// single-adversary configuration. Failing traces land in `counterexamples`.
SuiteResult run_byzmodel_suite(std::uint64_t seeds, std::size_t steps, unsigned threads,
                               std::vector<model::Counterexample>* counterexamples = nullptr);

/// Cliff, strict monotonicity and fee conservation over e in [0,100],
/// s in [0,n], n in {4,7,10}.
SuiteResult run_incentives_suite();

// Hypothesis scenarios and checks.
Scenario h1_scenario();
SuiteResult run_h1();  // adds/sec over epochs/sec >= 100
SuiteResult run_h3();  // fast-agg over fast adds/sec >= 2 at n=7
SuiteResult run_h4();  // silent adversary at n=10 loses < 50% adds/sec
SuiteResult run_h5();  // last-window over second-window median latency <= 2

}  // namespace setchain::bench
