// SPDX-License-Identifier: Apache-2.0
// Command-line front end: scenario benchmarks, checking suites and
// counterexample replay.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "setchain/bench/bench.hpp"
#include "setchain/bench/suites.hpp"
#include "setchain/model/model.hpp"

namespace fs = std::filesystem;
using namespace setchain;

namespace {

// "7" or "0..99" (inclusive).
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto v = std::stoull(text);
    return {v, v};
  }
  const auto lo = std::stoull(text.substr(0, dots));
  const auto hi = std::stoull(text.substr(dots + 2));
  if (hi < lo) throw std::invalid_argument("empty seed range: " + text);
  return {lo, hi};
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("SETCHAIN_SEED");
  if (!v || !*v) return std::nullopt;
  return std::stoull(v);
}

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

int cmd_bench(const std::string& scenario_file, const std::string& seeds, const std::string& out_dir,
              unsigned threads) {
  std::ifstream in(scenario_file);
  if (!in) throw std::runtime_error("cannot open " + scenario_file);
  const auto base = bench::Scenario::from_json(nlohmann::json::parse(in));

  std::pair<std::uint64_t, std::uint64_t> range{base.seed, base.seed};
  if (!seeds.empty()) range = parse_seed_range(seeds);
  if (auto s = env_seed()) range = {*s, *s};

  std::vector<bench::Scenario> runs;
  for (std::uint64_t seed = range.first; seed <= range.second; ++seed) {
    runs.push_back(base);
    runs.back().seed = seed;
  }
  const auto reports = bench::run_matrix(runs, threads);

  fs::create_directories(out_dir);
  std::ofstream jsonl(fs::path(out_dir) / "reports.jsonl");
  std::ofstream csv(fs::path(out_dir) / "summary.csv");
  csv << bench::csv_header() << '\n';
  bool clean = true;
  for (const auto& r : reports) {
    jsonl << r.to_json().dump() << '\n';
    csv << bench::csv_row(r) << '\n';
    std::cout << bench::csv_row(r) << '\n';
    for (const auto& v : r.property_violations) std::cout << "  violation: " << v << '\n';
    clean = clean && r.passed();
  }
  std::cout << reports.size() << " runs written to " << out_dir << '\n';
  return clean ? 0 : 1;
}

int cmd_check(const std::string& suite, std::uint64_t seeds, std::size_t steps, unsigned threads,
              const std::string& out_dir) {
  std::vector<bench::SuiteResult> results;
  if (suite == "properties") {
    auto p = bench::run_property_suites(seeds, threads);
    results = {p.safety, p.liveness, p.lemmas};
  } else if (suite == "byzmodel") {
    std::vector<model::Counterexample> cx;
    results.push_back(bench::run_byzmodel_suite(seeds, steps, threads, &cx));
    if (!cx.empty()) {
      fs::create_directories(out_dir);
      for (std::size_t i = 0; i < cx.size(); ++i) {
        const auto path = fs::path(out_dir) / ("counterexample-" + cx[i].direction + "-n" +
                                               std::to_string(cx[i].n) + "-seed" + std::to_string(cx[i].seed) +
                                               ".json");
        std::ofstream(path) << cx[i].to_json().dump(2) << '\n';
        std::cout << "counterexample written to " << path.string() << '\n';
      }
    }
  } else if (suite == "brb") {
    results.push_back(bench::run_brb_suite(seeds));
  } else if (suite == "sbc") {
    results.push_back(bench::run_sbc_suite(seeds));
  } else if (suite == "client") {
    results.push_back(bench::run_client_suite(seeds));
  } else if (suite == "incentives") {
    results.push_back(bench::run_incentives_suite());
  } else if (suite == "hypotheses") {
    results = {bench::run_h1(), bench::run_h3(), bench::run_h4(), bench::run_h5()};
  } else {
    throw std::invalid_argument("unknown suite: " + suite);
  }
  bool ok = true;
  for (const auto& r : results) {
    std::cout << r.summary() << '\n';
    for (const auto& f : r.failures) std::cout << "  " << f << '\n';
    ok = ok && r.passed();
  }
  return ok ? 0 : 1;
}

int cmd_replay(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file);
  const auto cx = model::Counterexample::from_json(nlohmann::json::parse(in));
  const auto r = model::replay(cx);
  std::cout << cx.direction << " mapping, n=" << cx.n << " f=" << cx.f << " seed=" << cx.seed << ", "
            << cx.trace.size() << " events: ";
  if (r.ok) {
    std::cout << "holds\n";
    return 0;
  }
  std::cout << "fails at step " << r.step << ": " << r.reason << '\n';
  if (r.step < cx.trace.size()) std::cout << "  event: " << model::describe(cx.trace[r.step]) << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Setchain simulator: benchmarks, property checks and replays"};
  app.require_subcommand(1);

  std::string scenario_file, seeds_text, bench_out = "bench-out";
  unsigned threads = default_threads();
  auto* bench_cmd = app.add_subcommand("bench", "run a scenario file over a range of seeds");
  bench_cmd->add_option("--scenario", scenario_file, "scenario JSON file")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--seeds", seeds_text, "seed or inclusive range, e.g. 0..99");
  bench_cmd->add_option("--out", bench_out, "output directory");
  bench_cmd->add_option("--threads", threads, "worker threads");

  std::string suite, cx_out = "counterexamples";
  std::uint64_t suite_seeds = 100;
  std::size_t steps = 200;
  auto* check_cmd = app.add_subcommand("check", "run a checking suite");
  check_cmd->add_option("--suite", suite, "properties|byzmodel|brb|sbc|client|incentives|hypotheses")
      ->required();
  check_cmd->add_option("--seeds", suite_seeds, "number of seeds");
  check_cmd->add_option("--steps", steps, "trace length for byzmodel");
  check_cmd->add_option("--threads", threads, "worker threads");
  check_cmd->add_option("--out", cx_out, "directory for counterexample bundles");

  std::string cx_file;
  auto* replay_cmd = app.add_subcommand("replay", "re-run a counterexample bundle");
  replay_cmd->add_option("--counterexample", cx_file, "bundle JSON file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*bench_cmd) return cmd_bench(scenario_file, seeds_text, bench_out, threads);
    if (*check_cmd) return cmd_check(suite, suite_seeds, steps, threads, cx_out);
    if (*replay_cmd) return cmd_replay(cx_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
