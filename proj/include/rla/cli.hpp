#pragma once

// Command-line surface and the file formats it reads and writes.
//
//   rla plan      deterministic sample sizes (CSV: v,alpha,t_stop)
//   rla simulate  scenario sweep JSON -> results CSV
//   rla audit     replay a comparison-record CSV, one line per draw
//   rla grid      diversified mixture grid (CSV: p1,p2,theta,lambda)
//   rla sample    export a simulated draw stream as comparison records

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rla/assort.hpp"
#include "rla/betting.hpp"
#include "rla/montecarlo.hpp"

namespace rla::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitContinue = 3;
inline constexpr int kExitStalled = 4;

/// Parses a comparison-record CSV with header `ballot_id,cvr_assort,mvr_assort`.
/// Assorter cells accept 0, 0.5, 1, 1/2 and the aliases loser, other, winner.
/// Blank lines and lines starting with '#' are skipped. Errors name the
/// 1-based line number.
std::vector<ComparisonRecord> read_records(std::istream& in);

void write_records(std::ostream& out, const std::vector<ComparisonRecord>& records);

/// Strategy preset from `{ "name": ..., "params": {...} }`. Throws
/// SchemaError naming the offending field, prefixed with `path`.
BetStrategy parse_strategy(const nlohmann::json& node, const std::string& path);

struct SweepEntry {
  Scenario scenario;
  bool has_seed = false;
};

struct Sweep {
  std::vector<SweepEntry> scenarios;
  std::optional<std::string> baseline;
};

/// Parses the scenario sweep document:
///   { "scenarios": [ { "v", "N", "alpha", "p1", "p2",
///                      "strategy": { "name", "params" },
///                      "replications", "cap", "seed"?, "label"?, "sampling"? } ],
///     "baseline"?: strategy-name }
/// Throws SchemaError naming the offending field.
Sweep read_sweep(std::istream& in);

/// One row of the results CSV. `error` is set (and the statistics are empty)
/// when the scenario could not be run.
struct SweepRow {
  std::size_t index = 0;
  Scenario scenario;
  std::optional<ScenarioResult> result;
  std::string error;
};

inline constexpr const char* kResultsHeader =
    "scenario,label,strategy,v,N,alpha,p1,p2,sampling,replications,cap,mean,q90,capped_count,"
    "stalled_count,seed,generator,error";

void write_results_row(std::ostream& out, const SweepRow& row);

struct RatioSummary {
  std::string strategy;
  std::string baseline;
  std::size_t pairs = 0;
  double ratio = 0.0;
};

/// Geometric-mean workload ratio of every non-baseline strategy against the
/// baseline. Rows are paired by label when present, otherwise by
/// (v, N, alpha, p1, p2); the k-th row of a strategy under a key pairs with
/// the k-th baseline row (or the only one).
std::vector<RatioSummary> summarize_ratios(const std::vector<SweepRow>& rows,
                                           const std::string& baseline);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace rla::cli
