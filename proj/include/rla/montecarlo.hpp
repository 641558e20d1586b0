#pragma once

// Simulated comparison audits: synthetic three-point populations, seeded
// samplers, audit runs to a stopping time, and replication summaries.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rla/assort.hpp"
#include "rla/betting.hpp"
#include "rla/martingale.hpp"

namespace rla {

/// 64-bit Mersenne Twister (period 2^19937 - 1).
using Generator = std::mt19937_64;
inline constexpr const char* kGeneratorName = "mt19937_64";

struct PopulationCounts {
  std::int64_t correct = 0;   // x = a
  std::int64_t one_vote = 0;  // x = a/2
  std::int64_t two_vote = 0;  // x = 0

  std::int64_t total() const noexcept { return correct + one_vote + two_vote; }
  friend bool operator==(const PopulationCounts&, const PopulationCounts&) = default;
};

/// n1 = round(N p1), n2 = round(N p2), n0 = N - n1 - n2.
/// Throws InfeasibleCounts if n0 would be negative.
PopulationCounts build_population(std::int64_t population_size, const RatePair& rates);

enum class SamplingMode { with_replacement, without_replacement };

std::string_view to_string(SamplingMode mode) noexcept;
SamplingMode parse_sampling_mode(std::string_view text);

/// Deterministic sequence of draws from a population. With replacement the
/// draws are i.i.d. categorical with probabilities counts/N; without
/// replacement they walk a seeded uniform permutation of the population.
class DrawStream {
 public:
  DrawStream(const PopulationCounts& counts, SamplingMode mode, std::uint64_t seed);

  /// Throws ExhaustedPopulation past N draws without replacement.
  Discrepancy next();
  std::int64_t drawn() const noexcept { return drawn_; }

 private:
  PopulationCounts counts_;
  SamplingMode mode_;
  Generator rng_;
  std::vector<std::uint8_t> population_;
  std::int64_t drawn_ = 0;
};

/// Child seed for replicate `index`: counter-based (splitmix64) so that
/// replicates can run in any order.
std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

enum class AuditStatus { continuing, confirmed, stalled };

std::string_view to_string(AuditStatus status) noexcept;

/// One audit's sequential state: running rates, martingale and stopping rule
/// (stop at the first draw with P <= alpha).
class AuditSession {
 public:
  AuditSession(const BettingPlan& plan, const ContestSpec& spec);

  struct Step {
    std::int64_t draw = 0;
    double x = 0.0;
    double bet = 0.0;  // single-martingale equivalent of the bets used
    double p_value = 1.0;
    AuditStatus status = AuditStatus::continuing;
  };

  /// Processes the next draw and reports the bet used for it. Throws
  /// std::logic_error once the audit has finished.
  Step observe(Discrepancy d);

  /// As observe() without computing the reported bet.
  AuditStatus advance(Discrepancy d);

  AuditStatus status() const noexcept { return status_; }
  const WagerState& state() const noexcept { return state_; }
  const RunningRates& running() const noexcept { return running_; }

 private:
  void step(Discrepancy d);

  const BettingPlan* plan_;
  ContestSpec spec_;
  WagerState state_;
  RunningRates running_;
  std::vector<double> bets_;
  // Per-discrepancy log-factors for plans whose bets never change.
  std::vector<std::vector<double>> cached_;
  AuditStatus status_ = AuditStatus::continuing;
};

struct AuditOutcome {
  std::int64_t stopping_time = 0;  // cap when the audit never confirmed
  bool confirmed = false;
  bool stalled = false;
  WagerState final_state;
};

/// Runs one audit until P <= alpha or `cap` draws. A stalled audit can never
/// confirm, so it is reported at the cap as soon as it stalls.
AuditOutcome run_audit(DrawStream& stream, const BettingPlan& plan, const ContestSpec& spec,
                       std::int64_t cap);

struct Scenario {
  ContestSpec spec{0.1, 10000, 0.05};
  RatePair true_rates;
  BetStrategy strategy = OracleStrategy{};
  std::int64_t replications = 400;
  std::int64_t cap = 0;  // 0 means N
  std::uint64_t seed = 0;
  SamplingMode mode = SamplingMode::with_replacement;
  std::string label;

  std::int64_t effective_cap() const noexcept { return cap > 0 ? cap : spec.population_size(); }
};

struct ScenarioResult {
  std::vector<std::int64_t> stopping_times;
  double mean = 0.0;
  double q90 = 0.0;  // sorted stopping time at 1-based index ceil(0.9 R)
  std::int64_t capped_count = 0;
  std::int64_t stalled_count = 0;
  std::int64_t cap = 0;
  std::uint64_t seed = 0;
  std::string generator = kGeneratorName;
};

/// Aggregates stopping times into mean, q90 and capped count.
ScenarioResult summarize(std::vector<std::int64_t> stopping_times, std::int64_t cap,
                         std::uint64_t seed);

/// Runs R audits with seeds replicate_seed(seed, r). The result does not
/// depend on `threads`.
ScenarioResult replicate(const Scenario& scenario, unsigned threads = 1);

/// exp(mean_s log(mean_a[s] / mean_b[s])) over aligned scenario lists.
double geometric_mean_ratio(std::span<const ScenarioResult> a, std::span<const ScenarioResult> b);

}  // namespace rla
