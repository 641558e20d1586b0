#include "rla/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "rla/error.hpp"

namespace rla {

PopulationCounts build_population(std::int64_t population_size, const RatePair& rates) {
  if (population_size < 1) throw InputError("population size must be positive");
  (void)RatePair::checked(rates.p1, rates.p2);
  const double n = static_cast<double>(population_size);
  PopulationCounts counts;
  counts.one_vote = std::llround(n * rates.p1);
  counts.two_vote = std::llround(n * rates.p2);
  counts.correct = population_size - counts.one_vote - counts.two_vote;
  if (counts.correct < 0)
    throw InfeasibleCounts("rounded overstatement counts exceed the population size");
  return counts;
}

std::string_view to_string(SamplingMode mode) noexcept {
  return mode == SamplingMode::with_replacement ? "with-replacement" : "without-replacement";
}

SamplingMode parse_sampling_mode(std::string_view text) {
  if (text == "with-replacement" || text == "with") return SamplingMode::with_replacement;
  if (text == "without-replacement" || text == "without") return SamplingMode::without_replacement;
  throw InputError("unknown sampling mode '" + std::string(text) + "'");
}

DrawStream::DrawStream(const PopulationCounts& counts, SamplingMode mode, std::uint64_t seed)
    : counts_(counts), mode_(mode), rng_(seed) {
  if (counts.correct < 0 || counts.one_vote < 0 || counts.two_vote < 0 || counts.total() < 1)
    throw InputError("population counts must be nonnegative with a positive total");
  if (mode_ == SamplingMode::without_replacement) {
    population_.reserve(static_cast<std::size_t>(counts.total()));
    population_.insert(population_.end(), counts.correct, 0);
    population_.insert(population_.end(), counts.one_vote, 1);
    population_.insert(population_.end(), counts.two_vote, 2);
  }
}

Discrepancy DrawStream::next() {
  const std::int64_t n = counts_.total();
  int category = 0;
  if (mode_ == SamplingMode::with_replacement) {
    const std::int64_t r = std::uniform_int_distribution<std::int64_t>(0, n - 1)(rng_);
    category = r < counts_.correct ? 0 : (r < counts_.correct + counts_.one_vote ? 1 : 2);
  } else {
    if (drawn_ >= n)
      throw ExhaustedPopulation("population of " + std::to_string(n) + " exhausted");
    // Lazy Fisher-Yates: position drawn_ receives a uniform pick from the tail.
    const std::int64_t j = std::uniform_int_distribution<std::int64_t>(drawn_, n - 1)(rng_);
    std::swap(population_[static_cast<std::size_t>(drawn_)], population_[static_cast<std::size_t>(j)]);
    category = population_[static_cast<std::size_t>(drawn_)];
  }
  ++drawn_;
  switch (category) {
    case 1: return Discrepancy::one_vote_over;
    case 2: return Discrepancy::two_vote_over;
    default: return Discrepancy::none;
  }
}

std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string_view to_string(AuditStatus status) noexcept {
  switch (status) {
    case AuditStatus::continuing: return "CONTINUE";
    case AuditStatus::confirmed: return "REJECT-NULL";
    case AuditStatus::stalled: return "STALLED";
  }
  return "CONTINUE";
}

AuditSession::AuditSession(const BettingPlan& plan, const ContestSpec& spec)
    : plan_(&plan),
      spec_(spec),
      state_(plan.weights()),
      bets_(plan.components(), 0.0) {
  if (plan.is_constant()) {
    const auto bets = plan.constant_bets();
    cached_.resize(5);
    for (int d = 0; d < 5; ++d) {
      const double x = assorter_value(static_cast<Discrepancy>(d), spec_);
      cached_[d].reserve(bets.size());
      for (double lambda : bets) cached_[d].push_back(log_bet_factor(lambda, x));
    }
  }
}

void AuditSession::step(Discrepancy d) {
  if (status_ != AuditStatus::continuing) throw std::logic_error("audit has already finished");
  if (!cached_.empty()) {
    state_.apply_log_factors(cached_[static_cast<int>(d)]);
  } else {
    plan_->bets_for_draw(running_.draws_seen() + 1, running_, bets_);
    state_.apply(assorter_value(d, spec_), BetSequenceView(bets_));
  }
  running_.record(d);
  if (rejects(state_, spec_.risk_limit()))
    status_ = AuditStatus::confirmed;
  else if (state_.stalled())
    status_ = AuditStatus::stalled;
}

AuditStatus AuditSession::advance(Discrepancy d) {
  step(d);
  return status_;
}

AuditSession::Step AuditSession::observe(Discrepancy d) {
  if (status_ != AuditStatus::continuing) throw std::logic_error("audit has already finished");
  Step out;
  if (plan_->is_constant()) {
    out.bet = effective_bet(state_, plan_->constant_bets());
  } else {
    plan_->bets_for_draw(running_.draws_seen() + 1, running_, bets_);
    out.bet = effective_bet(state_, bets_);
  }
  step(d);
  out.draw = state_.draws_seen();
  out.x = assorter_value(d, spec_);
  out.p_value = p_value(state_);
  out.status = status_;
  return out;
}

AuditOutcome run_audit(DrawStream& stream, const BettingPlan& plan, const ContestSpec& spec,
                       std::int64_t cap) {
  if (cap < 1) throw InputError("cap must be positive");
  AuditSession session(plan, spec);
  AuditOutcome out;
  while (session.running().draws_seen() < cap) {
    const AuditStatus status = session.advance(stream.next());
    if (status != AuditStatus::continuing) break;
  }
  out.confirmed = session.status() == AuditStatus::confirmed;
  out.stalled = session.status() == AuditStatus::stalled;
  out.stopping_time = out.confirmed ? session.running().draws_seen() : cap;
  out.final_state = session.state();
  return out;
}

ScenarioResult summarize(std::vector<std::int64_t> stopping_times, std::int64_t cap,
                         std::uint64_t seed) {
  if (stopping_times.empty()) throw InputError("cannot summarize zero replications");
  ScenarioResult out;
  out.cap = cap;
  out.seed = seed;
  const auto r = static_cast<std::int64_t>(stopping_times.size());
  long double total = 0;
  for (auto t : stopping_times) {
    total += t;
    if (t == cap) ++out.capped_count;
  }
  out.mean = static_cast<double>(total / r);
  std::vector<std::int64_t> sorted = stopping_times;
  std::sort(sorted.begin(), sorted.end());
  const std::int64_t rank = (9 * r + 9) / 10;  // ceil(0.9 R)
  out.q90 = static_cast<double>(sorted[static_cast<std::size_t>(rank - 1)]);
  out.stopping_times = std::move(stopping_times);
  return out;
}

ScenarioResult replicate(const Scenario& scenario, unsigned threads) {
  const ContestSpec& spec = scenario.spec;
  const std::int64_t cap = scenario.effective_cap();
  if (scenario.replications < 1) throw InputError("replications must be positive");
  if (scenario.mode == SamplingMode::without_replacement && cap > spec.population_size())
    throw InputError("cap must not exceed N when sampling without replacement");

  const BettingPlan plan(resolve_with_truth(scenario.strategy, scenario.true_rates, spec), spec);
  const PopulationCounts counts = build_population(spec.population_size(), scenario.true_rates);

  const auto r = static_cast<std::size_t>(scenario.replications);
  std::vector<std::int64_t> times(r, 0);
  std::vector<char> stalled(r, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
      for (std::size_t i = next++; i < r; i = next++) {
        DrawStream stream(counts, scenario.mode, replicate_seed(scenario.seed, i));
        const AuditOutcome outcome = run_audit(stream, plan, spec, cap);
        times[i] = outcome.stopping_time;
        stalled[i] = outcome.stalled ? 1 : 0;
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = r;
    }
  };

  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(r)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ScenarioResult out = summarize(std::move(times), cap, scenario.seed);
  out.stalled_count = std::count(stalled.begin(), stalled.end(), 1);
  return out;
}

double geometric_mean_ratio(std::span<const ScenarioResult> a, std::span<const ScenarioResult> b) {
  if (a.size() != b.size()) throw InputError("result lists must be aligned and of equal length");
  if (a.empty()) throw UndefinedRatio("no scenarios to compare");
  double log_sum = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (!(a[s].mean > 0.0 && b[s].mean > 0.0))
      throw UndefinedRatio("scenario " + std::to_string(s) + " has a zero mean stopping time");
    log_sum += std::log(a[s].mean / b[s].mean);
  }
  return std::exp(log_sum / static_cast<double>(a.size()));
}

}  // namespace rla
