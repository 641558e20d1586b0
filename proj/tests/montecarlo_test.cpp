#include <cmath>
#include <vector>

#include "doctest.h"
#include "rla/error.hpp"
#include "rla/montecarlo.hpp"

using namespace rla;

TEST_CASE("population construction") {
  CHECK(build_population(10000, {0.0, 0.005}) == PopulationCounts{9950, 0, 50});
  CHECK(build_population(20000, {0.001, 0.0001}) == PopulationCounts{19978, 20, 2});
  CHECK(build_population(500, {0.0, 0.0}) == PopulationCounts{500, 0, 0});
  CHECK_THROWS_AS(build_population(3, {0.5, 0.5}), InfeasibleCounts);
  CHECK_THROWS_AS(build_population(0, {0.0, 0.0}), InputError);
}

TEST_CASE("draw streams") {
  const PopulationCounts counts{9000, 700, 300};

  SUBCASE("same seed, same sequence") {
    for (auto mode : {SamplingMode::with_replacement, SamplingMode::without_replacement}) {
      DrawStream a(counts, mode, 99);
      DrawStream b(counts, mode, 99);
      DrawStream c(counts, mode, 100);
      int differences = 0;
      for (int i = 0; i < 2000; ++i) {
        const auto da = a.next();
        CHECK(da == b.next());
        differences += da != c.next();
      }
      CHECK(differences > 0);
    }
  }

  SUBCASE("error-free population never yields an overstatement") {
    DrawStream s({1000, 0, 0}, SamplingMode::with_replacement, 1);
    for (int i = 0; i < 5000; ++i) CHECK(s.next() == Discrepancy::none);
  }

  SUBCASE("without replacement visits each ballot once") {
    DrawStream s(counts, SamplingMode::without_replacement, 5);
    std::int64_t seen[3] = {0, 0, 0};
    for (int i = 0; i < 10000; ++i) ++seen[static_cast<int>(s.next())];
    CHECK(seen[0] == 9000);
    CHECK(seen[1] == 700);
    CHECK(seen[2] == 300);
    CHECK(s.drawn() == 10000);
    CHECK_THROWS_AS(s.next(), ExhaustedPopulation);
  }

  SUBCASE("with replacement frequencies") {
    DrawStream s(counts, SamplingMode::with_replacement, 6);
    const int n = 200000;
    int two = 0;
    for (int i = 0; i < n; ++i) two += s.next() == Discrepancy::two_vote_over;
    const double se = std::sqrt(0.03 * 0.97 / n);
    CHECK(std::abs(two / double(n) - 0.03) <= 4 * se);
  }

  CHECK(parse_sampling_mode("without") == SamplingMode::without_replacement);
  CHECK(to_string(parse_sampling_mode("with-replacement")) == "with-replacement");
  CHECK_THROWS_AS(parse_sampling_mode("bootstrap"), InputError);
}

TEST_CASE("replicate seeds differ by index") {
  CHECK(replicate_seed(1, 0) != replicate_seed(1, 1));
  CHECK(replicate_seed(1, 0) != replicate_seed(2, 0));
  CHECK(replicate_seed(7, 3) == replicate_seed(7, 3));
}

TEST_CASE("single audits") {
  SUBCASE("lambda = 2 on an error-free population stops at the planned size") {
    const ContestSpec spec(0.20, 10000, 0.05);
    const BettingPlan plan(FixedStrategy{2.0, {}}, spec);
    DrawStream stream({10000, 0, 0}, SamplingMode::with_replacement, 3);
    const auto out = run_audit(stream, plan, spec, 10000);
    CHECK(out.confirmed);
    CHECK(out.stopping_time == 29);
  }

  SUBCASE("apKelly on an error-free population") {
    const ContestSpec spec(0.10, 100000, 0.05);
    const BettingPlan plan(resolve_with_truth(ApKellyStrategy{}, {0.0, 0.0}, spec), spec);
    DrawStream stream({100000, 0, 0}, SamplingMode::with_replacement, 3);
    const auto out = run_audit(stream, plan, spec, 100000);
    CHECK(out.confirmed);
    CHECK(out.stopping_time == 1083);
  }

  SUBCASE("stall reports the cap") {
    const ContestSpec spec(0.20, 100, 0.05);
    const BettingPlan plan(FixedStrategy{2.0, {}}, spec);
    DrawStream stream({0, 0, 100}, SamplingMode::with_replacement, 3);
    const auto out = run_audit(stream, plan, spec, 100);
    CHECK(out.stalled);
    CHECK_FALSE(out.confirmed);
    CHECK(out.stopping_time == 100);
  }

  SUBCASE("session refuses draws after it finishes") {
    const ContestSpec spec(0.20, 100, 0.05);
    const BettingPlan plan(FixedStrategy{2.0, {}}, spec);
    AuditSession session(plan, spec);
    const auto step = session.observe(Discrepancy::two_vote_over);
    CHECK(step.status == AuditStatus::stalled);
    CHECK(step.bet == 2.0);
    CHECK(to_string(step.status) == "STALLED");
    CHECK_THROWS_AS(session.observe(Discrepancy::none), std::logic_error);
  }

  SUBCASE("observe and advance agree for history-dependent plans") {
    const ContestSpec spec(0.05, 10000, 0.05);
    const BettingPlan plan(AdaptiveStrategy{{{0.001, 0.0001}}}, spec);
    AuditSession a(plan, spec);
    AuditSession b(plan, spec);
    DrawStream s({9900, 70, 30}, SamplingMode::with_replacement, 8);
    for (int i = 0; i < 400 && a.status() == AuditStatus::continuing; ++i) {
      const auto d = s.next();
      a.observe(d);
      b.advance(d);
      CHECK(a.state().log_total_wealth() == b.state().log_total_wealth());
    }
  }
}

TEST_CASE("summaries") {
  const auto one = summarize({17}, 100, 4);
  CHECK(one.mean == 17.0);
  CHECK(one.q90 == 17.0);
  CHECK(one.capped_count == 0);

  std::vector<std::int64_t> times;
  for (int i = 1; i <= 10; ++i) times.push_back(i * 10);
  const auto ten = summarize(times, 100, 4);
  CHECK(ten.mean == 55.0);
  CHECK(ten.q90 == 90.0);
  CHECK(ten.capped_count == 1);
  CHECK(ten.generator == "mt19937_64");
  CHECK_THROWS_AS(summarize({}, 100, 4), InputError);
}

TEST_CASE("replication") {
  Scenario sc;
  sc.spec = ContestSpec(0.10, 5000, 0.05);
  sc.true_rates = {0.002, 0.002};
  sc.strategy = AdaptiveStrategy{{{0.001, 0.001}}};
  sc.replications = 40;
  sc.seed = 12345;

  SUBCASE("results do not depend on the thread count") {
    const auto serial = replicate(sc, 1);
    const auto parallel = replicate(sc, 4);
    CHECK(serial.stopping_times == parallel.stopping_times);
    CHECK(serial.seed == 12345);
  }

  SUBCASE("cap is honoured and reported") {
    sc.cap = 20;
    const auto r = replicate(sc, 1);
    CHECK(r.capped_count == sc.replications);
    CHECK(r.mean == 20.0);
    CHECK(r.cap == 20);
  }

  SUBCASE("cap above N without replacement is rejected") {
    sc.mode = SamplingMode::without_replacement;
    sc.cap = 6000;
    CHECK_THROWS_AS(replicate(sc, 1), InputError);
  }

  SUBCASE("oracle on infeasible truth throws") {
    sc.true_rates = {0.0, 0.2};
    sc.strategy = OracleStrategy{};
    CHECK_THROWS_AS(replicate(sc, 1), InfeasibleAlternative);
  }
}

TEST_CASE("stall fraction at lambda = 2 matches the chance of an early 2-vote overstatement") {
  Scenario sc;
  sc.spec = ContestSpec(0.20, 100000, 0.05);
  sc.true_rates = {0.0, 0.02};
  sc.strategy = FixedStrategy{2.0, {}};
  sc.replications = 1000;
  sc.cap = 1000;
  sc.seed = 77;
  const auto r = replicate(sc, 1);
  const double expected = 1.0 - std::pow(0.98, 29);
  const double fraction = static_cast<double>(r.stalled_count) / sc.replications;
  const double se = std::sqrt(expected * (1 - expected) / sc.replications);
  CHECK(std::abs(fraction - expected) <= 3 * se);
  CHECK(r.capped_count == r.stalled_count);
}

TEST_CASE("geometric mean ratio") {
  const std::vector<ScenarioResult> a{summarize({10, 20}, 100, 0), summarize({40}, 100, 0)};
  const std::vector<ScenarioResult> b{summarize({30}, 100, 0), summarize({10}, 100, 0)};
  CHECK(geometric_mean_ratio(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  // sqrt(15/30 * 40/10)
  CHECK(geometric_mean_ratio(a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(geometric_mean_ratio(a, std::span<const ScenarioResult>(b).first(1)), InputError);
  CHECK_THROWS_AS(geometric_mean_ratio({}, {}), UndefinedRatio);
  const std::vector<ScenarioResult> zero{summarize({0}, 100, 0), summarize({0}, 100, 0)};
  CHECK_THROWS_AS(geometric_mean_ratio(zero, b), UndefinedRatio);
}
