#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "rla/error.hpp"
#include "rla/martingale.hpp"

using namespace rla;

namespace {

WagerState step(const WagerState& s, double x, std::vector<double> bets) {
  return update(s, x, BetSequenceView(bets));
}

}  // namespace

TEST_CASE("fresh state") {
  const WagerState s;
  CHECK(s.components() == 1);
  CHECK(s.weights()[0] == 1.0);
  CHECK(p_value(s) == 1.0);
  CHECK_FALSE(s.stalled());
  CHECK(s.draws_seen() == 0);
}

TEST_CASE("zero bet leaves wealth unchanged") {
  WagerState s;
  for (double x : {0.0, 0.25, 0.5, 1.0}) {
    s = step(s, x, {0.0});
    CHECK(s.log_total_wealth() == 0.0);
  }
  CHECK(s.draws_seen() == 4);
}

TEST_CASE("maximal bet on a 2-vote overstatement goes broke") {
  WagerState s = step(WagerState{}, 0.6, {2.0});
  s = step(s, 0.0, {2.0});
  CHECK(s.stalled());
  CHECK(p_value(s) == 1.0);
  CHECK(std::isinf(s.log_wealth()[0]));
  // Broke forever after, whatever comes next.
  for (int i = 0; i < 50; ++i) s = step(s, 1.0, {2.0});
  CHECK(s.stalled());
  CHECK(p_value(s) == 1.0);
  CHECK_FALSE(rejects(s, 0.05));
}

TEST_CASE("error-free draws at lambda = 2 grow as (2a)^t") {
  const ContestSpec spec(0.20, 10000, 0.05);
  const double a = spec.correct_value();
  WagerState s;
  int first = 0;
  for (int t = 1; t <= 40; ++t) {
    s = step(s, a, {2.0});
    CHECK(s.log_total_wealth() == doctest::Approx(t * std::log(2 * a)).epsilon(1e-12));
    if (!first && rejects(s, 0.05)) first = t;
  }
  CHECK(first == 29);
}

TEST_CASE("p-value is the truncated reciprocal") {
  WagerState s;
  const double lf[] = {std::log(20.0)};
  s.apply_log_factors(lf);
  CHECK(p_value(s) == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(rejects(s, 0.05));

  WagerState down;
  down = step(down, 0.0, {1.0});
  CHECK(p_value(down) == 1.0);
}

TEST_CASE("bets and weights are validated") {
  const std::vector<double> bad{2.5};
  CHECK_THROWS_AS(BetSequenceView{bad}, InputError);
  const std::vector<double> negative{-0.1};
  CHECK_THROWS_AS(BetSequenceView{negative}, InputError);

  const std::vector<double> not_normalized{0.5, 0.6};
  CHECK_THROWS_AS(WagerState{not_normalized}, InputError);
  const std::vector<double> empty;
  CHECK_THROWS_AS(WagerState{std::span<const double>(empty)}, InputError);

  const std::vector<double> w{0.5, 0.5};
  WagerState mix(w);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(mix.apply(0.6, BetSequenceView(one)), InputError);
}

TEST_CASE("ALPHA eta reparameterization") {
  for (double v : {0.01, 0.1, 0.5, 1.0}) {
    const ContestSpec spec(v, 100, 0.05);
    CHECK(alpha_eta(2.0, spec) == doctest::Approx(spec.upper_bound()).epsilon(1e-15));
    CHECK(alpha_eta(0.0, spec) == 0.5);
  }
  const ContestSpec spec(0.10, 100, 0.05);
  CHECK(alpha_eta(1.6, spec) == doctest::Approx(0.942105).epsilon(1e-6));
  for (double lambda = 0.0; lambda <= 2.0; lambda += 0.125)
    CHECK(lambda_from_eta(alpha_eta(lambda, spec), spec) == doctest::Approx(lambda).epsilon(1e-14));
}

TEST_CASE("supermartingale: mean factor is 1 under a null-mean population") {
  // v = 0.1, p1 = 0.02, p2 = 0.04: mean a (1 - 0.06) + a/2 0.02 = 0.95 a = 1/2.
  const ContestSpec spec(0.10, 10000, 0.05);
  const double a = spec.correct_value();
  const double values[] = {a, 0.5 * a, 0.0};
  std::discrete_distribution<int> pick({0.94, 0.02, 0.04});
  for (double lambda : {0.3, 1.0, 1.9}) {
    std::mt19937_64 rng(11);
    const int n = 200000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = 1.0 + lambda * (values[pick(rng)] - 0.5);
      sum += t;
      sum_sq += t * t;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    CAPTURE(lambda);
    CHECK(std::abs(mean - 1.0) <= 3.0 * se);
  }
}

TEST_CASE("mixture with identical bets matches a single martingale") {
  const ContestSpec spec(0.05, 10000, 0.05);
  const double a = spec.correct_value();
  std::mt19937_64 rng(3);
  std::discrete_distribution<int> pick({0.97, 0.02, 0.01});
  const double values[] = {a, 0.5 * a, 0.0};
  for (int b : {2, 7, 64}) {
    std::vector<double> weights(b);
    double total = 0.0;
    for (int i = 0; i < b; ++i) total += (weights[i] = 1.0 + i);
    for (auto& w : weights) w /= total;
    WagerState single;
    WagerState mix(weights);
    const std::vector<double> one{1.3};
    const std::vector<double> many(b, 1.3);
    for (int t = 0; t < 500; ++t) {
      const double x = values[pick(rng)];
      single.apply(x, BetSequenceView(one));
      mix.apply(x, BetSequenceView(many));
    }
    CHECK(std::abs(mix.log_total_wealth() - single.log_total_wealth()) <=
          1e-9 * std::abs(single.log_total_wealth()));
  }
}

TEST_CASE("effective bet reproduces the mixture factor") {
  const std::vector<double> weights{0.2, 0.3, 0.5};
  const std::vector<double> lambdas{0.5, 1.2, 1.9};
  WagerState mix(weights);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xs(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double x = xs(rng);
    const double bet = effective_bet(mix, lambdas);
    const double expected = mix.log_total_wealth() + std::log1p(bet * (x - 0.5));
    mix.apply(x, BetSequenceView(lambdas));
    CHECK(mix.log_total_wealth() == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("monotonicity in the sign of x - 1/2") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> bet(0.01, 2.0);
  std::uniform_real_distribution<double> up(0.51, 1.05);
  std::uniform_real_distribution<double> down(0.0, 0.49);
  WagerState s;
  for (int i = 0; i < 1000; ++i) {
    const double before = s.log_total_wealth();
    const bool rise = i % 2 == 0;
    s = step(s, rise ? up(rng) : down(rng), {bet(rng)});
    if (s.stalled()) break;
    if (rise)
      CHECK(s.log_total_wealth() > before);
    else
      CHECK(s.log_total_wealth() < before);
  }
}

TEST_CASE("understatement values are accepted") {
  const ContestSpec spec(0.10, 100, 0.05);
  WagerState s = step(WagerState{}, spec.upper_bound(), {2.0});
  CHECK(s.log_total_wealth() == doctest::Approx(std::log(1 + 2 * (spec.upper_bound() - 0.5))));
}
