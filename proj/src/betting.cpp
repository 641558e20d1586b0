#include "rla/betting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rla/error.hpp"

namespace rla {

namespace {

constexpr double kRootTolerance = 1e-9;
constexpr int kMaxBisections = 200;
constexpr double kClipMargin = 1e-6;

void check_rate_index(int k) {
  if (k != 1 && k != 2) throw InputError("rate index k must be 1 or 2, got " + std::to_string(k));
}

void check_support(const SupportSpec& s) {
  const auto& z = s.values;
  if (!(z[2] >= 0.0 && z[1] >= z[2] && z[0] >= z[1] && z[0] > z[2]))
    throw InputError("support must satisfy z0 >= z1 >= z2 >= 0 with z0 > z2");
  if (!(s.threshold > z[2] && s.threshold < z[0]))
    throw InputError("threshold must lie strictly between z2 and z0");
}

// Slope of sum_j p_j log(1 + l d_j) with d_j = z_j - t. Strictly decreasing in l.
double support_slope(double lambda, const std::array<double, 3>& gaps,
                     const std::array<double, 3>& probs) {
  double slope = 0.0;
  for (int j = 0; j < 3; ++j) {
    if (probs[j] > 0.0) slope += probs[j] * gaps[j] / (1.0 + lambda * gaps[j]);
  }
  return slope;
}

}  // namespace

double expected_log_growth(double lambda, const RatePair& rates, const ContestSpec& spec) {
  const double a = spec.correct_value();
  double value = 0.0;
  if (rates.p0() > 0.0) value += rates.p0() * std::log1p(lambda * (a - 0.5));
  if (rates.p1 > 0.0) value += rates.p1 * std::log1p(-lambda * (1.0 - a) / 2.0);
  if (rates.p2 > 0.0) value += rates.p2 * std::log1p(-lambda / 2.0);
  return value;
}

double expected_log_growth_slope(double lambda, const RatePair& rates, const ContestSpec& spec) {
  const double a = spec.correct_value();
  return (a - 0.5) * rates.p0() / (1.0 + lambda * (a - 0.5)) -
         (1.0 - a) * rates.p1 / (2.0 - lambda * (1.0 - a)) - rates.p2 / (2.0 - lambda);
}

double oracle_bet_closed_form(double p0, const ContestSpec& spec) {
  const double a = spec.correct_value();
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw InputError("p0 must be in [0, 1]");
  if (!(a * p0 > 0.5))
    throw InfeasibleAlternative("a * p0 = " + std::to_string(a * p0) + " is not above 1/2");
  return std::min(2.0, (2.0 - 4.0 * a * p0) / (1.0 - 2.0 * a));
}

double optimal_bet_3point(const SupportSpec& support, const std::array<double, 3>& probs) {
  check_support(support);
  double total = 0.0;
  double mean = 0.0;
  for (int j = 0; j < 3; ++j) {
    if (!(probs[j] >= 0.0)) throw InputError("probabilities must be nonnegative");
    total += probs[j];
    mean += probs[j] * support.values[j];
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("probabilities must sum to 1");
  if (!(mean > support.threshold))
    throw InfeasibleAlternative("support mean " + std::to_string(mean) +
                                " does not exceed threshold " + std::to_string(support.threshold));

  const double t = support.threshold;
  const std::array<double, 3> gaps{support.values[0] - t, support.values[1] - t,
                                   support.values[2] - t};
  const double max_bet = 1.0 / (t - support.values[2]);

  // Without mass on the bottom point the objective stays finite at max_bet.
  if (probs[2] == 0.0 && support_slope(max_bet, gaps, probs) >= 0.0) return max_bet;

  double lo = 0.0;
  double hi = max_bet - 0.5e-12 * max_bet;
  if (support_slope(hi, gaps, probs) > 0.0) return hi;
  for (int iter = 0; iter < kMaxBisections && hi - lo > kRootTolerance; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (support_slope(mid, gaps, probs) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double oracle_bet_root(const RatePair& rates, const ContestSpec& spec) {
  if (!feasible_under_alternative(rates, spec))
    throw InfeasibleAlternative("rates (p1=" + std::to_string(rates.p1) +
                                ", p2=" + std::to_string(rates.p2) +
                                ") do not put the population mean above 1/2");
  return optimal_bet_3point(SupportSpec::plurality(spec), {rates.p0(), rates.p1, rates.p2});
}

double apkelly_bet(double mean) {
  if (!(mean > 0.5))
    throw InfeasibleAlternative("apKelly needs a mean above 1/2, got " + std::to_string(mean));
  return std::clamp(4.0 * mean - 2.0, 0.0, 2.0);
}

void RunningRates::record(Discrepancy d) noexcept {
  ++draws_;
  if (d == Discrepancy::one_vote_over) ++one_vote_;
  if (d == Discrepancy::two_vote_over) ++two_vote_;
}

void RunningRates::record(std::int64_t one_vote, std::int64_t two_vote, std::int64_t draws) {
  if (one_vote < 0 || two_vote < 0 || one_vote + two_vote > draws)
    throw InputError("overstatement counts must be nonnegative and at most the draw count");
  draws_ += draws;
  one_vote_ += one_vote;
  two_vote_ += two_vote;
}

std::int64_t RunningRates::count(int k) const {
  check_rate_index(k);
  return k == 1 ? one_vote_ : two_vote_;
}

double RunningRates::sample_rate(int k) const {
  if (draws_ == 0) return 0.0;
  return static_cast<double>(count(k)) / static_cast<double>(draws_);
}

void ShrinkTruncConfig::validate(bool allow_zero_eps2) const {
  (void)RatePair::checked(prior.p1, prior.p2);
  if (!(d1 >= 0.0 && d2 >= 0.0)) throw InputError("anchoring weights d1, d2 must be >= 0");
  if (!(eps1 >= 0.0 && eps2 >= 0.0)) throw InputError("floors eps1, eps2 must be >= 0");
  if (eps2 == 0.0 && !allow_zero_eps2)
    throw InputError("eps2 must be > 0 to rule out stalls (override explicitly to allow 0)");
}

double shrink_trunc_rate(int k, std::int64_t i, const RunningRates& running,
                         const ShrinkTruncConfig& cfg) {
  check_rate_index(k);
  if (i < 1) throw InputError("draw index must be >= 1");
  if (running.draws_seen() != i - 1)
    throw InputError("running rates cover " + std::to_string(running.draws_seen()) +
                     " draws, expected " + std::to_string(i - 1));
  const double d = k == 1 ? cfg.d1 : cfg.d2;
  const double prior = k == 1 ? cfg.prior.p1 : cfg.prior.p2;
  const double eps = k == 1 ? cfg.eps1 : cfg.eps2;
  const double denom = d + static_cast<double>(i - 1);
  if (denom == 0.0) return std::max(eps, prior);
  const double estimate = (d * prior + static_cast<double>(i) * running.sample_rate(k)) / denom;
  return std::max(eps, estimate);
}

RatePair clip_to_alternative(const RatePair& rates, const ContestSpec& spec) {
  if (alternative_slack(rates, spec) >= kClipMargin) return rates;
  const double load = rates.p2 + 0.5 * rates.p1;
  if (load <= 0.0) return rates;
  // a (v/2 - c load) = margin
  const double target = 0.5 * spec.margin() - kClipMargin / spec.correct_value();
  const double scale = std::max(0.0, target / load);
  return {rates.p1 * scale, rates.p2 * scale};
}

double adaptive_bet(std::int64_t i, const RunningRates& running, const ShrinkTruncConfig& cfg,
                    const ContestSpec& spec) {
  const RatePair estimate{shrink_trunc_rate(1, i, running, cfg), shrink_trunc_rate(2, i, running, cfg)};
  return oracle_bet_root(clip_to_alternative(estimate, spec), spec);
}

std::vector<MixtureComponent> diversified_bets(const DiversifiedConfig& cfg,
                                               const ContestSpec& spec) {
  const std::vector<RatePair> grid = feasible_rate_region(spec, cfg.grid_points_per_axis);
  std::vector<MixtureComponent> out;
  out.reserve(grid.size());
  for (const RatePair& rates : grid) out.push_back({rates, oracle_bet_root(rates, spec), 0.0});

  if (const auto* normal = std::get_if<NormalWeighting>(&cfg.weighting)) {
    if (!(normal->sd1 > 0.0 && normal->sd2 > 0.0))
      throw InputError("normal weighting needs positive standard deviations");
    if (!(std::abs(normal->rho) < 1.0)) throw InputError("normal weighting needs |rho| < 1");
    // Joint density up to a constant, in log space so distant points do not
    // underflow the whole grid.
    std::vector<double> log_density;
    log_density.reserve(out.size());
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& c : out) {
      const double z1 = (c.rates.p1 - normal->mean1) / normal->sd1;
      const double z2 = (c.rates.p2 - normal->mean2) / normal->sd2;
      const double q = (z1 * z1 - 2.0 * normal->rho * z1 * z2 + z2 * z2) / (1.0 - normal->rho * normal->rho);
      log_density.push_back(-0.5 * q);
      top = std::max(top, log_density.back());
    }
    double total = 0.0;
    for (std::size_t b = 0; b < out.size(); ++b) {
      out[b].theta = std::exp(log_density[b] - top);
      total += out[b].theta;
    }
    for (auto& c : out) c.theta /= total;
  } else {
    const double theta = 1.0 / static_cast<double>(out.size());
    for (auto& c : out) c.theta = theta;
  }
  return out;
}

double naive_wor_rate(int k, std::int64_t i, const RunningRates& running, double prior,
                      std::int64_t population_size) {
  check_rate_index(k);
  if (i < 1) throw InputError("draw index must be >= 1");
  if (i > population_size)
    throw ExhaustedPopulation("draw " + std::to_string(i) + " exceeds population size " +
                              std::to_string(population_size));
  const double n = static_cast<double>(population_size);
  const double estimate = (n * prior - static_cast<double>(i) * running.sample_rate(k)) /
                          (n - static_cast<double>(i) + 1.0);
  return std::clamp(estimate, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

const char* const kNaiveWorWarning =
    "warning: naive-wor bets grow more aggressive as overstatements are found; "
    "once the sample holds more 2-vote overstatements than the prior allows for, "
    "one more stalls the audit. Not recommended.";

std::string_view strategy_name(const BetStrategy& strategy) noexcept {
  struct Visitor {
    std::string_view operator()(const OracleStrategy&) const { return "oracle"; }
    std::string_view operator()(const FixedStrategy&) const { return "fixed"; }
    std::string_view operator()(const AdaptiveStrategy&) const { return "adaptive"; }
    std::string_view operator()(const DiversifiedStrategy&) const { return "diversified"; }
    std::string_view operator()(const ApKellyStrategy&) const { return "apkelly"; }
    std::string_view operator()(const NaiveWorStrategy&) const { return "naive-wor"; }
  };
  return std::visit(Visitor{}, strategy);
}

std::string strategy_label(const BetStrategy& strategy) {
  if (std::holds_alternative<OracleStrategy>(strategy))
    return "oracle (requires true rates; benchmarking only)";
  if (std::holds_alternative<NaiveWorStrategy>(strategy)) return "naive-wor (not recommended)";
  return std::string(strategy_name(strategy));
}

bool is_recommended(const BetStrategy& strategy) noexcept {
  return !std::holds_alternative<NaiveWorStrategy>(strategy);
}

BetStrategy resolve_with_truth(BetStrategy strategy, const RatePair& true_rates,
                               const ContestSpec& spec) {
  if (auto* oracle = std::get_if<OracleStrategy>(&strategy); oracle && !oracle->rates)
    oracle->rates = true_rates;
  if (auto* apk = std::get_if<ApKellyStrategy>(&strategy); apk && !apk->mean)
    apk->mean = population_mean(true_rates, spec);
  return strategy;
}

BettingPlan::BettingPlan(const BetStrategy& strategy, const ContestSpec& spec)
    : strategy_(strategy), spec_(spec), name_(strategy_name(strategy)) {
  if (const auto* s = std::get_if<OracleStrategy>(&strategy_)) {
    if (!s->rates) throw InputError("oracle strategy requires the true rates");
    constant_bets_ = {oracle_bet_root(*s->rates, spec_)};
  } else if (const auto* s = std::get_if<FixedStrategy>(&strategy_)) {
    if (s->lambda) {
      if (!(*s->lambda >= 0.0 && *s->lambda <= 2.0))
        throw InputError("fixed bet must be in [0, 2], got " + std::to_string(*s->lambda));
      constant_bets_ = {*s->lambda};
    } else {
      constant_bets_ = {oracle_bet_root(s->prior, spec_)};
    }
  } else if (const auto* s = std::get_if<AdaptiveStrategy>(&strategy_)) {
    s->config.validate();
  } else if (const auto* s = std::get_if<DiversifiedStrategy>(&strategy_)) {
    mixture_ = diversified_bets(s->config, spec_);
    for (const auto& c : mixture_) {
      weights_.push_back(c.theta);
      constant_bets_.push_back(c.lambda);
    }
  } else if (const auto* s = std::get_if<ApKellyStrategy>(&strategy_)) {
    if (!s->mean) throw InputError("apkelly strategy requires the population mean");
    constant_bets_ = {apkelly_bet(*s->mean)};
  } else if (const auto* s = std::get_if<NaiveWorStrategy>(&strategy_)) {
    (void)RatePair::checked(s->prior.p1, s->prior.p2);
  }
  if (weights_.empty()) weights_ = {1.0};
}

void BettingPlan::bets_for_draw(std::int64_t i, const RunningRates& running,
                                std::span<double> out) const {
  if (out.size() != components()) throw InputError("bet buffer has the wrong size");
  if (is_constant()) {
    std::copy(constant_bets_.begin(), constant_bets_.end(), out.begin());
  } else if (const auto* s = std::get_if<AdaptiveStrategy>(&strategy_)) {
    out[0] = adaptive_bet(i, running, s->config, spec_);
  } else if (const auto* s = std::get_if<NaiveWorStrategy>(&strategy_)) {
    const std::int64_t n = spec_.population_size();
    const RatePair estimate{naive_wor_rate(1, i, running, s->prior.p1, n),
                            naive_wor_rate(2, i, running, s->prior.p2, n)};
    out[0] = oracle_bet_root(clip_to_alternative(estimate, spec_), spec_);
  }
}

}  // namespace rla
