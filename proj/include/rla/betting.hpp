#pragma once

// Bet selection for comparison audits: Kelly-optimal ("oracle") bets from
// known overstatement rates and the practical strategies built on them.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rla/assort.hpp"

namespace rla {

/// E_F[log T] = p0 log(1 + l(a - 1/2)) + p1 log(1 - l(1 - a)/2) + p2 log(1 - l/2).
double expected_log_growth(double lambda, const RatePair& rates, const ContestSpec& spec);

/// d/dl E_F[log T]; the 2-vote term is -p2/(2 - l).
double expected_log_growth_slope(double lambda, const RatePair& rates, const ContestSpec& spec);

/// Kelly bet when there are no 1-vote overstatements:
/// (2 - 4 a p0) / (1 - 2a). Throws InfeasibleAlternative if a p0 <= 1/2.
double oracle_bet_closed_form(double p0, const ContestSpec& spec);

/// Kelly bet for arbitrary feasible rates, by bisection on the slope of
/// E_F[log T] over [0, 2). Returns exactly 2 only when p2 = 0 and the slope
/// stays positive. Throws InfeasibleAlternative for infeasible rates.
double oracle_bet_root(const RatePair& rates, const ContestSpec& spec);

/// Maximizes sum_j p_j log(1 + l (z_j - t)) over l in [0, 1/(t - z2)].
/// Throws InfeasibleAlternative when the mean of the support is <= t.
double optimal_bet_3point(const SupportSpec& support, const std::array<double, 3>& probs);

/// 4 xbar - 2 clamped to [0, 2]. Throws InfeasibleAlternative if xbar <= 1/2.
double apkelly_bet(double mean);

/// Draw history summary: draws seen so far and overstatement counts.
class RunningRates {
 public:
  void record(Discrepancy d) noexcept;
  void record(std::int64_t one_vote, std::int64_t two_vote, std::int64_t draws);

  std::int64_t draws_seen() const noexcept { return draws_; }
  std::int64_t count(int k) const;
  /// count_k / draws_seen, 0 before the first draw.
  double sample_rate(int k) const;

 private:
  std::int64_t draws_ = 0;
  std::int64_t one_vote_ = 0;
  std::int64_t two_vote_ = 0;
};

struct ShrinkTruncConfig {
  RatePair prior;       // a priori rates
  double d1 = 100.0;    // anchoring weight on prior p1
  double d2 = 1000.0;   // anchoring weight on prior p2
  double eps1 = 1e-5;   // floor on estimated p1
  double eps2 = 1e-5;   // floor on estimated p2; must be > 0 to rule out stalls

  /// Throws InputError for negative parameters, or eps2 == 0 unless
  /// allow_zero_eps2 is set.
  void validate(bool allow_zero_eps2 = false) const;
};

/// Shrink-trunc estimate of rate k in {1, 2} for draw i >= 1, given the
/// first i - 1 draws:
///   max(eps_k, (d_k prior_k + i phat_k(i-1)) / (d_k + i - 1)).
/// When d_k = 0 and i = 1 the ratio is undefined and max(eps_k, prior_k) is
/// returned.
double shrink_trunc_rate(int k, std::int64_t i, const RunningRates& running,
                         const ShrinkTruncConfig& cfg);

/// Scales a pair of rates toward zero until it is strictly inside the
/// alternative (slack >= 1e-6 on the hyperplane). Feasible pairs pass through.
RatePair clip_to_alternative(const RatePair& rates, const ContestSpec& spec);

/// Kelly bet at the shrink-trunc estimates for draw i (predictable).
double adaptive_bet(std::int64_t i, const RunningRates& running, const ShrinkTruncConfig& cfg,
                    const ContestSpec& spec);

struct UniformWeighting {};

/// Bivariate normal over (p1, p2), evaluated at grid points then rescaled.
struct NormalWeighting {
  double mean1 = 0.0;
  double mean2 = 0.0;
  double sd1 = 0.005;
  double sd2 = 0.0025;
  double rho = 0.25;
};

struct DiversifiedConfig {
  int grid_points_per_axis = 101;
  std::variant<UniformWeighting, NormalWeighting> weighting = UniformWeighting{};
};

struct MixtureComponent {
  RatePair rates;
  double lambda = 0.0;
  double theta = 0.0;
};

/// Feasible rate grid, the Kelly bet at each point and its mixture weight.
/// Weights sum to 1.
std::vector<MixtureComponent> diversified_bets(const DiversifiedConfig& cfg,
                                               const ContestSpec& spec);

/// Without-replacement "naive" update of an a priori rate:
///   (N prior_k - i phat_k(i-1)) / (N - i + 1), clamped to [0, 1].
/// Bets built on it grow more aggressive as overstatements are found; it is
/// provided to demonstrate that failure mode and is not recommended.
/// Throws ExhaustedPopulation when i > N.
double naive_wor_rate(int k, std::int64_t i, const RunningRates& running, double prior,
                      std::int64_t population_size);

// ---------------------------------------------------------------------------
// Strategy presets

/// Kelly bet at the true rates. Benchmarking only; the rates are filled from
/// the scenario when omitted.
struct OracleStrategy {
  std::optional<RatePair> rates;
};

/// Constant bet: either given directly or the Kelly bet at prior rates.
struct FixedStrategy {
  std::optional<double> lambda;
  RatePair prior;
};

struct AdaptiveStrategy {
  ShrinkTruncConfig config;
};

struct DiversifiedStrategy {
  DiversifiedConfig config;
};

/// 4 xbar - 2 at the true population mean (filled from the scenario when
/// omitted).
struct ApKellyStrategy {
  std::optional<double> mean;
};

struct NaiveWorStrategy {
  RatePair prior;
};

using BetStrategy = std::variant<OracleStrategy, FixedStrategy, AdaptiveStrategy,
                                 DiversifiedStrategy, ApKellyStrategy, NaiveWorStrategy>;

/// Preset name: oracle, fixed, adaptive, diversified, apkelly or naive-wor.
std::string_view strategy_name(const BetStrategy& strategy) noexcept;

/// Human-facing label; flags the oracle as benchmarking-only.
std::string strategy_label(const BetStrategy& strategy);

/// False for naive-wor.
bool is_recommended(const BetStrategy& strategy) noexcept;

extern const char* const kNaiveWorWarning;

/// Fills the oracle rates / apKelly mean from the true population when the
/// strategy leaves them unset.
BetStrategy resolve_with_truth(BetStrategy strategy, const RatePair& true_rates,
                               const ContestSpec& spec);

/// A strategy bound to a contest: mixture weights plus the rule giving the
/// bets for draw i from the first i - 1 draws. Immutable once built and safe
/// to share between concurrent audits.
class BettingPlan {
 public:
  BettingPlan(const BetStrategy& strategy, const ContestSpec& spec);

  std::string_view name() const noexcept { return name_; }
  std::size_t components() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::vector<MixtureComponent>& mixture() const noexcept { return mixture_; }

  /// True when the bets do not depend on the draw history.
  bool is_constant() const noexcept { return !constant_bets_.empty(); }
  std::span<const double> constant_bets() const noexcept { return constant_bets_; }

  /// Writes the bets for draw i (1-based) into `out` (size components()).
  void bets_for_draw(std::int64_t i, const RunningRates& running, std::span<double> out) const;

 private:
  BetStrategy strategy_;
  ContestSpec spec_;
  std::string name_;
  std::vector<double> weights_;
  std::vector<double> constant_bets_;
  std::vector<MixtureComponent> mixture_;
};

}  // namespace rla
