#pragma once

// Betting supermartingale M_t = prod_i [1 + lambda_i (X_i - 1/2)] and weighted
// mixtures of such martingales, accumulated in log space.

#include <cstdint>
#include <span>
#include <vector>

#include "rla/assort.hpp"

namespace rla {

/// Bets for the next draw, one per mixture component. Every bet is in [0, 2].
class BetSequenceView {
 public:
  /// Throws InputError if any bet lies outside [0, 2].
  explicit BetSequenceView(std::span<const double> lambdas);

  std::span<const double> lambdas() const noexcept { return lambdas_; }
  std::size_t size() const noexcept { return lambdas_.size(); }

 private:
  std::span<const double> lambdas_;
};

/// log(1 + lambda (x - 1/2)); -infinity when the factor is exactly zero.
/// Aborts if the factor is negative.
double log_bet_factor(double lambda, double x);

class WagerState {
 public:
  /// A single martingale with M_0 = 1.
  WagerState();
  /// A mixture with the given component weights; each M_0 = 1. Weights must
  /// be nonnegative and sum to 1 (to within 1e-9).
  explicit WagerState(std::span<const double> weights);

  std::size_t components() const noexcept { return log_wealth_.size(); }
  std::span<const double> log_wealth() const noexcept { return log_wealth_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::int64_t draws_seen() const noexcept { return draws_seen_; }
  bool stalled() const noexcept { return stalled_; }

  /// log sum_b theta_b exp(log_wealth_b); -infinity when stalled.
  double log_total_wealth() const noexcept { return log_total_; }

  /// In-place counterpart of update().
  void apply(double x, const BetSequenceView& bets);

  /// Advances every component by a precomputed log-factor (one per
  /// component). Used when the same factors recur across draws.
  void apply_log_factors(std::span<const double> log_factors);

 private:
  void refresh_total();

  std::vector<double> log_wealth_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::int64_t draws_seen_ = 0;
  bool stalled_ = false;
  double log_total_ = 0.0;
};

/// Returns the state after observing assorter value x with the given bets.
/// x must lie in [0, 2a]; understatements are accepted.
WagerState update(WagerState state, double x, const BetSequenceView& bets);

/// min(1, 1/M_t); exactly 1 once stalled.
double p_value(const WagerState& state) noexcept;

/// True when P_t <= alpha, i.e. M_t >= 1/alpha.
bool rejects(const WagerState& state, double alpha) noexcept;

/// The bet a single martingale would need to reproduce the mixture's next
/// factor: wealth-weighted average of the component bets.
double effective_bet(const WagerState& state, std::span<const double> lambdas);

/// ALPHA reparameterization eta = (1 + lambda (u - 1/2)) / 2 and its inverse.
double alpha_eta(double lambda, const ContestSpec& spec) noexcept;
double lambda_from_eta(double eta, const ContestSpec& spec) noexcept;

}  // namespace rla
