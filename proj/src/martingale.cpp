#include "rla/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rla/error.hpp"

namespace rla {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Terms more than this many nats below the largest one contribute less than
// B * 2e-22 relative to the sum and are skipped.
constexpr double kNegligibleGap = 50.0;

}  // namespace

BetSequenceView::BetSequenceView(std::span<const double> lambdas) : lambdas_(lambdas) {
  for (double lambda : lambdas_) {
    if (!(lambda >= 0.0 && lambda <= 2.0))
      throw InputError("bet must be in [0, 2], got " + std::to_string(lambda));
  }
}

double log_bet_factor(double lambda, double x) {
  const double step = lambda * (x - 0.5);
  RLA_INVARIANT(step >= -1.0, "negative bet factor: lambda=" + std::to_string(lambda) +
                                  " x=" + std::to_string(x));
  return std::log1p(step);
}

WagerState::WagerState() : log_wealth_{0.0}, weights_{1.0}, log_weights_{0.0} {}

WagerState::WagerState(std::span<const double> weights)
    : log_wealth_(weights.size(), 0.0), weights_(weights.begin(), weights.end()) {
  if (weights_.empty()) throw InputError("mixture needs at least one component");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw InputError("mixture weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("mixture weights must sum to 1");
  log_weights_.reserve(weights_.size());
  for (double w : weights_) log_weights_.push_back(w > 0.0 ? std::log(w) : kNegInf);
  refresh_total();
}

void WagerState::apply(double x, const BetSequenceView& bets) {
  if (bets.size() != log_wealth_.size())
    throw InputError("expected " + std::to_string(log_wealth_.size()) + " bets, got " +
                     std::to_string(bets.size()));
  const auto lambdas = bets.lambdas();
  for (std::size_t b = 0; b < log_wealth_.size(); ++b) {
    log_wealth_[b] += log_bet_factor(lambdas[b], x);
  }
  ++draws_seen_;
  refresh_total();
}

void WagerState::apply_log_factors(std::span<const double> log_factors) {
  if (log_factors.size() != log_wealth_.size())
    throw InputError("expected " + std::to_string(log_wealth_.size()) + " log-factors, got " +
                     std::to_string(log_factors.size()));
  for (std::size_t b = 0; b < log_wealth_.size(); ++b) log_wealth_[b] += log_factors[b];
  ++draws_seen_;
  refresh_total();
}

void WagerState::refresh_total() {
  const std::size_t n = log_wealth_.size();
  if (n == 1) {
    log_total_ = log_wealth_[0] + log_weights_[0];
  } else {
    double top = kNegInf;
    for (std::size_t b = 0; b < n; ++b) top = std::max(top, log_wealth_[b] + log_weights_[b]);
    if (top == kNegInf) {
      log_total_ = kNegInf;
    } else {
      double sum = 0.0;
      const double floor = top - kNegligibleGap;
      for (std::size_t b = 0; b < n; ++b) {
        const double term = log_wealth_[b] + log_weights_[b];
        if (term > floor) sum += std::exp(term - top);
      }
      log_total_ = top + std::log(sum);
    }
  }
  stalled_ = (log_total_ == kNegInf);
}

WagerState update(WagerState state, double x, const BetSequenceView& bets) {
  state.apply(x, bets);
  return state;
}

double p_value(const WagerState& state) noexcept {
  if (state.stalled()) return 1.0;
  return std::min(1.0, std::exp(-state.log_total_wealth()));
}

bool rejects(const WagerState& state, double alpha) noexcept {
  return state.log_total_wealth() >= -std::log(alpha);
}

double effective_bet(const WagerState& state, std::span<const double> lambdas) {
  if (lambdas.size() != state.components())
    throw InputError("effective_bet: bet count does not match component count");
  if (state.components() == 1) return lambdas[0];
  if (state.stalled()) return 0.0;
  const auto lw = state.log_wealth();
  const auto w = state.weights();
  const double total = state.log_total_wealth();
  double bet = 0.0;
  for (std::size_t b = 0; b < lambdas.size(); ++b) {
    if (w[b] > 0.0 && lw[b] != kNegInf) bet += lambdas[b] * w[b] * std::exp(lw[b] - total);
  }
  return std::clamp(bet, 0.0, 2.0);
}

double alpha_eta(double lambda, const ContestSpec& spec) noexcept {
  return 0.5 * (1.0 + lambda * (spec.upper_bound() - 0.5));
}

double lambda_from_eta(double eta, const ContestSpec& spec) noexcept {
  return (2.0 * eta - 1.0) / (spec.upper_bound() - 0.5);
}

}  // namespace rla
