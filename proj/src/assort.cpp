#include "rla/assort.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "rla/error.hpp"

namespace rla {

void invariant_violation(const char* file, int line, const std::string& message) {
  std::fprintf(stderr, "rla: invariant violated at %s:%d: %s\n", file, line, message.c_str());
  std::abort();
}

ContestSpec::ContestSpec(double diluted_margin, std::int64_t population_size, double risk_limit)
    : margin_(diluted_margin), population_size_(population_size), risk_limit_(risk_limit) {
  if (!(diluted_margin > 0.0 && diluted_margin <= 1.0))
    throw InputError("diluted_margin must be in (0, 1], got " + std::to_string(diluted_margin));
  if (population_size < 1)
    throw InputError("population_size must be positive, got " + std::to_string(population_size));
  if (!(risk_limit > 0.0 && risk_limit < 1.0))
    throw InputError("risk_limit must be in (0, 1), got " + std::to_string(risk_limit));
  correct_value_ = 1.0 / (2.0 - diluted_margin);
}

RatePair RatePair::checked(double p1, double p2) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw InputError("p1 must be in [0, 1], got " + std::to_string(p1));
  if (!(p2 >= 0.0 && p2 <= 1.0)) throw InputError("p2 must be in [0, 1], got " + std::to_string(p2));
  if (p1 + p2 > 1.0) throw InputError("p1 + p2 must not exceed 1");
  return {p1, p2};
}

// a - 1/2 = a v / 2, so the slack is a (v/2 - p2 - p1/2). Written this way the
// boundary points of the rate grid land exactly on zero.
double alternative_slack(const RatePair& rates, const ContestSpec& spec) noexcept {
  const double a = spec.correct_value();
  return a * (0.5 * spec.margin() - rates.p2 - 0.5 * rates.p1);
}

bool feasible_under_alternative(const RatePair& rates, const ContestSpec& spec) noexcept {
  return alternative_slack(rates, spec) > 0.0;
}

namespace {

bool is_assort_value(double x) { return x == 0.0 || x == 0.5 || x == 1.0; }

}  // namespace

void validate(const ComparisonRecord& rec) {
  if (!is_assort_value(rec.cvr_assort))
    throw InputError("cvr_assort must be 0, 0.5 or 1 (ballot '" + rec.ballot_id + "')");
  if (!is_assort_value(rec.mvr_assort))
    throw InputError("mvr_assort must be 0, 0.5 or 1 (ballot '" + rec.ballot_id + "')");
}

double overstatement(const ComparisonRecord& rec) {
  validate(rec);
  return rec.cvr_assort - rec.mvr_assort;
}

Discrepancy classify(const ComparisonRecord& rec) {
  const double omega = overstatement(rec);
  if (omega == 0.0) return Discrepancy::none;
  if (omega == 0.5) return Discrepancy::one_vote_over;
  if (omega == 1.0) return Discrepancy::two_vote_over;
  if (omega == -0.5) return Discrepancy::one_vote_under;
  return Discrepancy::two_vote_under;
}

double overstatement_of(Discrepancy d) noexcept {
  switch (d) {
    case Discrepancy::none: return 0.0;
    case Discrepancy::one_vote_over: return 0.5;
    case Discrepancy::two_vote_over: return 1.0;
    case Discrepancy::one_vote_under: return -0.5;
    case Discrepancy::two_vote_under: return -1.0;
  }
  return 0.0;
}

ComparisonRecord example_record(Discrepancy d, std::string ballot_id) {
  switch (d) {
    case Discrepancy::none: return {std::move(ballot_id), 1.0, 1.0};
    case Discrepancy::one_vote_over: return {std::move(ballot_id), 1.0, 0.5};
    case Discrepancy::two_vote_over: return {std::move(ballot_id), 1.0, 0.0};
    case Discrepancy::one_vote_under: return {std::move(ballot_id), 0.5, 1.0};
    case Discrepancy::two_vote_under: return {std::move(ballot_id), 0.0, 1.0};
  }
  return {std::move(ballot_id), 1.0, 1.0};
}

double overstatement_assorter(const ComparisonRecord& rec, const ContestSpec& spec) {
  return (1.0 - overstatement(rec)) / (2.0 - spec.margin());
}

double assorter_value(Discrepancy d, const ContestSpec& spec) noexcept {
  switch (d) {
    case Discrepancy::none: return spec.correct_value();
    case Discrepancy::one_vote_over: return 0.5 * spec.correct_value();
    case Discrepancy::two_vote_over: return 0.0;
    case Discrepancy::one_vote_under: return 1.5 * spec.correct_value();
    case Discrepancy::two_vote_under: return spec.upper_bound();
  }
  return spec.correct_value();
}

double population_mean(const RatePair& rates, const ContestSpec& spec) noexcept {
  const double a = spec.correct_value();
  return a * rates.p0() + 0.5 * a * rates.p1;
}

std::vector<RatePair> feasible_rate_region(const ContestSpec& spec, int grid_points_per_axis) {
  if (grid_points_per_axis < 2)
    throw InputError("grid_points_per_axis must be at least 2, got " +
                     std::to_string(grid_points_per_axis));
  const int last = grid_points_per_axis - 1;
  const double v = spec.margin();
  std::vector<RatePair> out;
  // p1 = v j/last and p2 = (v/2) k/last, so the hyperplane test
  // p2 + p1/2 < v/2 reduces to j + k < last on the integer indices.
  for (int j = 0; j <= last; ++j) {
    for (int k = 0; j + k < last; ++k) {
      out.push_back({v * j / last, 0.5 * v * k / last});
    }
  }
  return out;
}

SupportSpec SupportSpec::plurality(const ContestSpec& spec) {
  const double a = spec.correct_value();
  return {{a, 0.5 * a, 0.0}, 0.5};
}

SupportSpec SupportSpec::supermajority(const ContestSpec& spec, double winning_fraction) {
  const double f = winning_fraction;
  if (!(f > 0.5 && f <= 1.0))
    throw InputError("winning_fraction must be in (1/2, 1], got " + std::to_string(f));
  const double a = spec.correct_value();
  const double shift = (1.0 - 1.0 / (2.0 * f)) * a;
  return {{a - shift, (1.5 - 1.0 / (2.0 * f)) * a - shift, 0.0}, 0.5 - shift};
}

}  // namespace rla
