#pragma once

// Overstatement-assorter arithmetic for ballot-level comparison audits of
// plurality contests (and the shifted three-point support of supermajority
// contests).

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rla {

/// Contest parameters: diluted margin v, population size N and risk limit
/// alpha. Derives the correct-CVR assorter value a = 1/(2 - v) and the
/// population upper bound u = 2a.
class ContestSpec {
 public:
  ContestSpec(double diluted_margin, std::int64_t population_size, double risk_limit);

  double margin() const noexcept { return margin_; }
  std::int64_t population_size() const noexcept { return population_size_; }
  double risk_limit() const noexcept { return risk_limit_; }

  /// a: value of the overstatement assorter on a correct CVR.
  double correct_value() const noexcept { return correct_value_; }
  /// u = 2a: value on a 2-vote understatement, the population upper bound.
  double upper_bound() const noexcept { return 2.0 * correct_value_; }

 private:
  double margin_;
  std::int64_t population_size_;
  double risk_limit_;
  double correct_value_;
};

/// Rates of 1-vote (p1) and 2-vote (p2) overstatements; p0 = 1 - p1 - p2.
struct RatePair {
  double p1 = 0.0;
  double p2 = 0.0;

  /// Throws InputError unless p1, p2 >= 0 and p1 + p2 <= 1.
  static RatePair checked(double p1, double p2);

  double p0() const noexcept { return 1.0 - p1 - p2; }

  friend bool operator==(const RatePair&, const RatePair&) = default;
};

/// (a - 1/2) - (a p2 + (a/2) p1). Positive exactly when the population mean
/// exceeds 1/2.
double alternative_slack(const RatePair& rates, const ContestSpec& spec) noexcept;

/// a p2 + (a/2) p1 < a - 1/2.
bool feasible_under_alternative(const RatePair& rates, const ContestSpec& spec) noexcept;

/// Classification of a ballot comparison by its overstatement
/// omega = A(cvr) - A(mvr).
enum class Discrepancy {
  none,            // omega = 0
  one_vote_over,   // omega = 1/2
  two_vote_over,   // omega = 1
  one_vote_under,  // omega = -1/2
  two_vote_under,  // omega = -1
};

struct ComparisonRecord {
  std::string ballot_id;
  double cvr_assort = 1.0;  // A(c_i) in {0, 1/2, 1}
  double mvr_assort = 1.0;  // A(b_i) in {0, 1/2, 1}
};

/// Throws InputError naming `cvr_assort` or `mvr_assort` if either is not
/// one of 0, 1/2, 1.
void validate(const ComparisonRecord& rec);

double overstatement(const ComparisonRecord& rec);
Discrepancy classify(const ComparisonRecord& rec);
double overstatement_of(Discrepancy d) noexcept;

/// The record a correctly-interpreted winner ballot would produce for the
/// given discrepancy (used when exporting simulated streams).
ComparisonRecord example_record(Discrepancy d, std::string ballot_id);

/// x = (1 - omega) / (2 - v).
double overstatement_assorter(const ComparisonRecord& rec, const ContestSpec& spec);
double assorter_value(Discrepancy d, const ContestSpec& spec) noexcept;

/// a p0 + (a/2) p1.
double population_mean(const RatePair& rates, const ContestSpec& spec) noexcept;

/// Feasible overstatement-rate grid: equally spaced p1 on [0, v] and p2 on
/// [0, v/2] (both endpoints included), with every point on or beyond the
/// hyperplane a p2 + (a/2) p1 = a - 1/2 removed. Row-major in p1, then p2.
std::vector<RatePair> feasible_rate_region(const ContestSpec& spec, int grid_points_per_axis);

/// Three-point support z0 > z1 > z2 >= 0 with null-mean threshold t.
struct SupportSpec {
  std::array<double, 3> values{};
  double threshold = 0.5;

  /// (a, a/2, 0) with t = 1/2.
  static SupportSpec plurality(const ContestSpec& spec);
  /// Supermajority contest requiring a fraction f in (1/2, 1] to win, shifted
  /// down by s = (1 - 1/(2f)) a so that 2-vote overstatements sit at 0.
  static SupportSpec supermajority(const ContestSpec& spec, double winning_fraction);
};

}  // namespace rla
