#pragma once

// Sample sizes for comparison audits with error-free CVRs and maximal bets.

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

namespace rla {

/// First integer t with (2a)^t >= 1/alpha, a = 1/(2 - v): the number of
/// error-free draws a lambda = 2 audit needs. alpha may be 1 (returns 0).
/// Throws DivergenceError for v = 0 and InputError for values out of range.
std::int64_t deterministic_stop(double margin, double alpha);

struct PlanRow {
  double margin;
  double alpha;
  std::int64_t t_stop;
};

/// Cartesian grid (margins outer, alphas inner) of deterministic_stop.
std::vector<PlanRow> plan_table(std::span<const double> margins, std::span<const double> alphas);

/// Writes "v,alpha,t_stop" and one row per entry.
void write_plan_csv(std::ostream& out, std::span<const PlanRow> rows);

}  // namespace rla
