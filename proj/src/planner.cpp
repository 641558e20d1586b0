#include "rla/planner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "rla/error.hpp"

namespace rla {

namespace {

std::string shortest(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

std::int64_t deterministic_stop(double margin, double alpha) {
  if (margin == 0.0) throw DivergenceError("zero margin: no finite deterministic sample size");
  if (!(margin > 0.0 && margin <= 1.0))
    throw InputError("margin must be in (0, 1], got " + std::to_string(margin));
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InputError("alpha must be in (0, 1], got " + std::to_string(alpha));
  const double growth = 2.0 / (2.0 - margin);  // 2a
  const double target = 1.0 / alpha;
  const double ratio = -std::log(alpha) / (std::log(2.0) - std::log(2.0 - margin));
  // The ratio may sit an ulp on either side of an integer; settle the ceiling
  // with the defining inequality itself.
  auto t = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(ratio)) - 1);
  while (std::pow(growth, static_cast<double>(t)) < target) ++t;
  return t;
}

std::vector<PlanRow> plan_table(std::span<const double> margins, std::span<const double> alphas) {
  if (margins.empty() || alphas.empty()) throw InputError("plan needs at least one margin and alpha");
  std::vector<PlanRow> rows;
  rows.reserve(margins.size() * alphas.size());
  for (double v : margins) {
    for (double alpha : alphas) rows.push_back({v, alpha, deterministic_stop(v, alpha)});
  }
  return rows;
}

void write_plan_csv(std::ostream& out, std::span<const PlanRow> rows) {
  out << "v,alpha,t_stop\n";
  for (const auto& r : rows) out << shortest(r.margin) << ',' << shortest(r.alpha) << ',' << r.t_stop << '\n';
}

}  // namespace rla
