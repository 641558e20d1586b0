#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "rla/cli.hpp"
#include "rla/error.hpp"

namespace rla::cli {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> parse_assort_cell(const std::string& cell) {
  if (cell == "winner" || cell == "1" || cell == "1.0") return 1.0;
  if (cell == "other" || cell == "0.5" || cell == ".5" || cell == "1/2") return 0.5;
  if (cell == "loser" || cell == "0" || cell == "0.0") return 0.0;
  return std::nullopt;
}

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

std::string format_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

std::vector<ComparisonRecord> read_records(std::istream& in) {
  std::vector<ComparisonRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto cells = split(content, ',');
    if (!saw_header) {
      if (cells.size() != 3 || cells[0] != "ballot_id" || cells[1] != "cvr_assort" ||
          cells[2] != "mvr_assort")
        throw InputError(line_error(line_no, "expected header 'ballot_id,cvr_assort,mvr_assort'"));
      saw_header = true;
      continue;
    }
    if (cells.size() != 3)
      throw InputError(line_error(line_no, "expected 3 fields, found " + std::to_string(cells.size())));
    const auto cvr = parse_assort_cell(cells[1]);
    if (!cvr) throw InputError(line_error(line_no, "cvr_assort '" + cells[1] + "' is not 0, 0.5 or 1"));
    const auto mvr = parse_assort_cell(cells[2]);
    if (!mvr) throw InputError(line_error(line_no, "mvr_assort '" + cells[2] + "' is not 0, 0.5 or 1"));
    records.push_back({cells[0], *cvr, *mvr});
  }
  return records;
}

void write_records(std::ostream& out, const std::vector<ComparisonRecord>& records) {
  out << "ballot_id,cvr_assort,mvr_assort\n";
  for (const auto& r : records)
    out << r.ballot_id << ',' << format_double(r.cvr_assort) << ',' << format_double(r.mvr_assort) << '\n';
}

// ---------------------------------------------------------------------------
// Sweep documents

namespace {

double number_field(const json& obj, const std::string& key, const std::string& path,
                    std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw SchemaError(path + "." + key, "required field is missing");
  }
  const json& node = obj.at(key);
  if (!node.is_number()) throw SchemaError(path + "." + key, "must be a number");
  return node.get<double>();
}

std::int64_t integer_field(const json& obj, const std::string& key, const std::string& path,
                           std::optional<std::int64_t> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw SchemaError(path + "." + key, "required field is missing");
  }
  const json& node = obj.at(key);
  if (!node.is_number_integer()) throw SchemaError(path + "." + key, "must be an integer");
  return node.get<std::int64_t>();
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& path) {
  for (const auto& item : obj.items()) {
    if (!known.count(item.key())) throw SchemaError(path + "." + item.key(), "unknown field");
  }
}

RatePair rate_pair(const json& params, const std::string& path) {
  const double p1 = number_field(params, "p1", path);
  const double p2 = number_field(params, "p2", path);
  try {
    return RatePair::checked(p1, p2);
  } catch (const InputError& e) {
    throw SchemaError(path, e.what());
  }
}

}  // namespace

BetStrategy parse_strategy(const json& node, const std::string& path) {
  if (!node.is_object()) throw SchemaError(path, "must be an object");
  reject_unknown(node, {"name", "params"}, path);
  if (!node.contains("name") || !node.at("name").is_string())
    throw SchemaError(path + ".name", "required string field");
  const std::string name = node.at("name").get<std::string>();
  const json params = node.contains("params") ? node.at("params") : json::object();
  const std::string ppath = path + ".params";
  if (!params.is_object()) throw SchemaError(ppath, "must be an object");

  if (name == "oracle") {
    reject_unknown(params, {"p1", "p2"}, ppath);
    OracleStrategy s;
    if (params.contains("p1") || params.contains("p2")) s.rates = rate_pair(params, ppath);
    return s;
  }
  if (name == "fixed") {
    reject_unknown(params, {"lambda", "p1", "p2"}, ppath);
    FixedStrategy s;
    if (params.contains("lambda")) {
      s.lambda = number_field(params, "lambda", ppath);
      if (!(*s.lambda >= 0.0 && *s.lambda <= 2.0))
        throw SchemaError(ppath + ".lambda", "must be in [0, 2]");
    } else {
      s.prior = rate_pair(params, ppath);
    }
    return s;
  }
  if (name == "adaptive") {
    reject_unknown(params, {"p1", "p2", "d1", "d2", "eps1", "eps2"}, ppath);
    AdaptiveStrategy s;
    s.config.prior = rate_pair(params, ppath);
    s.config.d1 = number_field(params, "d1", ppath, 100.0);
    s.config.d2 = number_field(params, "d2", ppath, 1000.0);
    s.config.eps1 = number_field(params, "eps1", ppath, 1e-5);
    s.config.eps2 = number_field(params, "eps2", ppath, 1e-5);
    try {
      s.config.validate();
    } catch (const InputError& e) {
      throw SchemaError(ppath, e.what());
    }
    return s;
  }
  if (name == "diversified") {
    reject_unknown(params, {"grid_points", "weighting", "mu1", "mu2", "sd1", "sd2", "rho"}, ppath);
    DiversifiedStrategy s;
    s.config.grid_points_per_axis = static_cast<int>(integer_field(params, "grid_points", ppath, 101));
    if (s.config.grid_points_per_axis < 2) throw SchemaError(ppath + ".grid_points", "must be >= 2");
    const std::string weighting =
        params.contains("weighting") && params.at("weighting").is_string()
            ? params.at("weighting").get<std::string>()
            : (params.contains("mu1") ? "normal" : "uniform");
    if (weighting == "normal") {
      NormalWeighting w;
      w.mean1 = number_field(params, "mu1", ppath);
      w.mean2 = number_field(params, "mu2", ppath);
      w.sd1 = number_field(params, "sd1", ppath, w.sd1);
      w.sd2 = number_field(params, "sd2", ppath, w.sd2);
      w.rho = number_field(params, "rho", ppath, w.rho);
      if (!(w.sd1 > 0.0 && w.sd2 > 0.0)) throw SchemaError(ppath, "sd1 and sd2 must be positive");
      if (!(std::abs(w.rho) < 1.0)) throw SchemaError(ppath + ".rho", "must be in (-1, 1)");
      s.config.weighting = w;
    } else if (weighting != "uniform") {
      throw SchemaError(ppath + ".weighting", "must be 'uniform' or 'normal'");
    }
    return s;
  }
  if (name == "apkelly") {
    reject_unknown(params, {"mean"}, ppath);
    ApKellyStrategy s;
    if (params.contains("mean")) s.mean = number_field(params, "mean", ppath);
    return s;
  }
  if (name == "naive-wor") {
    reject_unknown(params, {"p1", "p2"}, ppath);
    return NaiveWorStrategy{rate_pair(params, ppath)};
  }
  throw SchemaError(path + ".name", "unknown strategy '" + name +
                                        "' (expected oracle, fixed, adaptive, diversified, apkelly "
                                        "or naive-wor)");
}

Sweep read_sweep(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("$", "document must be an object");
  reject_unknown(doc, {"scenarios", "baseline"}, "$");
  if (!doc.contains("scenarios") || !doc.at("scenarios").is_array())
    throw SchemaError("scenarios", "required array field");

  Sweep sweep;
  if (doc.contains("baseline")) {
    if (!doc.at("baseline").is_string()) throw SchemaError("baseline", "must be a strategy name");
    sweep.baseline = doc.at("baseline").get<std::string>();
  }
  const json& list = doc.at("scenarios");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "scenarios[" + std::to_string(i) + "]";
    const json& s = list.at(i);
    if (!s.is_object()) throw SchemaError(path, "must be an object");
    reject_unknown(s, {"v", "N", "alpha", "p1", "p2", "strategy", "replications", "cap", "seed",
                       "label", "sampling"},
                   path);
    const double v = number_field(s, "v", path);
    const std::int64_t n = integer_field(s, "N", path);
    const double alpha = number_field(s, "alpha", path);
    if (!(v > 0.0 && v <= 1.0)) throw SchemaError(path + ".v", "must be in (0, 1]");
    if (n < 1) throw SchemaError(path + ".N", "must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw SchemaError(path + ".alpha", "must be in (0, 1)");
    if (!s.contains("strategy")) throw SchemaError(path + ".strategy", "required field is missing");

    SweepEntry entry;
    Scenario& sc = entry.scenario;
    sc.spec = ContestSpec(v, n, alpha);
    sc.true_rates = rate_pair(s, path);
    sc.strategy = parse_strategy(s.at("strategy"), path + ".strategy");
    sc.replications = integer_field(s, "replications", path);
    if (sc.replications < 1) throw SchemaError(path + ".replications", "must be positive");
    sc.cap = integer_field(s, "cap", path, n);
    if (sc.cap < 1) throw SchemaError(path + ".cap", "must be positive");
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned()) throw SchemaError(path + ".seed", "must be a nonnegative integer");
      sc.seed = s.at("seed").get<std::uint64_t>();
      entry.has_seed = true;
    }
    if (s.contains("label")) {
      if (!s.at("label").is_string()) throw SchemaError(path + ".label", "must be a string");
      sc.label = s.at("label").get<std::string>();
    }
    if (s.contains("sampling")) {
      if (!s.at("sampling").is_string()) throw SchemaError(path + ".sampling", "must be a string");
      try {
        sc.mode = parse_sampling_mode(s.at("sampling").get<std::string>());
      } catch (const InputError& e) {
        throw SchemaError(path + ".sampling", e.what());
      }
    }
    sweep.scenarios.push_back(std::move(entry));
  }
  return sweep;
}

void write_results_row(std::ostream& out, const SweepRow& row) {
  const Scenario& sc = row.scenario;
  std::string label = sc.label;
  std::replace(label.begin(), label.end(), ',', ';');
  out << row.index << ',' << label << ',' << strategy_name(sc.strategy) << ','
      << format_double(sc.spec.margin()) << ',' << sc.spec.population_size() << ','
      << format_double(sc.spec.risk_limit()) << ',' << format_double(sc.true_rates.p1) << ','
      << format_double(sc.true_rates.p2) << ',' << to_string(sc.mode) << ',' << sc.replications
      << ',' << sc.effective_cap() << ',';
  if (row.result) {
    const ScenarioResult& r = *row.result;
    out << format_double(r.mean) << ',' << format_double(r.q90) << ',' << r.capped_count << ','
        << r.stalled_count << ',' << r.seed << ',' << r.generator << ',';
  } else {
    out << ",,,," << sc.seed << ',' << kGeneratorName << ',';
  }
  std::string error = row.error;
  std::replace(error.begin(), error.end(), ',', ';');
  std::replace(error.begin(), error.end(), '\n', ' ');
  out << error << '\n';
}

std::vector<RatioSummary> summarize_ratios(const std::vector<SweepRow>& rows,
                                           const std::string& baseline) {
  auto key_of = [](const Scenario& sc) {
    if (!sc.label.empty()) return "label:" + sc.label;
    return format_double(sc.spec.margin()) + '|' + std::to_string(sc.spec.population_size()) +
           '|' + format_double(sc.spec.risk_limit()) + '|' + format_double(sc.true_rates.p1) +
           '|' + format_double(sc.true_rates.p2);
  };

  std::map<std::string, std::vector<const ScenarioResult*>> base;
  for (const auto& row : rows) {
    if (row.result && strategy_name(row.scenario.strategy) == baseline)
      base[key_of(row.scenario)].push_back(&*row.result);
  }

  // strategy -> paired (result, baseline) lists in row order
  std::map<std::string, std::pair<std::vector<ScenarioResult>, std::vector<ScenarioResult>>> pairs;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  std::vector<std::string> order;
  for (const auto& row : rows) {
    const std::string name(strategy_name(row.scenario.strategy));
    if (!row.result || name == baseline) continue;
    const std::string key = key_of(row.scenario);
    const auto it = base.find(key);
    if (it == base.end()) continue;
    const std::size_t k = seen[{name, key}]++;
    const ScenarioResult* match = it->second[std::min(k, it->second.size() - 1)];
    if (!pairs.count(name)) order.push_back(name);
    pairs[name].first.push_back(*row.result);
    pairs[name].second.push_back(*match);
  }

  std::vector<RatioSummary> out;
  for (const auto& name : order) {
    const auto& [mine, theirs] = pairs[name];
    out.push_back({name, baseline, mine.size(), geometric_mean_ratio(mine, theirs)});
  }
  return out;
}

}  // namespace rla::cli
