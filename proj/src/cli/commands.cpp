#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "rla/cli.hpp"
#include "rla/error.hpp"
#include "rla/planner.hpp"

namespace rla::cli {

using nlohmann::json;

namespace {

std::string format_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_number(const std::string& text, const std::string& flag) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw InputError(flag + ": '" + text + "' is not a number");
  return value;
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// Flags that select and parameterize a betting strategy (audit, grid).
struct StrategyFlags {
  std::string name = "fixed";
  double lambda = 0.0, p1 = 0.0, p2 = 0.0, mean = 0.0;
  double d1 = 100.0, d2 = 1000.0, eps1 = 1e-5, eps2 = 1e-5;
  int grid_points = 101;
  std::string weighting = "uniform";
  double mu1 = 0.0, mu2 = 0.0, sd1 = 0.005, sd2 = 0.0025, rho = 0.25;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* p1_opt = nullptr;
  CLI::Option* p2_opt = nullptr;
  CLI::Option* mean_opt = nullptr;
  CLI::Option* mu1_opt = nullptr;
  CLI::Option* mu2_opt = nullptr;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--strategy", name,
                   "oracle | fixed | adaptive | diversified | apkelly | naive-wor")
        ->capture_default_str();
    lambda_opt = cmd.add_option("--lambda", lambda, "fixed bet in [0, 2]");
    p1_opt = cmd.add_option("--p1", p1, "1-vote overstatement rate (true for oracle, prior otherwise)");
    p2_opt = cmd.add_option("--p2", p2, "2-vote overstatement rate (true for oracle, prior otherwise)");
    mean_opt = cmd.add_option("--mean", mean, "population mean for apkelly");
    cmd.add_option("--d1", d1, "shrink-trunc anchoring weight for p1")->capture_default_str();
    cmd.add_option("--d2", d2, "shrink-trunc anchoring weight for p2")->capture_default_str();
    cmd.add_option("--eps1", eps1, "shrink-trunc floor for p1")->capture_default_str();
    cmd.add_option("--eps2", eps2, "shrink-trunc floor for p2")->capture_default_str();
    cmd.add_option("--grid-points", grid_points, "diversified grid points per axis")->capture_default_str();
    cmd.add_option("--weighting", weighting, "uniform | normal")->capture_default_str();
    mu1_opt = cmd.add_option("--mu1", mu1, "normal weighting mean of p1");
    mu2_opt = cmd.add_option("--mu2", mu2, "normal weighting mean of p2");
    cmd.add_option("--sd1", sd1, "normal weighting sd of p1")->capture_default_str();
    cmd.add_option("--sd2", sd2, "normal weighting sd of p2")->capture_default_str();
    cmd.add_option("--rho", rho, "normal weighting correlation")->capture_default_str();
  }

  bool has_rates() const { return p1_opt->count() > 0 || p2_opt->count() > 0; }
  RatePair rates() const { return RatePair::checked(p1, p2); }

  DiversifiedConfig diversified() const {
    DiversifiedConfig cfg;
    cfg.grid_points_per_axis = grid_points;
    if (weighting == "normal") {
      if (mu1_opt->count() == 0 || mu2_opt->count() == 0)
        throw InputError("normal weighting needs --mu1 and --mu2");
      cfg.weighting = NormalWeighting{mu1, mu2, sd1, sd2, rho};
    } else if (weighting != "uniform") {
      throw InputError("--weighting must be 'uniform' or 'normal'");
    }
    return cfg;
  }

  BetStrategy build(const ContestSpec& spec) const {
    if (name == "oracle") {
      if (!has_rates()) throw InputError("oracle requires the true rates via --p1/--p2");
      return OracleStrategy{rates()};
    }
    if (name == "fixed") {
      if (lambda_opt->count() > 0) return FixedStrategy{lambda, {}};
      if (!has_rates()) throw InputError("fixed needs --lambda or prior rates via --p1/--p2");
      return FixedStrategy{std::nullopt, rates()};
    }
    if (name == "adaptive") {
      ShrinkTruncConfig cfg{rates(), d1, d2, eps1, eps2};
      cfg.validate();
      return AdaptiveStrategy{cfg};
    }
    if (name == "diversified") return DiversifiedStrategy{diversified()};
    if (name == "apkelly") {
      if (mean_opt->count() > 0) return ApKellyStrategy{mean};
      if (!has_rates()) throw InputError("apkelly needs --mean or the true rates via --p1/--p2");
      return ApKellyStrategy{population_mean(rates(), spec)};
    }
    if (name == "naive-wor") return NaiveWorStrategy{rates()};
    throw InputError("unknown strategy '" + name + "'");
  }
};

class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw InputError("cannot open '" + path + "' for writing");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

// ---------------------------------------------------------------------------

struct PlanArgs {
  std::string margins = "0.05,0.10,0.20";
  std::string alphas = "0.05";
};

int cmd_plan(const PlanArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<std::pair<std::string, double>> margins;
  std::vector<std::pair<std::string, double>> alphas;
  try {
    for (const auto& tok : split_list(args.margins)) {
      const double v = parse_number(tok, "--margin");
      if (!(v > 0.0 && v <= 1.0)) throw InputError("--margin: " + tok + " must be in (0, 1]");
      margins.emplace_back(tok, v);
    }
    for (const auto& tok : split_list(args.alphas)) {
      const double alpha = parse_number(tok, "--alpha");
      if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("--alpha: " + tok + " must be in (0, 1)");
      alphas.emplace_back(tok, alpha);
    }
    if (margins.empty() || alphas.empty()) throw InputError("need at least one margin and alpha");
  } catch (const InputError& e) {
    err << "rla plan: " << e.what() << '\n';
    return kExitUsage;
  }
  out << "v,alpha,t_stop\n";
  for (const auto& [vtext, v] : margins) {
    for (const auto& [atext, alpha] : alphas) {
      out << vtext << ',' << atext << ',' << deterministic_stop(v, alpha) << '\n';
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string sweep_path;
  std::string output;
  std::string raw;
  std::string baseline;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

int cmd_simulate(const SimulateArgs& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Sweep sweep;
  try {
    if (args.sweep_path.empty() || args.sweep_path == "-") {
      sweep = read_sweep(in);
    } else {
      std::ifstream file(args.sweep_path);
      if (!file) {
        err << "rla simulate: cannot open '" << args.sweep_path << "'\n";
        return kExitUsage;
      }
      sweep = read_sweep(file);
    }
  } catch (const SchemaError& e) {
    err << "rla simulate: schema error at " << e.what() << '\n';
    return kExitDataError;
  }

  const std::uint64_t master = args.seed_opt->count() > 0 ? args.seed : fresh_seed();
  OutputTarget results(args.output, out);
  std::ostream& csv = results.get();
  csv << "# master_seed=" << master << " generator=" << kGeneratorName << '\n';
  csv << kResultsHeader << '\n';

  std::optional<OutputTarget> raw;
  if (!args.raw.empty()) {
    raw.emplace(args.raw, out);
    raw->get() << "scenario,replicate,stopping_time\n";
  }

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < sweep.scenarios.size(); ++i) {
    SweepRow row;
    row.index = i;
    row.scenario = sweep.scenarios[i].scenario;
    if (!sweep.scenarios[i].has_seed) row.scenario.seed = replicate_seed(master, 1'000'000'007ULL + i);
    try {
      row.result = replicate(row.scenario, args.threads);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    write_results_row(csv, row);
    if (raw && row.result) {
      const auto& times = row.result->stopping_times;
      for (std::size_t r = 0; r < times.size(); ++r) raw->get() << i << ',' << r << ',' << times[r] << '\n';
    }
    rows.push_back(std::move(row));
  }

  const std::string baseline = !args.baseline.empty() ? args.baseline : sweep.baseline.value_or("");
  if (!baseline.empty()) {
    try {
      for (const auto& s : summarize_ratios(rows, baseline)) {
        csv << "# geometric_mean_ratio," << s.strategy << ',' << s.baseline << ',' << s.pairs << ','
            << format_double(s.ratio) << '\n';
      }
    } catch (const std::exception& e) {
      err << "rla simulate: cannot summarize ratios: " << e.what() << '\n';
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AuditArgs {
  double margin = 0.0;
  double alpha = 0.05;
  std::int64_t population = 0;
  std::string input = "-";
  std::string format = "jsonl";
  StrategyFlags strategy;
};

void emit_step(std::ostream& out, const std::string& format, const std::string& ballot_id,
               const AuditSession::Step& s) {
  if (format == "jsonl") {
    json line = {{"draw", s.draw},       {"ballot_id", ballot_id}, {"x", s.x},
                 {"bet", s.bet},         {"p_value", s.p_value},
                 {"decision", std::string(to_string(s.status))}};
    out << line.dump() << '\n';
  } else if (format == "csv") {
    out << s.draw << ',' << ballot_id << ',' << format_double(s.x) << ',' << format_double(s.bet)
        << ',' << format_double(s.p_value) << ',' << to_string(s.status) << '\n';
  } else {
    out << std::setw(7) << s.draw << "  " << std::left << std::setw(16) << ballot_id << std::right
        << std::fixed << std::setprecision(6) << std::setw(10) << s.x << std::setw(10) << s.bet
        << std::setw(12) << s.p_value << "  " << to_string(s.status) << '\n';
    out << std::defaultfloat;
  }
}

int cmd_audit(const AuditArgs& args, std::istream& in, std::ostream& out, std::ostream& err) {
  if (args.format != "jsonl" && args.format != "csv" && args.format != "human") {
    err << "rla audit: --format must be human, csv or jsonl\n";
    return kExitUsage;
  }
  std::vector<ComparisonRecord> records;
  try {
    if (args.input == "-") {
      records = read_records(in);
    } else {
      std::ifstream file(args.input);
      if (!file) {
        err << "rla audit: cannot open '" << args.input << "'\n";
        return kExitUsage;
      }
      records = read_records(file);
    }
  } catch (const InputError& e) {
    err << "rla audit: " << e.what() << '\n';
    return kExitDataError;
  }

  std::optional<ContestSpec> spec;
  std::optional<BettingPlan> plan;
  try {
    const std::int64_t n =
        args.population > 0 ? args.population : std::max<std::int64_t>(1, static_cast<std::int64_t>(records.size()));
    spec.emplace(args.margin, n, args.alpha);
    const BetStrategy strategy = args.strategy.build(*spec);
    if (!is_recommended(strategy)) err << kNaiveWorWarning << '\n';
    plan.emplace(strategy, *spec);
  } catch (const std::exception& e) {
    err << "rla audit: " << e.what() << '\n';
    return kExitUsage;
  }

  if (args.format == "csv") out << "draw,ballot_id,x,bet,p_value,decision\n";
  if (args.format == "human")
    out << "   draw  ballot_id                x       bet     p_value  decision\n";

  AuditSession session(*plan, *spec);
  try {
    for (const auto& rec : records) {
      const auto step = session.observe(classify(rec));
      emit_step(out, args.format, rec.ballot_id, step);
      if (step.status != AuditStatus::continuing) break;
    }
  } catch (const std::exception& e) {
    err << "rla audit: " << e.what() << '\n';
    return kExitDataError;
  }

  const AuditStatus status = session.status();
  const std::int64_t draws = session.state().draws_seen();
  const double p = p_value(session.state());
  if (args.format == "jsonl") {
    json line = {{"final", true},
                 {"decision", std::string(to_string(status))},
                 {"draws", draws},
                 {"p_value", p},
                 {"strategy", strategy_label(args.strategy.build(*spec))}};
    out << line.dump() << '\n';
  } else if (args.format == "csv") {
    out << "# final decision=" << to_string(status) << " draws=" << draws
        << " p_value=" << format_double(p) << '\n';
  } else {
    out << "decision: " << to_string(status) << " after " << draws << " draws (P = " << p << ")\n";
  }
  switch (status) {
    case AuditStatus::confirmed: return kExitOk;
    case AuditStatus::stalled: return kExitStalled;
    case AuditStatus::continuing: return kExitContinue;
  }
  return kExitContinue;
}

// ---------------------------------------------------------------------------

struct GridArgs {
  double margin = 0.0;
  StrategyFlags flags;
};

int cmd_grid(const GridArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<MixtureComponent> mixture;
  try {
    const ContestSpec spec(args.margin, 1, 0.05);
    mixture = diversified_bets(args.flags.diversified(), spec);
  } catch (const std::exception& e) {
    err << "rla grid: " << e.what() << '\n';
    return kExitUsage;
  }
  out << "p1,p2,theta,lambda\n";
  for (const auto& c : mixture) {
    out << format_double(c.rates.p1) << ',' << format_double(c.rates.p2) << ','
        << format_double(c.theta) << ',' << format_double(c.lambda) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SampleArgs {
  double margin = 0.1;
  std::int64_t population = 10000;
  double p1 = 0.0;
  double p2 = 0.0;
  std::int64_t draws = 0;
  std::string sampling = "with-replacement";
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

int cmd_sample(const SampleArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const ContestSpec spec(args.margin, args.population, 0.05);
    const SamplingMode mode = parse_sampling_mode(args.sampling);
    const PopulationCounts counts = build_population(spec.population_size(), RatePair::checked(args.p1, args.p2));
    const std::uint64_t seed = args.seed_opt->count() > 0 ? args.seed : fresh_seed();
    const std::int64_t n = args.draws > 0 ? args.draws : spec.population_size();
    DrawStream stream(counts, mode, seed);
    std::vector<ComparisonRecord> records;
    records.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 1; i <= n; ++i) {
      records.push_back(example_record(stream.next(), "draw-" + std::to_string(i)));
    }
    out << "# seed=" << seed << " generator=" << kGeneratorName << " sampling=" << to_string(mode) << '\n';
    write_records(out, records);
  } catch (const std::exception& e) {
    err << "rla sample: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Risk-limiting comparison audits with betting supermartingales", "rla"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "deterministic sample sizes for error-free CVRs");
  plan_cmd->add_option("--margin", plan.margins, "comma-separated diluted margins")->capture_default_str();
  plan_cmd->add_option("--alpha", plan.alphas, "comma-separated risk limits")->capture_default_str();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "run a scenario sweep");
  sim_cmd->add_option("sweep,--sweep", sim.sweep_path, "sweep JSON file ('-' for stdin)");
  sim.seed_opt = sim_cmd->add_option("--seed", sim.seed, "master seed");
  sim_cmd->add_option("--threads", sim.threads, "worker threads per scenario")->capture_default_str();
  sim_cmd->add_option("-o,--output", sim.output, "results CSV path (default stdout)");
  sim_cmd->add_option("--raw", sim.raw, "also write raw stopping times to this CSV");
  sim_cmd->add_option("--baseline", sim.baseline, "strategy to compare against");

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "replay a comparison-record CSV");
  audit_cmd->add_option("--margin", audit.margin, "diluted margin v")->required();
  audit_cmd->add_option("--alpha", audit.alpha, "risk limit")->capture_default_str();
  audit_cmd->add_option("--population", audit.population, "population size N (default: row count)");
  audit_cmd->add_option("-i,--input", audit.input, "records CSV ('-' for stdin)")->capture_default_str();
  audit_cmd->add_option("--format", audit.format, "human | csv | jsonl")->capture_default_str();
  audit.strategy.add_to(*audit_cmd);

  GridArgs grid;
  auto* grid_cmd = app.add_subcommand("grid", "diversified mixture grid, weights and bets");
  grid_cmd->add_option("--margin", grid.margin, "diluted margin v")->required();
  grid.flags.add_to(*grid_cmd);

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "export a simulated draw stream as records");
  sample_cmd->add_option("--margin", sample.margin, "diluted margin v")->capture_default_str();
  sample_cmd->add_option("--population", sample.population, "population size N")->capture_default_str();
  sample_cmd->add_option("--p1", sample.p1, "true 1-vote overstatement rate");
  sample_cmd->add_option("--p2", sample.p2, "true 2-vote overstatement rate");
  sample_cmd->add_option("--draws", sample.draws, "number of draws (default N)");
  sample_cmd->add_option("--sampling", sample.sampling, "with-replacement | without-replacement")
      ->capture_default_str();
  sample.seed_opt = sample_cmd->add_option("--seed", sample.seed, "stream seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (plan_cmd->parsed()) return cmd_plan(plan, out, err);
  if (sim_cmd->parsed()) return cmd_simulate(sim, in, out, err);
  if (audit_cmd->parsed()) return cmd_audit(audit, in, out, err);
  if (grid_cmd->parsed()) return cmd_grid(grid, out, err);
  if (sample_cmd->parsed()) return cmd_sample(sample, out, err);
  return kExitUsage;
}

}  // namespace rla::cli
