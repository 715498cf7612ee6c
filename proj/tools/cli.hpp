#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "parchr/acceptance.hpp"
#include "parchr/bench.hpp"
#include "parchr/engine.hpp"
#include "parchr/report.hpp"
#include "parchr/validate.hpp"

namespace parchr::cli {

namespace fs = std::filesystem;

enum Exit : int { kOk = 0, kFailed = 1, kUsage = 2 };

/// Test seams.
struct Hooks {
  OrderFn order;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// "unbounded", a positive integer, or "n" for the instance size.
struct ProcessorSpec {
  enum class Kind { unbounded, fixed, size } kind = Kind::unbounded;
  std::size_t k = 0;

  static ProcessorSpec parse(const std::string& text) {
    if (text == "unbounded") return {};
    if (text == "n") return {Kind::size, 0};
    if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw UsageError("--processors: expected unbounded, n or a positive integer, got '" + text + "'");
    std::size_t k = 0;
    try {
      k = std::stoull(text);
    } catch (const std::out_of_range&) {
      throw UsageError("--processors: " + text + " is out of range");
    }
    if (k == 0) throw UsageError("--processors: bound must be at least 1");
    return {Kind::fixed, k};
  }

  Processors resolve(std::size_t n) const {
    switch (kind) {
      case Kind::unbounded:
        return Processors::unbounded();
      case Kind::fixed:
        return Processors::bounded(k);
      case Kind::size:
        if (n == 0) throw UsageError("--processors n needs an instance size of at least 1");
        return Processors::bounded(n);
    }
    return Processors::unbounded();
  }
};

inline Strategy strategy_flag(const std::string& text) {
  if (auto s = parse_strategy(text)) return *s;
  throw UsageError("--strategy: unknown strategy '" + text + "'");
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a sibling temporary and renames it over `path`.
inline void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Outcome of one run, with the rendered outputs.
struct Executed {
  Trace trace;
  report::RunSummary summary;
  std::optional<std::string> step_limit;
  std::string csv;
  std::string json;
};

inline Executed execute(const RunConfig& config, report::RunKey key, const bench::BenchmarkSpec* bench,
                        const OrderFn& order) {
  Executed e;
  try {
    e.trace = run(config, order);
  } catch (const StepLimitExceeded& ex) {
    e.trace = ex.trace();
    e.step_limit = ex.what();
  }
  std::string oracle = "skipped";
  if (e.step_limit)
    oracle = "fail:" + *e.step_limit;
  else if (bench)
    oracle = bench->oracle(config.goal, e.trace.final_store).label();
  const auto check = validate_trace(*config.program, config.goal, e.trace);
  e.summary = report::summarize(e.trace, std::move(key), oracle, check ? "pass" : "fail:" + check.diagnostic);
  e.csv = report::emit_csv(e.trace);
  e.json = report::emit_json_summary(e.summary);
  return e;
}

inline std::string join_terms(const std::vector<Term>& terms) {
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += ", ";
    out += to_string(t);
  }
  return out;
}

struct RunFlags {
  std::string example;
  std::size_t size = 0;
  std::string program;
  std::string query;
  std::string strategy = "par";
  std::string processors = "unbounded";
  std::uint64_t seed = 0;
  bool no_permute = false;
  std::size_t max_steps = 10000;
  std::string out;
  std::string format = "csv";
  bool keep_stale = false;
};

inline int cmd_run(const RunFlags& f, CLI::App& app, std::ostream& out, std::ostream& err, const Hooks& hooks) {
  const bool has_example = app.count("--example") > 0;
  const bool has_program = app.count("--program") > 0 || app.count("--query") > 0;
  if (has_example == has_program) throw UsageError("give either --example or --program with --query");
  if (has_program && (f.program.empty() || app.count("--query") == 0))
    throw UsageError("--program and --query go together");

  RunConfig config;
  report::RunKey key;
  const bench::BenchmarkSpec* bench = nullptr;
  if (has_example) {
    if (app.count("--size") == 0) throw UsageError("--example needs --size");
    std::string variant;
    try {
      std::tie(bench, variant) = bench::resolve_example(f.example);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (f.size < bench->min_size)
      throw UsageError(std::string(bench->name) + " needs --size >= " + std::to_string(bench->min_size));
    config.program = bench::load_program(*bench);
    try {
      config.goal = bench->generate(f.size, variant, f.seed);
    } catch (const bench::GeneratorError& e) {
      throw UsageError(e.what());
    }
    key = {std::string(bench->name), variant, f.size, Strategy::par, {}, f.seed};
  } else {
    try {
      config.program = std::make_shared<const Program>(parse_program(read_file(f.program)));
      config.goal = parse_query(f.query);
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    const std::size_t n = app.count("--size") ? f.size : config.goal.constraints.size();
    key = {fs::path(f.program).stem().string(), "", n, Strategy::par, {}, f.seed};
  }
  config.strategy = strategy_flag(f.strategy);
  config.processors = ProcessorSpec::parse(f.processors).resolve(key.n);
  config.seed = f.seed;
  config.permute_query = !f.no_permute;
  config.max_steps = f.max_steps;
  config.prune_stale = !f.keep_stale;

  const Executed e = execute(config, key, bench, hooks.order);
  if (!f.out.empty()) {
    fs::path path(f.out);
    if (f.format == "csv") {
      write_atomic(path, e.csv);
    } else if (f.format == "json") {
      write_atomic(path, e.json);
    } else {
      write_atomic(fs::path(path).replace_extension(".csv"), e.csv);
      write_atomic(fs::path(path).replace_extension(".json"), e.json);
    }
  }
  out << e.json;
  out << "final store: " << join_terms(e.trace.final_store) << "\n";
  if (e.step_limit) err << "error: " << *e.step_limit << "\n";
  return e.summary.passed() ? kOk : kFailed;
}

struct SweepFlags {
  std::vector<std::string> examples;
  std::vector<std::size_t> sizes;
  std::vector<std::string> strategies;
  std::vector<std::string> processors;
  std::vector<std::uint64_t> seeds;
  bool no_permute = false;
  std::size_t max_steps = 10000;
  std::string out;
  std::string format = "csv";
  bool force = false;
  bool keep_stale = false;
};

/// Reads back a summary written by emit_json_summary; means keep their two decimals.
inline report::RunSummary parse_json_summary(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  auto ratio = [&](const char* name) {
    const double v = j.at(name).get<double>();
    return report::Ratio{static_cast<std::uint64_t>(v * 100 + 0.5), 100};
  };
  report::RunSummary s;
  s.key.example = j.at("example").get<std::string>();
  s.key.variant = j.at("variant").get<std::string>();
  s.key.n = j.at("n").get<std::size_t>();
  s.key.strategy = strategy_flag(j.at("strategy").get<std::string>());
  const auto procs = j.at("processors").get<std::string>();
  s.key.processors = procs == "unbounded" ? Processors::unbounded() : Processors::bounded(std::stoull(procs));
  s.key.seed = j.at("seed").get<std::uint64_t>();
  s.permute_query = j.at("permute_query").get<bool>();
  s.max_steps = j.at("max_steps").get<std::size_t>();
  s.prune_stale = j.at("prune_stale").get<bool>();
  s.counted_steps = j.at("counted_steps").get<std::size_t>();
  s.total_steps = j.at("total_steps").get<std::size_t>();
  s.mean_applicable = ratio("mean_applicable");
  s.mean_applicable_raw = ratio("mean_applicable_raw");
  s.mean_applied = ratio("mean_applied");
  s.max_applied = j.at("max_applied").get<std::size_t>();
  s.final_store_size = j.at("final_store_size").get<std::size_t>();
  s.oracle_result = j.at("oracle_result").get<std::string>();
  s.validator_result = j.at("validator_result").get<std::string>();
  return s;
}

inline int cmd_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err, const Hooks& hooks) {
  if (f.examples.empty()) throw UsageError("sweep needs --example");
  if (f.sizes.empty()) throw UsageError("sweep needs at least one --size");
  if (f.seeds.empty()) throw UsageError("sweep needs at least one --seed");
  if (f.strategies.empty()) throw UsageError("sweep needs at least one --strategy");
  if (f.processors.empty()) throw UsageError("sweep needs at least one --processors");
  if (f.out.empty()) throw UsageError("sweep needs --out <directory>");

  struct Target {
    const bench::BenchmarkSpec* bench;
    std::string variant;
  };
  std::vector<Target> targets;
  for (const auto& name : f.examples) {
    try {
      auto [b, v] = bench::resolve_example(name);
      targets.push_back({b, v});
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  std::vector<Strategy> strategies;
  for (const auto& s : f.strategies) strategies.push_back(strategy_flag(s));
  std::vector<ProcessorSpec> procs;
  for (const auto& p : f.processors) procs.push_back(ProcessorSpec::parse(p));
  for (const auto& t : targets)
    for (std::size_t n : f.sizes)
      if (n < t.bench->min_size)
        throw UsageError(std::string(t.bench->name) + " needs --size >= " + std::to_string(t.bench->min_size));

  const fs::path dir(f.out);
  fs::create_directories(dir);
  std::vector<report::RunSummary> summaries;
  std::size_t executed = 0;
  std::size_t skipped = 0;
  for (const auto& t : targets) {
    const auto program = bench::load_program(*t.bench);
    for (std::size_t n : f.sizes) {
      for (Strategy strategy : strategies) {
        for (const auto& p : procs) {
          for (std::uint64_t seed : f.seeds) {
            report::RunKey key{std::string(t.bench->name), t.variant, n, strategy, p.resolve(n), seed};
            const std::string stem = report::file_stem(key);
            const fs::path csv_path = dir / (stem + ".csv");
            const fs::path json_path = dir / (stem + ".json");
            const bool done = fs::exists(json_path) && (f.format == "json" || fs::exists(csv_path));
            if (done && !f.force) {
              try {
                summaries.push_back(parse_json_summary(read_file(json_path)));
                ++skipped;
                continue;
              } catch (const std::exception&) {
                // unreadable leftovers are recomputed
              }
            }
            RunConfig config;
            config.program = program;
            try {
              config.goal = t.bench->generate(n, t.variant, seed);
            } catch (const bench::GeneratorError& e) {
              throw UsageError(e.what());
            }
            config.strategy = strategy;
            config.processors = key.processors;
            config.seed = seed;
            config.permute_query = !f.no_permute;
            config.max_steps = f.max_steps;
            config.prune_stale = !f.keep_stale;
            const Executed e = execute(config, key, t.bench, hooks.order);
            if (f.format != "json") write_atomic(csv_path, e.csv);
            // the JSON summary is what a resumed sweep reads back
            write_atomic(json_path, e.json);
            if (!e.summary.passed())
              err << stem << ": oracle " << e.summary.oracle_result << ", validator " << e.summary.validator_result
                  << "\n";
            summaries.push_back(e.summary);
            ++executed;
          }
        }
      }
    }
  }
  write_atomic(dir / "aggregate.csv", report::aggregate(summaries));
  const auto failed = static_cast<std::size_t>(
      std::count_if(summaries.begin(), summaries.end(), [](const report::RunSummary& s) { return !s.passed(); }));
  out << summaries.size() << " runs (" << executed << " executed, " << skipped << " resumed), " << failed
      << " failed; aggregate in " << (dir / "aggregate.csv").string() << "\n";
  return failed == 0 ? kOk : kFailed;
}

inline int cmd_check(bool json, const std::vector<int>& only, std::ostream& out, const Hooks& hooks) {
  acceptance::Options options;
  options.order = hooks.order;
  options.only = only;
  if (!json) options.on_result = [&](const acceptance::CriterionResult& c) { out << acceptance::format_line(c) << std::flush; };
  const auto results = acceptance::run_all(options);
  const bool ok = acceptance::all_passed(results);
  if (json) {
    out << acceptance::to_json(results) << "\n";
  } else {
    const auto failed = std::count_if(results.begin(), results.end(), [](const auto& c) { return !c.pass; });
    out << (ok ? "all criteria passed" : std::to_string(failed) + " of " + std::to_string(results.size()) +
                                             " criteria failed")
        << "\n";
  }
  return ok ? kOk : kFailed;
}

/// Entry point without argv[0]. Returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                   const Hooks& hooks = {}) {
  CLI::App app{"Parallel CHR execution simulator", "parchr"};
  app.require_subcommand(1);
  const std::vector<std::string> kFormats{"csv", "json", "both"};

  RunFlags rf;
  auto* run_cmd = app.add_subcommand("run", "Execute one run and report its metrics");
  run_cmd->add_option("--example", rf.example, "Benchmark name[:variant]");
  run_cmd->add_option("--size", rf.size, "Instance size");
  run_cmd->add_option("--program", rf.program, "CHR program file");
  run_cmd->add_option("--query", rf.query, "Goal constraints, comma separated");
  run_cmd->add_option("--strategy", rf.strategy, "par, pars, pard or parr")->capture_default_str();
  run_cmd->add_option("--processors", rf.processors, "unbounded, <k> or n")->capture_default_str();
  run_cmd->add_option("--seed", rf.seed)->capture_default_str();
  run_cmd->add_flag("--no-permute", rf.no_permute, "Insert the goal in the given order");
  run_cmd->add_option("--max-steps", rf.max_steps)->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", rf.out, "Metrics file");
  run_cmd->add_option("--format", rf.format)->capture_default_str()->check(CLI::IsMember(kFormats));
  run_cmd->add_flag("--keep-stale", rf.keep_stale, "Stale instances stay selectable and occupy processors");

  SweepFlags sf;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run the Cartesian product of the given lists");
  sweep_cmd->add_option("--example", sf.examples, "Benchmark names, comma separated")->delimiter(',');
  sweep_cmd->add_option("--size", sf.sizes)->delimiter(',');
  sweep_cmd->add_option("--strategy", sf.strategies)->delimiter(',');
  sweep_cmd->add_option("--processors", sf.processors)->delimiter(',');
  sweep_cmd->add_option("--seed", sf.seeds)->delimiter(',')->check(
      [](const std::string& v) { return v.empty() ? std::string("empty seed") : std::string(); });
  sweep_cmd->add_flag("--no-permute", sf.no_permute);
  sweep_cmd->add_option("--max-steps", sf.max_steps)->capture_default_str()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sf.out, "Output directory");
  sweep_cmd->add_option("--format", sf.format)->capture_default_str()->check(CLI::IsMember(kFormats));
  sweep_cmd->add_flag("--force", sf.force, "Recompute runs whose output already exists");
  sweep_cmd->add_flag("--keep-stale", sf.keep_stale);

  bool check_json = false;
  auto* check_cmd = app.add_subcommand("check", "Run the acceptance matrix");
  check_cmd->add_flag("--json", check_json, "Machine-readable results");
  std::vector<int> check_only;
  check_cmd->add_option("--only", check_only, "Criterion ids, comma separated")->delimiter(',')->check(CLI::Range(1, 13));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(rf, *run_cmd, out, err, hooks);
    if (*sweep_cmd) {
      if (sweep_cmd->count("--seed") && sf.seeds.empty()) throw UsageError("--seed list is empty");
      return cmd_sweep(sf, out, err, hooks);
    }
    return cmd_check(check_json, check_only, out, hooks);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
}

}  // namespace parchr::cli
