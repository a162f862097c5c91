#include "synodsim/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "synodsim/checker.hpp"
#include "synodsim/digest.hpp"
#include "synodsim/errors.hpp"
#include "synodsim/explore.hpp"
#include "synodsim/scheduler.hpp"
#include "synodsim/trace.hpp"

namespace synodsim::cli {

namespace fs = std::filesystem;
using check::Property;
using check::Verdict;

namespace {

/// Usage and I/O failures; mapped to kUsage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw UsageError("cannot open " + file.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out || !(out << text)) throw UsageError("cannot write " + file.string());
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-') {
    throw UsageError(what + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::vector<Property> parse_checks(const std::string& list) {
  std::vector<Property> props;
  for (const auto& name : split(list, ',')) {
    auto p = check::parse_property(name);
    if (!p) throw UsageError("--check: unknown property '" + name + "'");
    if (std::find(props.begin(), props.end(), *p) == props.end()) props.push_back(*p);
  }
  return props;
}

std::string checks_text(const std::vector<Property>& props) {
  std::string s;
  for (const auto p : props) {
    if (!s.empty()) s += ',';
    s += check::property_name(p);
  }
  return s;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw UsageError("--seeds: expected a..b, got '" + text + "'");
  const auto a = parse_u64(text.substr(0, dots), "--seeds");
  const auto b = parse_u64(text.substr(dots + 2), "--seeds");
  if (b < a) throw UsageError("--seeds: empty range '" + text + "'");
  return {a, b};
}

std::string_view stop_name(sched::StopReason r) {
  switch (r) {
    case sched::StopReason::Budget: return "budget";
    case sched::StopReason::Learned: return "learned";
    case sched::StopReason::Quiescent: return "quiescent";
  }
  return "?";
}

struct LemmaTarget {
  ActorId proposer;
  Ballot ballot;
  std::vector<ActorId> quorum;
};

/// Cnd's protected proposal (or the protected proposer's deciding round if it
/// decided before the window); else the first proposer to learn; else the
/// first proposer's latest proposal.
std::optional<LemmaTarget> lemma_target(const sched::Scenario& scn, const sched::RunResult& run) {
  const auto& last = run.path.last();
  if (scn.policy.cnd && run.protected_ballot) {
    return LemmaTarget{scn.policy.cnd->proposer, *run.protected_ballot, scn.policy.cnd->quorum};
  }
  if (scn.policy.cnd) {
    const auto* p = last.proposer(scn.policy.cnd->proposer);
    if (p && p->learned) return LemmaTarget{scn.policy.cnd->proposer, p->current_ballot, p->target_quorum};
  }
  std::optional<ActorId> who;
  std::optional<std::size_t> earliest;
  for (const auto p : scn.roster->proposers()) {
    if (auto at = check::first_learned_index(run.path, p); at && (!earliest || *at < *earliest)) {
      earliest = at;
      who = p;
    }
  }
  if (!who) {
    const auto proposers = scn.roster->proposers();
    if (proposers.empty()) return std::nullopt;
    who = proposers.front();
  }
  const auto* ps = last.proposer(*who);
  if (ps == nullptr) return std::nullopt;
  return LemmaTarget{*who, ps->current_ballot, ps->target_quorum};
}

std::vector<Verdict> evaluate(const sched::Scenario& scn, const sched::RunResult& run,
                              const std::vector<Property>& props) {
  std::vector<Verdict> verdicts;
  const auto target = lemma_target(scn, run);
  for (const auto p : props) {
    switch (p) {
      case Property::Safety: verdicts.push_back(check::check_safety(run.path)); break;
      case Property::Theorem1: verdicts.push_back(check::check_theorem1(run.path)); break;
      case Property::Lemma1:
      case Property::Lemma2: {
        if (!target) {
          verdicts.push_back(Verdict{p, false});
          verdicts.back().params.emplace_back("target", "none");
          break;
        }
        auto v = p == Property::Lemma1
                     ? check::check_lemma1(run.path, target->proposer, target->ballot, target->quorum)
                     : check::check_lemma2(run.path, target->proposer, target->ballot, target->quorum);
        verdicts.push_back(std::move(v));
        break;
      }
      case Property::Livelock: verdicts.push_back(check::detect_livelock(run.path)); break;
    }
  }
  return verdicts;
}

/// A requested livelock check fails when a livelock is detected.
bool violated(const Verdict& v) {
  return v.property == Property::Livelock ? v.holds : !v.holds;
}

struct SeedOutcome {
  std::string lines;
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  bool violated = false;
};

SeedOutcome outcome_for(const sched::Scenario& scn, const sched::RunResult& run,
                        const std::vector<Property>& props, const std::string& stem) {
  SeedOutcome o;
  const std::string trace_name = stem + ".trace";
  o.files.emplace_back(trace_name, trace_text(run.path));

  std::ostringstream lines;
  lines << "seed=" << scn.seed << " steps=" << run.path.size() << " stop=" << stop_name(run.stop)
        << " reproposals=" << run.reproposals << " final=" << to_hex(digest(run.path.last()))
        << " obligations=" << (run.nonfaulty_obligations_met ? "met" : "unmet")
        << " trace=" << trace_name << '\n';
  for (const auto& v : evaluate(scn, run, props)) {
    const bool bad = violated(v);
    o.violated = o.violated || bad;
    lines << "seed=" << scn.seed << " property=" << check::property_name(v.property)
          << " holds=" << (v.holds ? "true" : "false") << " witness="
          << (v.witness_index ? std::to_string(*v.witness_index) : std::string("-"));
    for (const auto& [k, val] : v.params) lines << ' ' << k << '=' << val;
    if (bad) {
      const auto& cex = v.counterexample ? *v.counterexample : run.path;
      const std::string name = stem + '.' + std::string(check::property_name(v.property)) + ".cex.trace";
      o.files.emplace_back(name, trace_text(cex));
      lines << " counterexample=" << name;
    }
    lines << '\n';
  }
  o.lines = lines.str();
  return o;
}

struct RunRequest {
  fs::path scenario;  // absolute
  std::vector<Property> checks;
  std::optional<std::uint64_t> seed;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> seeds;
  std::optional<std::size_t> budget;
};

struct Produced {
  std::string stem;
  std::vector<std::pair<std::string, std::string>> files;  // manifest last
  std::string summary;
  bool violated = false;
};

sched::Scenario load_checked(const fs::path& file) {
  if (!fs::exists(file)) throw UsageError("scenario not found: " + file.string());
  auto scn = sched::load_scenario(file);
  sched::validate(scn);
  return scn;
}

Produced produce(const RunRequest& req) {
  const auto base = load_checked(req.scenario);
  Produced out;
  out.stem = req.scenario.stem().string();

  std::vector<sched::Scenario> scenarios;
  if (req.seeds) {
    for (auto s = req.seeds->first;; ++s) {
      scenarios.push_back(base);
      scenarios.back().seed = s;
      if (s == req.seeds->second) break;
    }
  } else {
    scenarios.push_back(base);
    if (req.seed) scenarios.back().seed = *req.seed;
  }
  for (auto& s : scenarios) {
    if (req.budget) s.budget = *req.budget;
  }

  const bool many = req.seeds.has_value();
  const auto stem = out.stem;
  const auto checks = req.checks;
  sched::RunReducer<SeedOutcome> reduce = [&](std::uint64_t seed, const sched::RunResult& run) {
    const auto it = std::find_if(scenarios.begin(), scenarios.end(),
                                 [&](const sched::Scenario& s) { return s.seed == seed; });
    return outcome_for(*it, run, checks, many ? stem + "-s" + std::to_string(seed) : stem);
  };
  const auto outcomes = sched::sweep<SeedOutcome>(scenarios, reduce);

  std::ostringstream verdicts;
  verdicts << kVerdictsHeader << '\n'
           << "scenario = " << base.name << '\n'
           << "checks = " << checks_text(req.checks) << '\n'
           << "budget = " << scenarios.front().budget << '\n';
  for (const auto& o : outcomes) {
    verdicts << o.lines;
    out.violated = out.violated || o.violated;
    out.files.insert(out.files.end(), o.files.begin(), o.files.end());
  }
  const std::string verdict_name = out.stem + ".verdicts";
  out.files.emplace_back(verdict_name, verdicts.str());

  std::ostringstream manifest;
  manifest << kManifestHeader << '\n'
           << "scenario = " << req.scenario.string() << '\n'
           << "scenario_digest = " << to_hex(fnv1a64(read_file(req.scenario))) << '\n';
  if (req.seeds) {
    manifest << "seeds = " << req.seeds->first << ".." << req.seeds->second << '\n';
  } else if (req.seed) {
    manifest << "seed = " << *req.seed << '\n';
  }
  if (req.budget) manifest << "budget = " << *req.budget << '\n';
  manifest << "checks = " << checks_text(req.checks) << '\n' << "verdicts = " << verdict_name << '\n';
  for (const auto& [name, _] : out.files) {
    if (name.ends_with(".cex.trace")) {
      manifest << "counterexample = " << name << '\n';
    } else if (name.ends_with(".trace")) {
      manifest << "trace = " << name << '\n';
    }
  }
  out.files.emplace_back(out.stem + ".manifest", manifest.str());

  out.summary = verdicts.str();
  return out;
}

struct Manifest {
  RunRequest request;
  std::uint64_t scenario_digest = 0;
  std::vector<std::string> files;
};

Manifest read_manifest(const fs::path& file) {
  std::istringstream in(read_file(file));
  std::string line;
  if (!std::getline(in, line) || line != kManifestHeader) {
    throw UsageError(file.string() + ": expected header '" + std::string(kManifestHeader) + "'");
  }
  Manifest m;
  bool have_scenario = false;
  bool have_digest = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw ParseError(line_no, "manifest", "expected 'key = value'");
    const auto key = line.substr(0, eq);
    const auto val = line.substr(eq + 3);
    if (key == "scenario") {
      m.request.scenario = val;
      have_scenario = true;
    } else if (key == "scenario_digest") {
      if (!parse_hex(val, m.scenario_digest)) throw ParseError(line_no, key, "bad hex digest");
      have_digest = true;
    } else if (key == "seed") {
      m.request.seed = parse_u64(val, "seed");
    } else if (key == "seeds") {
      m.request.seeds = parse_seed_range(val);
    } else if (key == "budget") {
      m.request.budget = parse_u64(val, "budget");
    } else if (key == "checks") {
      m.request.checks = parse_checks(val);
    } else if (key == "verdicts" || key == "trace" || key == "counterexample") {
      m.files.push_back(val);
    } else {
      throw ParseError(line_no, key, "unknown manifest key");
    }
  }
  if (!have_scenario || !have_digest || m.request.checks.empty()) {
    throw UsageError(file.string() + ": manifest lacks scenario, scenario_digest or checks");
  }
  return m;
}

int cmd_run(const RunRequest& req, const fs::path& out_dir, std::ostream& out) {
  const auto produced = produce(req);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw UsageError("cannot create " + out_dir.string() + ": " + ec.message());
  for (const auto& [name, text] : produced.files) write_file(out_dir / name, text);
  out << produced.summary << "manifest = " << (out_dir / (produced.stem + ".manifest")).string() << '\n';
  return produced.violated ? kViolation : kOk;
}

int cmd_rerun(const fs::path& manifest_file, std::ostream& out, std::ostream& err) {
  const auto manifest = read_manifest(manifest_file);
  if (fnv1a64(read_file(manifest.request.scenario)) != manifest.scenario_digest) {
    err << "rerun: scenario " << manifest.request.scenario.string() << " changed since the manifest\n";
    return kViolation;
  }
  const auto produced = produce(manifest.request);
  const auto dir = manifest_file.parent_path();
  std::vector<std::string> expected = manifest.files;
  expected.push_back(manifest_file.filename().string());
  std::vector<std::string> regenerated;
  for (const auto& [name, _] : produced.files) regenerated.push_back(name);
  std::sort(expected.begin(), expected.end());
  std::sort(regenerated.begin(), regenerated.end());
  if (expected != regenerated) {
    err << "rerun: regenerated file set differs from the manifest\n";
    return kViolation;
  }
  bool same = true;
  for (const auto& [name, text] : produced.files) {
    const bool equal = read_file(dir / name) == text;
    out << (equal ? "identical " : "differs ") << name << '\n';
    same = same && equal;
  }
  return same ? kOk : kViolation;
}

int cmd_replay(const fs::path& file, std::ostream& out, std::ostream& err) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw UsageError("cannot open " + file.string());
  const auto trace = read_trace(in);
  const auto result = replay(trace);
  if (result.ok) {
    out << "replay ok: " << trace.records.size() << " steps\n";
    return kOk;
  }
  err << "replay diverged at index " << result.divergent_index.value_or(0) << ": " << result.detail
      << '\n';
  return kViolation;
}

struct ExploreRequest {
  fs::path scenario;
  check::ExploreOptions options;
  std::optional<std::size_t> fairness_bound;
  std::optional<std::size_t> retries;
  bool require_progress = false;
  bool serial = false;
  std::optional<fs::path> out_dir;
};

int cmd_explore(ExploreRequest req, std::ostream& out) {
  const auto scn = load_checked(req.scenario);
  req.options.fairness_bound = req.fairness_bound.value_or(scn.fairness_bound);
  req.options.max_retries = req.retries.value_or(scn.max_retries);
  const auto initial = fam::initial_configuration(scn.roster);
  const auto report =
      req.serial ? check::explore_serial(initial, req.options) : check::explore(initial, req.options);
  const auto text = report_text(report);
  out << text;
  if (req.out_dir) {
    std::error_code ec;
    fs::create_directories(*req.out_dir, ec);
    write_file(*req.out_dir / (req.scenario.stem().string() + ".report"), text);
  }
  if (report.state_cap_exceeded) return kStateCap;
  if (!report.safety_holds || report.invariant_violations > 0) return kViolation;
  if (report.replay_checked && !report.replay_ok) return kViolation;
  if (req.require_progress && (report.paths == 0 || report.learned_paths != report.paths)) {
    return kViolation;
  }
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deterministic Synod simulator and checker", "synodsim"};
  app.require_subcommand(1);

  std::string scenario;
  std::string checks = "safety";
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::optional<std::size_t> budget;
  std::string out_dir = "synodsim-out";
  auto* run = app.add_subcommand("run", "Run a scenario and check properties");
  run->add_option("scenario", scenario, "Scenario file (.scn)")->required();
  run->add_option("--check", checks, "Comma-separated: safety,theorem1,lemma1,lemma2,livelock");
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--seeds", seeds, "Seed range a..b, run in parallel")->excludes(seed_opt);
  run->add_option("--budget", budget, "Override the step budget");
  run->add_option("--out", out_dir, "Output directory");

  ExploreRequest ex;
  std::string explore_scenario;
  std::string explore_out;
  auto* explore = app.add_subcommand("explore", "Exhaustively explore a small instance");
  explore->add_option("scenario", explore_scenario, "Scenario file (.scn)")->required();
  explore->add_option("--depth", ex.options.max_depth, "Depth limit")->capture_default_str();
  explore->add_option("--state-cap", ex.options.state_cap, "Abort beyond this many states")
      ->capture_default_str();
  explore->add_option("--fairness-bound", ex.fairness_bound, "Override the scenario bound");
  explore->add_option("--retries", ex.retries, "Re-proposals per proposer");
  explore->add_option("--crashes", ex.options.max_crashes, "Stp transitions per path")
      ->capture_default_str();
  explore->add_flag("--require-progress", ex.require_progress, "Fail unless every path learns");
  explore->add_flag("--serial", ex.serial, "Use the serial reference explorer");
  explore->add_option("--out", explore_out, "Write <stem>.report here");

  std::string trace_file;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a trace and compare digests");
  replay_cmd->add_option("trace", trace_file, "Trace file")->required();

  std::string manifest_file;
  auto* rerun = app.add_subcommand("rerun", "Regenerate a run from its manifest and compare");
  rerun->add_option("manifest", manifest_file, "Manifest file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) {
      RunRequest req;
      req.scenario = fs::absolute(scenario).lexically_normal();
      req.checks = parse_checks(checks);
      req.seed = seed;
      if (!seeds.empty()) req.seeds = parse_seed_range(seeds);
      req.budget = budget;
      return cmd_run(req, out_dir, out);
    }
    if (*explore) {
      ex.scenario = explore_scenario;
      if (!explore_out.empty()) ex.out_dir = explore_out;
      return cmd_explore(ex, out);
    }
    if (*replay_cmd) return cmd_replay(trace_file, out, err);
    if (*rerun) return cmd_rerun(manifest_file, out, err);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
  } catch (const IllFormedScenario& e) {
    err << "ill-formed scenario: " << e.what() << '\n';
  } catch (const DuelImpossible& e) {
    err << "duel impossible: " << e.what() << '\n';
  } catch (const StaleBallot& e) {
    err << "stale ballot: " << e.what() << '\n';
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kUsage;
}

}  // namespace synodsim::cli
