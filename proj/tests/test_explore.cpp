#include <doctest.h>

#include "support.hpp"
#include "synodsim/explore.hpp"
#include "synodsim/synod.hpp"

using namespace synodsim;
using namespace synodsim::check;
using fam::Configuration;
using fam::TransitionStep;

namespace {

struct NaiveCount {
  long double paths = 0;
  long double learned = 0;
  std::size_t longest = 0;
};

/// Plain recursive enumeration without state deduplication: each proposer
/// proposes once, then only base steps.
void enumerate(const Configuration& c, std::vector<bool>& proposed, std::size_t depth, NaiveCount& out) {
  const auto proposers = c.roster->proposers();
  bool all = true;
  bool any = false;
  for (auto p : proposers) {
    all = all && c.proposer(p)->learned.has_value();
    any = any || c.proposer(p)->learned.has_value();
  }
  std::vector<TransitionStep> steps;
  if (!all) {
    steps = fam::base_steps(c);
    for (std::size_t i = 0; i < proposers.size(); ++i) {
      if (!proposed[i]) {
        steps.push_back(TransitionStep::propose(proposers[i], synod::next_ballot(*c.proposer(proposers[i])),
                                                c.roster->info(proposers[i]).quorum));
      }
    }
  }
  if (steps.empty()) {
    out.paths += 1;
    if (any) out.learned += 1;
    out.longest = std::max(out.longest, depth);
    return;
  }
  for (const auto& s : steps) {
    std::size_t who = proposers.size();
    if (s.kind == fam::StepKind::Propose) {
      who = static_cast<std::size_t>(std::find(proposers.begin(), proposers.end(), s.actor) - proposers.begin());
      proposed[who] = true;
    }
    enumerate(fam::apply(c, s), proposed, depth + 1, out);
    if (who < proposers.size()) proposed[who] = false;
  }
}

ExploreOptions opts(std::size_t depth, std::size_t retries = 0, std::size_t crashes = 0) {
  ExploreOptions o;
  o.max_depth = depth;
  o.fairness_bound = 64;
  o.max_retries = retries;
  o.max_crashes = crashes;
  return o;
}

void same_report(const ExplorationReport& a, const ExplorationReport& b) {
  CHECK(a.states == b.states);
  CHECK(a.transitions == b.transitions);
  CHECK(a.max_depth_reached == b.max_depth_reached);
  CHECK(a.terminal_states == b.terminal_states);
  CHECK(a.maximal_states == b.maximal_states);
  CHECK(a.truncated_states == b.truncated_states);
  CHECK(a.learned_terminal_states == b.learned_terminal_states);
  CHECK(a.paths == b.paths);
  CHECK(a.learned_paths == b.learned_paths);
  CHECK(a.safety_holds == b.safety_holds);
  CHECK(a.invariant_violations == b.invariant_violations);
  CHECK(a.terminal_digests == b.terminal_digests);
  CHECK(a.replay_ok == b.replay_ok);
}

}  // namespace

TEST_CASE("depth 0 explores only the initial state") {
  const auto c = fam::initial_configuration(testing::make_roster(1, 3, 2));
  const auto r = explore(c, opts(0));
  CHECK(r.states == 1);
  CHECK(r.transitions == 0);
  CHECK(r.truncated_states == 1);
  CHECK(r.paths == 1);
  CHECK(r.learned_fraction() == 0.0);
  CHECK_FALSE(r.complete());
}

TEST_CASE("path counts agree with naive enumeration") {
  for (auto [proposers, acceptors, quorum] : {std::tuple{1, 1, 1}, std::tuple{1, 2, 2}, std::tuple{1, 3, 2}, std::tuple{2, 1, 1}}) {
    CAPTURE(proposers);
    CAPTURE(acceptors);
    const auto c = fam::initial_configuration(testing::make_roster(proposers, acceptors, quorum));
    NaiveCount naive;
    std::vector<bool> proposed(proposers, false);
    enumerate(c, proposed, 0, naive);
    const auto r = explore_serial(c, opts(64));
    CHECK(r.complete());
    CHECK(r.paths == naive.paths);
    CHECK(r.learned_paths == naive.learned);
    CHECK(r.max_depth_reached == naive.longest);
  }
}

TEST_CASE("one proposer, three acceptors, quorum of two: every path learns") {
  const auto c = fam::initial_configuration(testing::make_roster(1, 3, 2));
  for (auto [retries, crashes] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{1, 1}}) {
    CAPTURE(retries);
    CAPTURE(crashes);
    const auto r = explore(c, opts(64, retries, crashes));
    CHECK(r.complete());
    CHECK(r.max_depth_reached <= 64);
    CHECK(r.paths > 0);
    CHECK(r.learned_paths == r.paths);
    CHECK(r.learned_fraction() == 1.0);
    CHECK(r.safety_holds);
    CHECK(r.invariant_violations == 0);
    CHECK(r.replay_checked);
    CHECK(r.replay_ok);
  }
}

TEST_CASE("two proposers without a protected window have non-progress paths") {
  const auto c = fam::initial_configuration(testing::make_roster(2, 3, 2));
  const auto r = explore(c, opts(22, 1));
  CHECK_FALSE(r.state_cap_exceeded);
  CHECK(r.learned_paths < r.paths);
  CHECK(r.safety_holds);
  CHECK(r.invariant_violations == 0);
  CHECK(r.replay_ok);
}

TEST_CASE("parallel explorer matches the serial reference") {
  for (auto [proposers, acceptors, quorum, depth, retries, crashes] :
       {std::tuple{1, 3, 2, 64, 1, 1}, std::tuple{2, 1, 1, 30, 1, 0}, std::tuple{2, 3, 2, 16, 1, 1}}) {
    const auto c = fam::initial_configuration(testing::make_roster(proposers, acceptors, quorum));
    same_report(explore(c, opts(depth, retries, crashes)), explore_serial(c, opts(depth, retries, crashes)));
  }
}

TEST_CASE("fairness ages are tracked beyond the bound") {
  const auto c = fam::initial_configuration(testing::make_roster(1, 2, 2));
  ExploreOptions o = opts(40, 1);
  o.fairness_bound = 2;
  const auto aged = explore(c, o);
  CHECK(aged.safety_holds);
  CHECK(aged.replay_ok);
  CHECK(aged.learned_paths == aged.paths);
  same_report(aged, explore_serial(c, o));
}

TEST_CASE("state cap aborts with a partial report") {
  const auto c = fam::initial_configuration(testing::make_roster(3, 5));
  ExploreOptions o = opts(40, 2);
  o.state_cap = 2000;
  const auto r = explore(c, o);
  CHECK(r.state_cap_exceeded);
  CHECK_FALSE(r.complete());
  CHECK(r.states > 2000);
  CHECK(report_text(r).find("state_cap_exceeded = true") != std::string::npos);
}

TEST_CASE("report text") {
  const auto c = fam::initial_configuration(testing::make_roster(1, 1, 1));
  const auto text = report_text(explore(c, opts(64)));
  CHECK(text.rfind(std::string(kReportHeader) + "\n", 0) == 0);
  CHECK(text.find("learned_coverage = 1\n") != std::string::npos);
  CHECK(text.find("safety = holds\n") != std::string::npos);
  CHECK(text.find("replay = ok\n") != std::string::npos);
}
