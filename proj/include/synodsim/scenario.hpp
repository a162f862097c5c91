#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "synodsim/ids.hpp"

namespace synodsim::sched {

enum class PolicyKind : std::uint8_t { FairRandom, RoundRobin, AdversarialDuel, Cnd };

std::string_view policy_name(PolicyKind kind);

/// Window protecting proposal `ballot` of `proposer` toward `quorum` from
/// higher-numbered interference, opened at step `activation`.
struct CndParams {
  ActorId proposer;
  std::optional<Ballot> ballot;  // nullopt: chosen at activation above every ballot seen
  std::vector<ActorId> quorum;
  std::size_t activation = 0;
  PolicyKind before = PolicyKind::FairRandom;  // policy in force before activation
};

struct Policy {
  PolicyKind kind = PolicyKind::FairRandom;
  std::optional<CndParams> cnd;  // set iff kind == Cnd
};

enum class FailureAction : std::uint8_t { Stp, Bgn };

struct FailureEvent {
  std::size_t index = 0;  // applied once the path has at least this many steps
  ActorId actor;
  FailureAction action = FailureAction::Stp;
};

enum class StopRule : std::uint8_t { AllLearned, FirstLearned };

struct Scenario {
  std::string name;
  std::shared_ptr<const Roster> roster;
  std::set<ActorId> nonfaulty;
  Policy policy;
  std::vector<FailureEvent> failures;  // sorted by index, stable
  std::size_t budget = 0;
  std::size_t patience = 0;
  std::size_t fairness_bound = 64;
  std::uint64_t seed = 0;
  std::size_t max_retries = 0;  // explorer only
  StopRule stop = StopRule::AllLearned;
};

/// Parses the `.scn` format. Throws ParseError naming line and field.
Scenario parse_scenario(std::istream& in, std::string name = "scenario");
Scenario load_scenario(const std::filesystem::path& file);

/// Serializes back to `.scn` text (canonical section and key order).
std::string scenario_text(const Scenario& scenario);

/// Throws IllFormedScenario naming the violated invariant.
void validate(const Scenario& scenario);

/// True if `quorum` is a non-empty strict majority of the acceptors.
bool is_quorum(const Roster& roster, const std::vector<ActorId>& quorum);

struct RandomScenarioLimits {
  std::size_t max_proposers = 3;
  std::size_t max_acceptors = 5;
  std::size_t budget = 5000;
};

/// Valid scenario drawn from `seed`: roster, quorums, policy, failure plan.
Scenario random_scenario(std::uint64_t seed, const RandomScenarioLimits& limits = {});

}  // namespace synodsim::sched
