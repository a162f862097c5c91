#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "synodsim/fam.hpp"

namespace synodsim::check {

struct ExploreOptions {
  std::size_t max_depth = 64;
  std::size_t fairness_bound = 64;
  std::size_t state_cap = 1'000'000;
  /// Re-proposals allowed per proposer beyond its first proposal.
  std::size_t max_retries = 0;
  /// Stp transitions allowed per path. Bgn is always enabled.
  std::size_t max_crashes = 0;
  /// Rebuild every explored state by replaying its discovery path through
  /// fam::apply and compare digests.
  bool verify_replay = true;
};

struct ExplorationReport {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t max_depth = 0;          // option echoed
  std::size_t fairness_bound = 0;     // option echoed
  std::size_t max_depth_reached = 0;  // longest explored path
  std::size_t terminal_states = 0;    // maximal + truncated
  std::size_t maximal_states = 0;     // no successor
  std::size_t truncated_states = 0;   // at the depth limit with successors
  std::size_t learned_terminal_states = 0;
  long double paths = 0;              // distinct paths from the initial state to a terminal
  long double learned_paths = 0;
  bool safety_holds = true;
  std::size_t safety_violations = 0;      // states where two chosen values differ
  std::size_t invariant_violations = 0;   // ℒ ⇒ Φ ⇒ φ, Φ ⇒ ℒ, accepted ≤ β
  bool state_cap_exceeded = false;
  bool replay_checked = false;
  bool replay_ok = false;
  std::vector<std::uint64_t> terminal_digests;  // sorted, distinct configurations
  double elapsed_seconds = 0;

  /// Fraction of terminal paths on which some proposer learned.
  double learned_fraction() const;
  bool complete() const { return !state_cap_exceeded && truncated_states == 0; }
};

/// Bounded exhaustive exploration of all fair interleavings from `initial`.
/// Level-synchronous; frontier expansion runs in parallel under OpenMP.
ExplorationReport explore(const fam::Configuration& initial, const ExploreOptions& options);

/// Serial reference implementation with identical results.
ExplorationReport explore_serial(const fam::Configuration& initial, const ExploreOptions& options);

inline constexpr std::string_view kReportHeader = "synodsim-report v1";

/// Structured-text summary. Elapsed time is the last line.
std::string report_text(const ExplorationReport& report);

}  // namespace synodsim::check
