#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "synodsim/path.hpp"
#include "synodsim/scenario.hpp"

namespace synodsim::sched {

/// Uniform integer in [0, n) from a 64-bit engine, independent of the
/// standard library's distribution implementation.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

/// Picks among enabled base steps with bounded unfairness: a step pending for
/// `bound` consecutive selections without being chosen is chosen next.
class FairPicker {
 public:
  FairPicker(std::size_t bound, std::uint64_t seed);

  /// Uniform random choice subject to the aging bound. `pending` non-empty.
  fam::TransitionStep pick(std::span<const fam::TransitionStep> pending);
  /// Rotates over actors; canonical-first step of the next actor with work,
  /// subject to the aging bound.
  fam::TransitionStep pick_round_robin(std::span<const fam::TransitionStep> pending,
                                       std::size_t roster_size);

  std::size_t age(const fam::TransitionStep& step) const;
  std::size_t bound() const { return bound_; }

 private:
  std::optional<fam::TransitionStep> overdue(std::span<const fam::TransitionStep> pending) const;
  void record(std::span<const fam::TransitionStep> pending, const fam::TransitionStep& chosen);

  std::size_t bound_;
  std::mt19937_64 rng_;
  std::map<fam::TransitionStep, std::size_t> ages_;
  std::uint32_t next_actor_ = 0;
};

/// Removes Snd/Rcv steps carrying a ballot above the protected one toward any
/// member of the protected quorum, while the window is open (clock at or past
/// activation and the protected proposer has not learned).
std::vector<fam::TransitionStep> cnd_filter(std::span<const fam::TransitionStep> pending,
                                            const CndParams& cnd, Ballot protected_ballot,
                                            std::size_t clock, bool protected_learned);

struct DuelState {
  ActorId first;
  ActorId second;
};

/// Throws DuelImpossible unless the roster has exactly two proposers.
DuelState make_duel(const Roster& roster);

/// Interleaves two proposers so each finishes phase 1 after the other's
/// phase 1 and before the other's phase 2. Returns nullopt when nothing can
/// be scheduled (e.g. the proposer due to move is failed).
std::optional<fam::TransitionStep> adversarial_duel_pick(
    std::span<const fam::TransitionStep> pending, const fam::Configuration& config,
    const DuelState& duel);

enum class StopReason : std::uint8_t { Budget, Learned, Quiescent };

struct RunResult {
  fam::Path path;
  std::size_t reproposals = 0;
  /// Ballot of the Cnd-protected proposal once issued. Stays empty if the
  /// protected proposer decided before the window opened.
  std::optional<Ballot> protected_ballot{};
  std::optional<std::size_t> protected_index{};
  /// No nonfaulty actor ends failed with pending sends or deliveries.
  bool nonfaulty_obligations_met = true;
  StopReason stop = StopReason::Budget;
};

/// Deterministic function of the scenario (seed included). Throws
/// IllFormedScenario or DuelImpossible before taking any step.
RunResult run(const Scenario& scenario);

/// Reduces one run to a summary. Called once per scenario of a sweep;
/// results keep the input order regardless of execution order.
template <typename Summary>
using RunReducer = std::function<Summary(std::uint64_t seed, const RunResult&)>;

/// Serial reference sweep.
template <typename Summary>
std::vector<Summary> sweep_serial(std::span<const Scenario> scenarios,
                                  const RunReducer<Summary>& summarize);
/// OpenMP sweep; identical results to sweep_serial.
template <typename Summary>
std::vector<Summary> sweep(std::span<const Scenario> scenarios,
                           const RunReducer<Summary>& summarize);

}  // namespace synodsim::sched

#include "synodsim/sweep_impl.hpp"
