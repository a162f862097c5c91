#pragma once

#include <map>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "synodsim/ids.hpp"
#include "synodsim/message.hpp"
#include "synodsim/synod.hpp"

namespace synodsim::fam {

using ActorState = std::variant<synod::ProposerState, synod::AcceptorState>;

/// Snapshot ⟨α ‖ ᾱ ‖ μ⟩. Treated as an immutable value: transitions return
/// fresh configurations.
struct Configuration {
  std::shared_ptr<const Roster> roster;
  std::map<ActorId, ActorState> available;  // α
  std::map<ActorId, ActorState> failed;     // ᾱ
  MessageBag in_flight;                     // μ

  bool is_available(ActorId id) const { return available.contains(id); }
  /// State of an actor on either side, or nullptr if the actor is unknown.
  const ActorState* find(ActorId id) const;
  const synod::ProposerState* proposer(ActorId id) const;
  const synod::AcceptorState* acceptor(ActorId id) const;

  bool operator==(const Configuration& other) const;
};

/// Builds the initial configuration: every actor available and fresh.
Configuration initial_configuration(std::shared_ptr<const Roster> roster);

enum class StepKind : std::uint8_t { Propose, Snd, Rcv, Stp, Bgn };

std::string_view step_tag(StepKind kind);

/// One transition. `message` is set iff kind is Snd or Rcv; `ballot` and
/// `quorum` are set iff kind is Propose.
struct TransitionStep {
  StepKind kind = StepKind::Stp;
  ActorId actor;
  std::optional<Message> message;
  Ballot ballot;
  std::vector<ActorId> quorum;

  static TransitionStep snd(const Message& m);
  static TransitionStep rcv(const Message& m);
  static TransitionStep stp(ActorId a);
  static TransitionStep bgn(ActorId a);
  static TransitionStep propose(ActorId p, Ballot b, std::vector<ActorId> quorum);

  bool is_base() const { return kind == StepKind::Snd || kind == StepKind::Rcv; }

  bool operator==(const TransitionStep&) const = default;
  std::strong_ordering operator<=>(const TransitionStep& other) const;
};

/// Free names bound, and α, ᾱ disjoint.
bool well_formed(const Configuration& config);

bool enabled(const Configuration& config, const TransitionStep& step);

/// Throws NotEnabled if the step is not enabled.
Configuration apply(const Configuration& config, const TransitionStep& step);

/// Every enabled Snd and Rcv step, in canonical order, one per distinct step.
std::vector<TransitionStep> base_steps(const Configuration& config);

/// Outbox of an actor's state.
const MessageBag& outbox_of(const ActorState& state);

}  // namespace synodsim::fam
