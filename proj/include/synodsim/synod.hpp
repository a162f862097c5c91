#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "synodsim/ids.hpp"
#include "synodsim/message.hpp"

namespace synodsim::synod {

/// Acceptor local state ⟨η, β, v⟩ plus the messages it is obligated to send.
struct AcceptorState {
  std::vector<Message> unresponded;  // η; empty between steps
  Ballot highest_seen;               // β
  std::optional<Accepted> accepted;  // highest-numbered proposal accepted
  MessageBag outbox;

  bool operator==(const AcceptorState&) const = default;
};

struct ProposerState {
  Value own_value;
  Ballot current_ballot;
  std::vector<ActorId> target_quorum;
  std::map<ActorId, Message> promises;  // keyed by sender, current ballot only
  std::map<ActorId, Message> votes;
  std::optional<Accepted> learned;
  MessageBag outbox;
  std::uint32_t ballot_stride = 1;
  std::uint32_t ballot_offset = 0;

  bool operator==(const ProposerState&) const = default;
};

ProposerState make_proposer(Value own_value, std::uint32_t stride, std::uint32_t offset);

/// Starts a round at ballot `b` toward `quorum`. Throws StaleBallot unless
/// b > current_ballot.
ProposerState propose(ProposerState p, ActorId self, Ballot b, std::span<const ActorId> quorum);

/// Smallest ballot of this proposer's residue class above its current ballot.
Ballot next_ballot(const ProposerState& p);
/// Same, but also above `floor`.
Ballot next_ballot_above(const ProposerState& p, Ballot floor);
/// True if `b` belongs to the proposer's residue class.
bool owns_ballot(const ProposerState& p, Ballot b);

AcceptorState handle_prepare(AcceptorState a, const Message& m);
AcceptorState handle_accept(AcceptorState a, const Message& m);
ProposerState handle_promise(ProposerState p, const Message& m);
ProposerState handle_voted(ProposerState p, const Message& m);

/// Value for phase 2: the prior with the highest ballot among collected
/// promises, or the proposer's own value if none reported one.
Value decide_value(const ProposerState& p);

struct QuorumPredicates {
  bool promised = false;  // φ
  bool voted = false;     // Φ
  bool learned = false;   // ℒ
};

QuorumPredicates quorum_predicates(const ProposerState& p);

/// φ(p, b, Q): promises for ballot `b` from every member of `quorum`.
bool has_promises(const ProposerState& p, Ballot b, std::span<const ActorId> quorum);
/// Φ(p, b, Q).
bool has_votes(const ProposerState& p, Ballot b, std::span<const ActorId> quorum);

}  // namespace synodsim::synod
