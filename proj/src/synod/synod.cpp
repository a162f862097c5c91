#include "synodsim/synod.hpp"

#include <algorithm>
#include <string>

#include "synodsim/errors.hpp"

namespace synodsim::synod {

namespace {

void forget(std::vector<Message>& unresponded, const Message& m) {
  auto it = std::find(unresponded.begin(), unresponded.end(), m);
  if (it != unresponded.end()) unresponded.erase(it);
}

bool covers(const std::map<ActorId, Message>& responses, std::span<const ActorId> quorum) {
  return std::all_of(quorum.begin(), quorum.end(),
                     [&](ActorId a) { return responses.contains(a); });
}

}  // namespace

ProposerState make_proposer(Value own_value, std::uint32_t stride, std::uint32_t offset) {
  ProposerState p;
  p.own_value = own_value;
  p.ballot_stride = stride == 0 ? 1 : stride;
  p.ballot_offset = offset;
  return p;
}

ProposerState propose(ProposerState p, ActorId self, Ballot b, std::span<const ActorId> quorum) {
  if (b <= p.current_ballot) {
    throw StaleBallot("ballot " + std::to_string(b.number) + " not above current " +
                      std::to_string(p.current_ballot.number));
  }
  p.current_ballot = b;
  p.target_quorum.assign(quorum.begin(), quorum.end());
  p.promises.clear();
  p.votes.clear();
  for (ActorId a : quorum) {
    p.outbox.insert(Message{self, a, MessageKind::Prepare1a, b, Value::null(), std::nullopt});
  }
  return p;
}

Ballot next_ballot(const ProposerState& p) { return next_ballot_above(p, Ballot{}); }

Ballot next_ballot_above(const ProposerState& p, Ballot floor) {
  const std::uint64_t n = p.ballot_stride;
  const std::uint64_t above = std::max(p.current_ballot.number, floor.number);
  // Smallest b = k*n + offset with b > above.
  std::uint64_t k = above >= p.ballot_offset ? (above - p.ballot_offset) / n + 1 : 0;
  std::uint64_t b = k * n + p.ballot_offset;
  if (b == 0) b += n;
  return Ballot{b};
}

bool owns_ballot(const ProposerState& p, Ballot b) {
  return b.number > 0 && b.number % p.ballot_stride == p.ballot_offset;
}

AcceptorState handle_prepare(AcceptorState a, const Message& m) {
  forget(a.unresponded, m);
  if (m.ballot > a.highest_seen) {
    a.highest_seen = m.ballot;
    a.outbox.insert(Message{m.receiver, m.sender, MessageKind::Promise1b, m.ballot, Value::null(),
                            a.accepted});
  }
  return a;
}

AcceptorState handle_accept(AcceptorState a, const Message& m) {
  forget(a.unresponded, m);
  if (m.ballot >= a.highest_seen) {
    a.accepted = Accepted{m.ballot, m.value};
    a.highest_seen = m.ballot;
    a.outbox.insert(
        Message{m.receiver, m.sender, MessageKind::Voted2b, m.ballot, m.value, std::nullopt});
  }
  return a;
}

ProposerState handle_promise(ProposerState p, const Message& m) {
  if (p.learned || m.ballot != p.current_ballot) return p;
  const bool before = covers(p.promises, p.target_quorum);
  p.promises.insert_or_assign(m.sender, m);
  if (!before && covers(p.promises, p.target_quorum)) {
    const Value v = decide_value(p);
    for (ActorId a : p.target_quorum) {
      p.outbox.insert(Message{m.receiver, a, MessageKind::Accept2a, p.current_ballot, v, std::nullopt});
    }
  }
  return p;
}

ProposerState handle_voted(ProposerState p, const Message& m) {
  if (p.learned || m.ballot != p.current_ballot) return p;
  p.votes.insert_or_assign(m.sender, m);
  if (covers(p.votes, p.target_quorum)) p.learned = Accepted{p.current_ballot, m.value};
  return p;
}

Value decide_value(const ProposerState& p) {
  std::optional<Accepted> best;
  for (const auto& [_, promise] : p.promises) {
    if (promise.prior && (!best || promise.prior->ballot > best->ballot)) best = promise.prior;
  }
  return best ? best->value : p.own_value;
}

QuorumPredicates quorum_predicates(const ProposerState& p) {
  return QuorumPredicates{
      !p.target_quorum.empty() && covers(p.promises, p.target_quorum),
      !p.target_quorum.empty() && covers(p.votes, p.target_quorum),
      p.learned.has_value(),
  };
}

bool has_promises(const ProposerState& p, Ballot b, std::span<const ActorId> quorum) {
  return p.current_ballot == b && !quorum.empty() && covers(p.promises, quorum);
}

bool has_votes(const ProposerState& p, Ballot b, std::span<const ActorId> quorum) {
  return p.current_ballot == b && !quorum.empty() && covers(p.votes, quorum);
}

}  // namespace synodsim::synod
