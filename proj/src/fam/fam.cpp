#include "synodsim/fam.hpp"

#include <algorithm>
#include <cassert>

#include "synodsim/errors.hpp"

namespace synodsim::fam {

namespace {

template <typename T>
std::strong_ordering compare_optional(const std::optional<T>& a, const std::optional<T>& b) {
  if (a.has_value() != b.has_value()) {
    return a.has_value() ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  if (a) return *a <=> *b;
  return std::strong_ordering::equal;
}

MessageBag& mutable_outbox(ActorState& state) {
  return std::visit([](auto& s) -> MessageBag& { return s.outbox; }, state);
}

bool names_bound(const Message& m, const Configuration& c) {
  auto bound = [&](ActorId id) { return c.available.contains(id) || c.failed.contains(id); };
  return bound(m.sender) && bound(m.receiver);
}

bool state_names_bound(const ActorState& state, const Configuration& c) {
  auto bound = [&](ActorId id) { return c.available.contains(id) || c.failed.contains(id); };
  for (const auto& m : outbox_of(state)) {
    if (!names_bound(m, c)) return false;
  }
  if (const auto* p = std::get_if<synod::ProposerState>(&state)) {
    if (!std::all_of(p->target_quorum.begin(), p->target_quorum.end(), bound)) return false;
    for (const auto& [id, m] : p->promises) {
      if (!bound(id) || !names_bound(m, c)) return false;
    }
    for (const auto& [id, m] : p->votes) {
      if (!bound(id) || !names_bound(m, c)) return false;
    }
  } else {
    const auto& a = std::get<synod::AcceptorState>(state);
    for (const auto& m : a.unresponded) {
      if (!names_bound(m, c)) return false;
    }
  }
  return true;
}

ActorState on_receive(ActorState state, const Message& m) {
  if (auto* p = std::get_if<synod::ProposerState>(&state)) {
    switch (m.kind) {
      case MessageKind::Promise1b: return synod::handle_promise(std::move(*p), m);
      case MessageKind::Voted2b: return synod::handle_voted(std::move(*p), m);
      default: return state;
    }
  }
  auto& a = std::get<synod::AcceptorState>(state);
  a.unresponded.push_back(m);
  switch (m.kind) {
    case MessageKind::Prepare1a: return synod::handle_prepare(std::move(a), m);
    case MessageKind::Accept2a: return synod::handle_accept(std::move(a), m);
    default:
      a.unresponded.pop_back();
      return state;
  }
}

}  // namespace

const MessageBag& outbox_of(const ActorState& state) {
  return std::visit([](const auto& s) -> const MessageBag& { return s.outbox; }, state);
}

const ActorState* Configuration::find(ActorId id) const {
  if (auto it = available.find(id); it != available.end()) return &it->second;
  if (auto it = failed.find(id); it != failed.end()) return &it->second;
  return nullptr;
}

const synod::ProposerState* Configuration::proposer(ActorId id) const {
  const auto* s = find(id);
  return s ? std::get_if<synod::ProposerState>(s) : nullptr;
}

const synod::AcceptorState* Configuration::acceptor(ActorId id) const {
  const auto* s = find(id);
  return s ? std::get_if<synod::AcceptorState>(s) : nullptr;
}

bool Configuration::operator==(const Configuration& other) const {
  const bool same_roster =
      roster == other.roster || (roster && other.roster && *roster == *other.roster);
  return same_roster && available == other.available && failed == other.failed &&
         in_flight == other.in_flight;
}

Configuration initial_configuration(std::shared_ptr<const Roster> roster) {
  Configuration c;
  const auto stride = static_cast<std::uint32_t>(roster->proposer_count());
  for (std::uint32_t i = 0; i < roster->size(); ++i) {
    const ActorId id{i};
    if (roster->role(id) == Role::Proposer) {
      c.available.emplace(id, synod::make_proposer(roster->info(id).value, stride,
                                                   roster->proposer_index(id)));
    } else {
      c.available.emplace(id, synod::AcceptorState{});
    }
  }
  c.roster = std::move(roster);
  return c;
}

std::string_view step_tag(StepKind kind) {
  switch (kind) {
    case StepKind::Propose: return "propose";
    case StepKind::Snd: return "snd";
    case StepKind::Rcv: return "rcv";
    case StepKind::Stp: return "stp";
    case StepKind::Bgn: return "bgn";
  }
  return "?";
}

TransitionStep TransitionStep::snd(const Message& m) {
  return TransitionStep{StepKind::Snd, m.sender, m, Ballot{}, {}};
}

TransitionStep TransitionStep::rcv(const Message& m) {
  return TransitionStep{StepKind::Rcv, m.receiver, m, Ballot{}, {}};
}

TransitionStep TransitionStep::stp(ActorId a) { return TransitionStep{StepKind::Stp, a, {}, {}, {}}; }

TransitionStep TransitionStep::bgn(ActorId a) { return TransitionStep{StepKind::Bgn, a, {}, {}, {}}; }

TransitionStep TransitionStep::propose(ActorId p, Ballot b, std::vector<ActorId> quorum) {
  std::sort(quorum.begin(), quorum.end());
  return TransitionStep{StepKind::Propose, p, std::nullopt, b, std::move(quorum)};
}

std::strong_ordering TransitionStep::operator<=>(const TransitionStep& o) const {
  if (auto c = kind <=> o.kind; c != 0) return c;
  if (auto c = actor <=> o.actor; c != 0) return c;
  if (auto c = compare_optional(message, o.message); c != 0) return c;
  if (auto c = ballot <=> o.ballot; c != 0) return c;
  return std::lexicographical_compare_three_way(quorum.begin(), quorum.end(), o.quorum.begin(),
                                                o.quorum.end());
}

bool well_formed(const Configuration& c) {
  for (const auto& [id, _] : c.available) {
    if (c.failed.contains(id)) return false;
  }
  for (const auto* side : {&c.available, &c.failed}) {
    for (const auto& [id, state] : *side) {
      if (!state_names_bound(state, c)) return false;
    }
  }
  return std::all_of(c.in_flight.begin(), c.in_flight.end(),
                     [&](const Message& m) { return names_bound(m, c); });
}

bool enabled(const Configuration& c, const TransitionStep& step) {
  switch (step.kind) {
    case StepKind::Stp: return c.available.contains(step.actor);
    case StepKind::Bgn: return c.failed.contains(step.actor);
    case StepKind::Snd: {
      auto it = c.available.find(step.actor);
      return it != c.available.end() && step.message && step.message->sender == step.actor &&
             outbox_of(it->second).contains(*step.message);
    }
    case StepKind::Rcv:
      return c.available.contains(step.actor) && step.message &&
             step.message->receiver == step.actor && c.in_flight.contains(*step.message);
    case StepKind::Propose: {
      auto it = c.available.find(step.actor);
      if (it == c.available.end()) return false;
      const auto* p = std::get_if<synod::ProposerState>(&it->second);
      if (!p || p->learned || step.ballot <= p->current_ballot || !synod::owns_ballot(*p, step.ballot)) {
        return false;
      }
      if (step.quorum.empty() || !c.roster) return false;
      return std::all_of(step.quorum.begin(), step.quorum.end(), [&](ActorId a) {
        return c.roster->contains(a) && c.roster->role(a) == Role::Acceptor;
      });
    }
  }
  return false;
}

Configuration apply(const Configuration& config, const TransitionStep& step) {
  if (!enabled(config, step)) {
    throw NotEnabled(std::string(step_tag(step.kind)) + " step not enabled for actor " +
                     std::to_string(step.actor.index));
  }
  Configuration next = config;
  switch (step.kind) {
    case StepKind::Stp: {
      auto node = next.available.extract(step.actor);
      next.failed.insert(std::move(node));
      break;
    }
    case StepKind::Bgn: {
      auto node = next.failed.extract(step.actor);
      next.available.insert(std::move(node));
      break;
    }
    case StepKind::Snd: {
      mutable_outbox(next.available.at(step.actor)).erase_one(*step.message);
      next.in_flight.insert(*step.message);
      break;
    }
    case StepKind::Rcv: {
      next.in_flight.erase_one(*step.message);
      auto& state = next.available.at(step.actor);
      state = on_receive(std::move(state), *step.message);
      break;
    }
    case StepKind::Propose: {
      auto& state = next.available.at(step.actor);
      state = synod::propose(std::get<synod::ProposerState>(std::move(state)), step.actor,
                             step.ballot, step.quorum);
      break;
    }
  }
  assert(well_formed(next));
  return next;
}

std::vector<TransitionStep> base_steps(const Configuration& c) {
  std::vector<TransitionStep> out;
  for (const auto& [id, state] : c.available) {
    const Message* prev = nullptr;
    for (const auto& m : outbox_of(state)) {
      if (!prev || *prev != m) out.push_back(TransitionStep::snd(m));
      prev = &m;
    }
  }
  const Message* prev = nullptr;
  for (const auto& m : c.in_flight) {
    if ((!prev || *prev != m) && c.available.contains(m.receiver)) {
      out.push_back(TransitionStep::rcv(m));
    }
    prev = &m;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace synodsim::fam
