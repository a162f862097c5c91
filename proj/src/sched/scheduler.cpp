#include "synodsim/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <tuple>

#include "synodsim/errors.hpp"

namespace synodsim::sched {

using fam::Configuration;
using fam::StepKind;
using fam::TransitionStep;

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling keeps the draw unbiased and platform independent.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

FairPicker::FairPicker(std::size_t bound, std::uint64_t seed) : bound_(bound), rng_(seed) {}

std::size_t FairPicker::age(const TransitionStep& step) const {
  auto it = ages_.find(step);
  return it == ages_.end() ? 0 : it->second;
}

std::optional<TransitionStep> FairPicker::overdue(std::span<const TransitionStep> pending) const {
  const TransitionStep* oldest = nullptr;
  std::size_t oldest_age = 0;
  for (const auto& step : pending) {
    const auto a = age(step);
    if (a >= bound_ && a > oldest_age) {
      oldest = &step;
      oldest_age = a;
    }
  }
  if (!oldest) return std::nullopt;
  return *oldest;
}

void FairPicker::record(std::span<const TransitionStep> pending, const TransitionStep& chosen) {
  std::map<TransitionStep, std::size_t> next;
  for (const auto& step : pending) {
    if (step == chosen) continue;
    next.emplace(step, age(step) + 1);
  }
  ages_ = std::move(next);
}

TransitionStep FairPicker::pick(std::span<const TransitionStep> pending) {
  auto forced = overdue(pending);
  TransitionStep chosen = forced ? *forced : pending[uniform_below(rng_, pending.size())];
  record(pending, chosen);
  return chosen;
}

TransitionStep FairPicker::pick_round_robin(std::span<const TransitionStep> pending,
                                            std::size_t roster_size) {
  auto chosen = overdue(pending);
  if (!chosen) {
    const auto n = static_cast<std::uint32_t>(std::max<std::size_t>(roster_size, 1));
    for (std::uint32_t k = 0; k < n && !chosen; ++k) {
      const ActorId actor{(next_actor_ + k) % n};
      auto it = std::find_if(pending.begin(), pending.end(),
                             [&](const TransitionStep& s) { return s.actor == actor; });
      if (it != pending.end()) {
        chosen = *it;
        next_actor_ = (actor.index + 1) % n;
      }
    }
    if (!chosen) chosen = pending.front();
  }
  record(pending, *chosen);
  return *chosen;
}

std::vector<TransitionStep> cnd_filter(std::span<const TransitionStep> pending, const CndParams& cnd,
                                       Ballot protected_ballot, std::size_t clock,
                                       bool protected_learned) {
  std::vector<TransitionStep> out(pending.begin(), pending.end());
  if (clock < cnd.activation || protected_learned) return out;
  auto interferes = [&](const TransitionStep& s) {
    return s.is_base() && s.message->ballot > protected_ballot &&
           std::find(cnd.quorum.begin(), cnd.quorum.end(), s.message->receiver) != cnd.quorum.end();
  };
  out.erase(std::remove_if(out.begin(), out.end(), interferes), out.end());
  return out;
}

DuelState make_duel(const Roster& roster) {
  auto ps = roster.proposers();
  if (ps.size() != 2) {
    throw DuelImpossible("adversarial duel needs exactly 2 proposers, roster has " +
                         std::to_string(ps.size()));
  }
  return DuelState{ps[0], ps[1]};
}

std::optional<TransitionStep> adversarial_duel_pick(std::span<const TransitionStep> pending,
                                                    const Configuration& config,
                                                    const DuelState& duel) {
  const auto* first = config.proposer(duel.first);
  const auto* second = config.proposer(duel.second);
  if (!first || !second) return std::nullopt;

  auto propose = [&](ActorId who, const synod::ProposerState& p,
                     Ballot floor) -> std::optional<TransitionStep> {
    if (!config.is_available(who) || p.learned) return std::nullopt;
    return TransitionStep::propose(who, synod::next_ballot_above(p, floor),
                                   config.roster->info(who).quorum);
  };

  if (first->current_ballot.number == 0 && second->current_ballot.number == 0) {
    return propose(duel.first, *first, Ballot{});
  }
  const bool first_leads = first->current_ballot > second->current_ballot;
  const ActorId leader = first_leads ? duel.first : duel.second;
  const ActorId trailer = first_leads ? duel.second : duel.first;
  const auto& lead = first_leads ? *first : *second;
  const auto& trail = first_leads ? *second : *first;
  const bool leader_promised = synod::quorum_predicates(lead).promised;

  // The leader's accepts never go out; the trailer's only once the leader
  // holds promises that outrank them.
  auto held = [&](const TransitionStep& s) {
    if (!s.is_base() || s.message->kind != MessageKind::Accept2a) return false;
    return s.message->sender == leader || !leader_promised;
  };
  for (const auto& s : pending) {
    if (!held(s)) return s;
  }
  return propose(trailer, trail, lead.current_ballot);
}

namespace {

using ProgressKey = std::tuple<Ballot, std::size_t, std::size_t, bool>;

ProgressKey progress_key(const Configuration& c, ActorId p) {
  const auto* s = c.proposer(p);
  return {s->current_ballot, s->promises.size(), s->votes.size(), s->learned.has_value()};
}

bool learned(const Configuration& c, ActorId p) { return c.proposer(p)->learned.has_value(); }

Ballot highest_ballot(const Configuration& c) {
  Ballot top;
  auto bump = [&](Ballot b) { top = std::max(top, b); };
  for (const auto* side : {&c.available, &c.failed}) {
    for (const auto& [id, state] : *side) {
      if (const auto* p = std::get_if<synod::ProposerState>(&state)) {
        bump(p->current_ballot);
      } else {
        const auto& a = std::get<synod::AcceptorState>(state);
        bump(a.highest_seen);
      }
      for (const auto& m : fam::outbox_of(state)) bump(m.ballot);
    }
  }
  for (const auto& m : c.in_flight) bump(m.ballot);
  return top;
}

}  // namespace

RunResult run(const Scenario& s) {
  validate(s);
  const Roster& roster = *s.roster;
  const auto proposers = roster.proposers();
  const CndParams* cnd = s.policy.cnd ? &*s.policy.cnd : nullptr;

  std::optional<DuelState> duel;
  if (s.policy.kind == PolicyKind::AdversarialDuel ||
      (cnd && cnd->before == PolicyKind::AdversarialDuel)) {
    duel = make_duel(roster);
  }

  RunResult res{fam::Path(fam::initial_configuration(s.roster))};
  fam::Path& path = res.path;
  FairPicker picker(s.fairness_bound, s.seed);

  std::map<ActorId, std::size_t> stall;
  for (ActorId p : proposers) stall[p] = s.patience;  // first proposal is due at once
  std::set<ActorId> proposed;
  std::size_t next_failure = 0;
  bool issued = false;

  auto take = [&](const TransitionStep& step) {
    std::map<ActorId, ProgressKey> before;
    for (ActorId p : proposers) before[p] = progress_key(path.last(), p);
    path.extend(step);
    if (step.kind == StepKind::Propose && !proposed.insert(step.actor).second) ++res.reproposals;
    for (ActorId p : proposers) {
      if (progress_key(path.last(), p) != before[p]) {
        stall[p] = 0;
      } else {
        ++stall[p];
      }
    }
  };

  auto apply_failure = [&]() -> bool {
    while (next_failure < s.failures.size()) {
      const auto& ev = s.failures[next_failure++];
      auto step = ev.action == FailureAction::Stp ? TransitionStep::stp(ev.actor)
                                                  : TransitionStep::bgn(ev.actor);
      if (fam::enabled(path.last(), step)) {
        take(step);
        return true;
      }
    }
    return false;
  };

  auto done = [&](const Configuration& c) {
    for (ActorId a : s.nonfaulty) {
      if (c.failed.contains(a)) return false;
    }
    if (s.stop == StopRule::FirstLearned) {
      return std::any_of(proposers.begin(), proposers.end(), [&](ActorId p) { return learned(c, p); });
    }
    return std::all_of(proposers.begin(), proposers.end(), [&](ActorId p) { return learned(c, p); });
  };

  auto eligible = [&](const Configuration& c, ActorId p) {
    if (!c.is_available(p) || learned(c, p)) return false;
    return !(cnd && issued && p == cnd->proposer);
  };

  res.stop = StopReason::Budget;
  while (path.size() < s.budget) {
    if (next_failure < s.failures.size() && s.failures[next_failure].index <= path.size()) {
      if (apply_failure()) continue;
    }
    const Configuration& c = path.last();
    if (done(c)) {
      res.stop = StopReason::Learned;
      break;
    }

    const bool window = cnd && path.size() >= cnd->activation;
    if (window && !issued && learned(c, cnd->proposer)) {
      issued = true;  // decided before the window opened; nothing to protect
    } else if (window && !issued && c.is_available(cnd->proposer)) {
      const auto& p = *c.proposer(cnd->proposer);
      const Ballot b = cnd->ballot ? *cnd->ballot : synod::next_ballot_above(p, highest_ballot(c));
      if (b <= p.current_ballot) {
        throw IllFormedScenario("cnd: protected ballot " + std::to_string(b.number) +
                                " is not above the proposer's ballot at activation");
      }
      take(TransitionStep::propose(cnd->proposer, b, cnd->quorum));
      issued = true;
      res.protected_ballot = b;
      res.protected_index = path.size();
      continue;
    }

    const PolicyKind active = cnd ? (window ? PolicyKind::Cnd : cnd->before) : s.policy.kind;
    auto pending = fam::base_steps(c);

    if (active == PolicyKind::AdversarialDuel) {
      if (auto step = adversarial_duel_pick(pending, c, *duel)) {
        take(*step);
        continue;
      }
      if (apply_failure()) continue;
      res.stop = StopReason::Quiescent;
      break;
    }

    std::optional<TransitionStep> retry;
    for (ActorId p : proposers) {
      if (eligible(c, p) && stall[p] >= s.patience) {
        retry = TransitionStep::propose(p, synod::next_ballot(*c.proposer(p)), roster.info(p).quorum);
        break;
      }
    }
    if (retry) {
      take(*retry);
      continue;
    }

    if (window && res.protected_ballot) {
      pending = cnd_filter(pending, *cnd, *res.protected_ballot, path.size(),
                           learned(c, cnd->proposer));
    }
    if (pending.empty()) {
      if (apply_failure()) continue;
      // Timeout: nothing to deliver, so a waiting proposer retries now.
      auto it = std::find_if(proposers.begin(), proposers.end(),
                             [&](ActorId p) { return eligible(c, p); });
      if (it != proposers.end()) {
        take(TransitionStep::propose(*it, synod::next_ballot(*c.proposer(*it)),
                                     roster.info(*it).quorum));
        continue;
      }
      res.stop = StopReason::Quiescent;
      break;
    }
    take(active == PolicyKind::RoundRobin ? picker.pick_round_robin(pending, roster.size())
                                          : picker.pick(pending));
  }
  if (res.stop == StopReason::Budget && done(path.last())) res.stop = StopReason::Learned;

  const Configuration& last = path.last();
  for (ActorId a : s.nonfaulty) {
    if (!last.failed.contains(a)) continue;
    const bool owes_send = !fam::outbox_of(last.failed.at(a)).empty();
    const bool owes_receive = std::any_of(last.in_flight.begin(), last.in_flight.end(),
                                          [&](const Message& m) { return m.receiver == a; });
    if (owes_send || owes_receive) res.nonfaulty_obligations_met = false;
  }
  return res;
}

}  // namespace synodsim::sched
