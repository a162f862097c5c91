#include "synodsim/checker.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace synodsim::check {

namespace {

std::string names(const Roster& roster, std::span<const ActorId> ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += roster.name(ids[i]);
  }
  return out;
}

bool any_learned(const fam::Configuration& c, std::optional<ActorId> only) {
  for (const auto* side : {&c.available, &c.failed}) {
    for (const auto& [id, state] : *side) {
      if (only && id != *only) continue;
      const auto* p = std::get_if<synod::ProposerState>(&state);
      if (p && p->learned) return true;
    }
  }
  return false;
}

}  // namespace

std::string_view property_name(Property p) {
  switch (p) {
    case Property::Safety: return "safety";
    case Property::Lemma1: return "lemma1";
    case Property::Lemma2: return "lemma2";
    case Property::Theorem1: return "theorem1";
    case Property::Livelock: return "livelock";
  }
  return "?";
}

std::optional<Property> parse_property(std::string_view name) {
  for (auto p : {Property::Safety, Property::Lemma1, Property::Lemma2, Property::Theorem1,
                 Property::Livelock}) {
    if (property_name(p) == name) return p;
  }
  return std::nullopt;
}

void VoteLedger::observe(const fam::Configuration& before, const fam::Configuration& after) {
  for (const auto* side : {&after.available, &after.failed}) {
    for (const auto& [id, state] : *side) {
      const auto* a = std::get_if<synod::AcceptorState>(&state);
      if (!a || !a->accepted) continue;
      const auto* prev = before.acceptor(id);
      if (!prev || prev->accepted != a->accepted) add(Vote{id, *a->accepted});
    }
  }
}

void VoteLedger::add(const Vote& vote) { votes_.insert(vote); }

std::vector<Accepted> VoteLedger::chosen() const {
  std::map<Accepted, std::size_t> tally;
  for (const auto& v : votes_) ++tally[v.accepted];
  std::vector<Accepted> out;
  for (const auto& [acc, n] : tally) {
    if (n >= majority_) out.push_back(acc);
  }
  return out;
}

bool VoteLedger::consistent() const {
  auto c = chosen();
  return std::all_of(c.begin(), c.end(), [&](const Accepted& a) { return a.value == c.front().value; });
}

Verdict check_safety(const fam::Path& path) {
  Verdict v{Property::Safety, true};
  VoteLedger ledger(path.initial().roster->majority());
  ledger.observe(fam::Configuration{}, path.initial());
  for (std::size_t i = 1; i <= path.size(); ++i) {
    ledger.observe(path.config_at(i - 1), path.config_at(i));
    if (!ledger.consistent()) {
      v.holds = false;
      v.witness_index = i;
      v.counterexample = path.prefix(i);
      break;
    }
  }
  for (const auto& acc : ledger.chosen()) {
    v.params.emplace_back("chosen", std::to_string(acc.ballot.number) + "/" + std::to_string(acc.value.id));
  }
  return v;
}

std::optional<std::size_t> first_learned_index(const fam::Path& path, std::optional<ActorId> proposer) {
  for (std::size_t i = 0; i <= path.size(); ++i) {
    if (any_learned(path.config_at(i), proposer)) return i;
  }
  return std::nullopt;
}

Verdict check_theorem1(const fam::Path& path) {
  Verdict v{Property::Theorem1, false};
  if (auto i = first_learned_index(path)) {
    v.holds = true;
    v.witness_index = *i;
    const auto& c = path.config_at(*i);
    for (ActorId p : c.roster->proposers()) {
      if (const auto* s = c.proposer(p); s && s->learned) {
        v.params.emplace_back("proposer", c.roster->name(p));
        v.params.emplace_back("ballot", std::to_string(s->learned->ballot.number));
        v.params.emplace_back("value", std::to_string(s->learned->value.id));
        break;
      }
    }
  } else {
    v.counterexample = path;
  }
  return v;
}

namespace {

Verdict quorum_eventually(Property prop, const fam::Path& path, ActorId p, Ballot b,
                          std::span<const ActorId> quorum, std::size_t from, bool votes) {
  Verdict v{prop, false};
  const Roster& roster = *path.initial().roster;
  v.params.emplace_back("proposer", roster.name(p));
  v.params.emplace_back("ballot", std::to_string(b.number));
  v.params.emplace_back("quorum", names(roster, quorum));
  for (std::size_t i = from; i <= path.size(); ++i) {
    const auto* s = path.config_at(i).proposer(p);
    if (!s) continue;
    if (votes ? synod::has_votes(*s, b, quorum) : synod::has_promises(*s, b, quorum)) {
      v.holds = true;
      v.witness_index = i;
      return v;
    }
  }
  v.counterexample = path;
  return v;
}

}  // namespace

Verdict check_lemma1(const fam::Path& path, ActorId p, Ballot b, std::span<const ActorId> quorum) {
  return quorum_eventually(Property::Lemma1, path, p, b, quorum, 0, false);
}

Verdict check_lemma2(const fam::Path& path, ActorId p, Ballot b, std::span<const ActorId> quorum) {
  const auto l1 = check_lemma1(path, p, b, quorum);
  if (!l1.holds) {
    Verdict v{Property::Lemma2, false};
    v.params = l1.params;
    v.params.emplace_back("lemma1", "unmet");
    v.counterexample = path;
    return v;
  }
  return quorum_eventually(Property::Lemma2, path, p, b, quorum, *l1.witness_index, true);
}

std::size_t count_reproposals(const fam::Path& path) {
  std::set<ActorId> proposed;
  std::size_t n = 0;
  for (const auto& e : path.entries()) {
    if (e.step.kind == fam::StepKind::Propose && !proposed.insert(e.step.actor).second) ++n;
  }
  return n;
}

Verdict detect_livelock(const fam::Path& path, std::size_t threshold) {
  Verdict v{Property::Livelock, false};
  const auto reproposals = count_reproposals(path);
  const bool learned = first_learned_index(path).has_value();
  v.params.emplace_back("threshold", std::to_string(threshold));
  v.params.emplace_back("reproposals", std::to_string(reproposals));
  if (reproposals >= threshold && !learned) {
    v.holds = true;
    // Index of the threshold-th re-proposal.
    std::set<ActorId> proposed;
    std::size_t n = 0;
    for (std::size_t i = 1; i <= path.size(); ++i) {
      const auto& step = path.step_at(i);
      if (step.kind == fam::StepKind::Propose && !proposed.insert(step.actor).second &&
          ++n == threshold) {
        v.witness_index = i;
        break;
      }
    }
  }
  return v;
}

}  // namespace synodsim::check
