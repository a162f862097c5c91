#include "synodsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <random>
#include <sstream>

#include "synodsim/errors.hpp"
#include "synodsim/scheduler.hpp"

namespace synodsim::sched {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> words_of(std::string_view s, char sep = ' ') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep || (sep == ' ' && c == '\t')) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

template <typename T>
T number(const std::string& text, std::size_t line, const std::string& field) {
  T out{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line, field, "expected a non-negative integer, got '" + text + "'");
  }
  return out;
}

std::optional<PolicyKind> parse_policy_name(std::string_view name) {
  for (auto k : {PolicyKind::FairRandom, PolicyKind::RoundRobin, PolicyKind::AdversarialDuel,
                 PolicyKind::Cnd}) {
    if (policy_name(k) == name) return k;
  }
  return std::nullopt;
}

bool valid_name(std::string_view name) {
  return !name.empty() && name.find_first_of(":|,=[]# \t") == std::string_view::npos;
}

struct PendingProposer {
  ActorId id;
  std::optional<std::vector<std::string>> quorum;
  std::size_t line = 0;
};

std::string join_names(const Roster& roster, const std::vector<ActorId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += roster.name(ids[i]);
  }
  return out;
}

}  // namespace

std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::FairRandom: return "fair_random";
    case PolicyKind::RoundRobin: return "round_robin";
    case PolicyKind::AdversarialDuel: return "adversarial_duel";
    case PolicyKind::Cnd: return "cnd";
  }
  return "?";
}

bool is_quorum(const Roster& roster, const std::vector<ActorId>& quorum) {
  if (quorum.empty()) return false;
  for (ActorId a : quorum) {
    if (!roster.contains(a) || roster.role(a) != Role::Acceptor) return false;
  }
  auto sorted = quorum;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  return sorted.size() >= roster.majority();
}

Scenario parse_scenario(std::istream& in, std::string name) {
  Scenario s;
  s.name = std::move(name);
  auto roster = std::make_shared<Roster>();

  std::map<std::string, std::size_t> seen_sections;  // header line
  std::map<std::string, std::pair<std::string, std::size_t>> policy_kv;
  std::map<std::string, std::pair<std::string, std::size_t>> limits_kv;
  std::vector<std::pair<std::vector<std::string>, std::size_t>> failure_lines;
  std::vector<std::pair<std::string, std::size_t>> nonfaulty_names;
  std::vector<PendingProposer> pending;

  std::string section;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "section", "unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "roster" && section != "nonfaulty" && section != "policy" &&
          section != "failures" && section != "limits") {
        throw ParseError(line_no, "section", "unknown section [" + section + "]");
      }
      if (seen_sections.contains(section)) throw ParseError(line_no, "section", "duplicate [" + section + "]");
      seen_sections[section] = line_no;
      continue;
    }
    if (section.empty()) throw ParseError(line_no, "section", "content before first section");

    if (section == "roster") {
      auto w = words_of(line);
      if (w.size() < 2) throw ParseError(line_no, "roster", "expected '<name> <role> [key=value...]'");
      if (!valid_name(w[0])) throw ParseError(line_no, "name", "invalid actor name '" + w[0] + "'");
      if (roster->find(w[0])) throw ParseError(line_no, "name", "duplicate actor " + w[0]);
      ActorInfo info;
      info.name = w[0];
      PendingProposer pp;
      pp.line = line_no;
      if (w[1] == "proposer") {
        info.role = Role::Proposer;
        info.value = Value{static_cast<std::uint32_t>(roster->proposer_count() + 1)};
      } else if (w[1] == "acceptor") {
        info.role = Role::Acceptor;
      } else {
        throw ParseError(line_no, "role", "expected proposer or acceptor, got '" + w[1] + "'");
      }
      for (std::size_t i = 2; i < w.size(); ++i) {
        auto eq = w[i].find('=');
        if (eq == std::string::npos || info.role != Role::Proposer) {
          throw ParseError(line_no, "roster", "unexpected attribute '" + w[i] + "'");
        }
        const auto key = w[i].substr(0, eq);
        const auto val = w[i].substr(eq + 1);
        if (key == "value") {
          info.value = Value{number<std::uint32_t>(val, line_no, "value")};
          if (info.value.is_null()) throw ParseError(line_no, "value", "value 0 is reserved for null");
        } else if (key == "quorum") {
          pp.quorum = words_of(val, ',');
        } else {
          throw ParseError(line_no, "roster", "unknown attribute '" + key + "'");
        }
      }
      const bool proposer = info.role == Role::Proposer;
      pp.id = roster->add(std::move(info));
      if (proposer) pending.push_back(std::move(pp));
    } else if (section == "nonfaulty") {
      for (auto& w : words_of(line)) nonfaulty_names.emplace_back(w, line_no);
    } else if (section == "policy" || section == "limits") {
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(line_no, section, "expected key = value");
      auto key = trim(line.substr(0, eq));
      auto val = trim(line.substr(eq + 1));
      auto& kv = section == "policy" ? policy_kv : limits_kv;
      if (kv.contains(key)) throw ParseError(line_no, key, "duplicate key");
      kv[key] = {val, line_no};
    } else {
      failure_lines.emplace_back(words_of(line), line_no);
    }
  }

  for (const char* required : {"roster", "nonfaulty", "policy", "limits"}) {
    if (!seen_sections.contains(required)) {
      throw ParseError(line_no, required, std::string("missing section [") + required + "]");
    }
  }

  auto resolve = [&](const std::string& n, std::size_t line, const std::string& field) {
    auto id = roster->find(n);
    if (!id) throw ParseError(line, field, "unknown actor '" + n + "'");
    return *id;
  };
  auto resolve_list = [&](const std::vector<std::string>& names, std::size_t line,
                          const std::string& field) {
    std::vector<ActorId> out;
    for (const auto& n : names) out.push_back(resolve(n, line, field));
    std::sort(out.begin(), out.end());
    return out;
  };

  for (auto& pp : pending) {
    roster->set_quorum(pp.id, pp.quorum ? resolve_list(*pp.quorum, pp.line, "quorum")
                                        : roster->acceptors());
  }

  for (const auto& [n, line] : nonfaulty_names) {
    if (n == "all") {
      for (std::uint32_t i = 0; i < roster->size(); ++i) s.nonfaulty.insert(ActorId{i});
    } else {
      s.nonfaulty.insert(resolve(n, line, "nonfaulty"));
    }
  }

  auto take = [](auto& kv, const std::string& key) -> std::optional<std::pair<std::string, std::size_t>> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    auto v = it->second;
    kv.erase(it);
    return v;
  };

  {
    auto kind = take(policy_kv, "kind");
    if (!kind) throw ParseError(seen_sections.at("policy"), "kind", "missing policy kind");
    auto k = parse_policy_name(kind->first);
    if (!k) throw ParseError(kind->second, "kind", "unknown policy '" + kind->first + "'");
    s.policy.kind = *k;
    if (*k == PolicyKind::Cnd) {
      CndParams cnd;
      auto p = take(policy_kv, "proposer");
      auto q = take(policy_kv, "quorum");
      auto act = take(policy_kv, "activation");
      if (!p) throw ParseError(kind->second, "proposer", "cnd policy requires proposer");
      if (!q) throw ParseError(kind->second, "quorum", "cnd policy requires quorum");
      if (!act) throw ParseError(kind->second, "activation", "cnd policy requires activation");
      cnd.proposer = resolve(p->first, p->second, "proposer");
      cnd.quorum = resolve_list(words_of(q->first, ','), q->second, "quorum");
      cnd.activation = number<std::size_t>(act->first, act->second, "activation");
      if (auto b = take(policy_kv, "ballot"); b && b->first != "auto") {
        cnd.ballot = Ballot{number<std::uint64_t>(b->first, b->second, "ballot")};
      }
      if (auto before = take(policy_kv, "before")) {
        auto bk = parse_policy_name(before->first);
        if (!bk || *bk == PolicyKind::Cnd) {
          throw ParseError(before->second, "before", "expected fair_random, round_robin or adversarial_duel");
        }
        cnd.before = *bk;
      }
      s.policy.cnd = std::move(cnd);
    }
    if (!policy_kv.empty()) {
      const auto& [key, v] = *policy_kv.begin();
      throw ParseError(v.second, key, "unexpected policy key");
    }
  }

  {
    auto need = [&](const std::string& key) {
      auto v = take(limits_kv, key);
      if (!v) throw ParseError(seen_sections.at("limits"), key, "missing [limits] " + key);
      return *v;
    };
    auto b = need("budget");
    s.budget = number<std::size_t>(b.first, b.second, "budget");
    auto p = need("patience");
    s.patience = number<std::size_t>(p.first, p.second, "patience");
    auto f = need("fairness_bound");
    s.fairness_bound = number<std::size_t>(f.first, f.second, "fairness_bound");
    auto seed = need("seed");
    s.seed = number<std::uint64_t>(seed.first, seed.second, "seed");
    if (auto r = take(limits_kv, "max_retries")) {
      s.max_retries = number<std::size_t>(r->first, r->second, "max_retries");
    }
    if (auto st = take(limits_kv, "stop")) {
      if (st->first == "all_learned") {
        s.stop = StopRule::AllLearned;
      } else if (st->first == "first_learned") {
        s.stop = StopRule::FirstLearned;
      } else {
        throw ParseError(st->second, "stop", "expected all_learned or first_learned");
      }
    }
    if (!limits_kv.empty()) {
      const auto& [key, v] = *limits_kv.begin();
      throw ParseError(v.second, key, "unexpected limits key");
    }
  }

  for (const auto& [w, line] : failure_lines) {
    if (w.size() != 3) throw ParseError(line, "failures", "expected '<index> <actor> stp|bgn'");
    FailureEvent ev;
    ev.index = number<std::size_t>(w[0], line, "index");
    ev.actor = resolve(w[1], line, "actor");
    if (w[2] == "stp") {
      ev.action = FailureAction::Stp;
    } else if (w[2] == "bgn") {
      ev.action = FailureAction::Bgn;
    } else {
      throw ParseError(line, "action", "expected stp or bgn, got '" + w[2] + "'");
    }
    s.failures.push_back(ev);
  }
  std::stable_sort(s.failures.begin(), s.failures.end(),
                   [](const FailureEvent& a, const FailureEvent& b) { return a.index < b.index; });

  s.roster = std::move(roster);
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open scenario " + file.string());
  return parse_scenario(in, file.stem().string());
}

std::string scenario_text(const Scenario& s) {
  const Roster& r = *s.roster;
  std::ostringstream out;
  out << "[roster]\n";
  for (std::uint32_t i = 0; i < r.size(); ++i) {
    const auto& info = r.info(ActorId{i});
    out << info.name << ' ' << role_name(info.role);
    if (info.role == Role::Proposer) {
      out << " value=" << info.value.id << " quorum=" << join_names(r, info.quorum);
    }
    out << '\n';
  }
  out << "\n[nonfaulty]\n";
  for (ActorId a : s.nonfaulty) out << r.name(a) << '\n';
  out << "\n[policy]\nkind = " << policy_name(s.policy.kind) << '\n';
  if (s.policy.cnd) {
    const auto& c = *s.policy.cnd;
    out << "proposer = " << r.name(c.proposer) << '\n'
        << "ballot = " << (c.ballot ? std::to_string(c.ballot->number) : std::string("auto")) << '\n'
        << "quorum = " << join_names(r, c.quorum) << '\n'
        << "activation = " << c.activation << '\n'
        << "before = " << policy_name(c.before) << '\n';
  }
  out << "\n[failures]\n";
  for (const auto& f : s.failures) {
    out << f.index << ' ' << r.name(f.actor) << ' '
        << (f.action == FailureAction::Stp ? "stp" : "bgn") << '\n';
  }
  out << "\n[limits]\nbudget = " << s.budget << "\npatience = " << s.patience
      << "\nfairness_bound = " << s.fairness_bound << "\nseed = " << s.seed
      << "\nmax_retries = " << s.max_retries
      << "\nstop = " << (s.stop == StopRule::AllLearned ? "all_learned" : "first_learned") << '\n';
  return out.str();
}

void validate(const Scenario& s) {
  if (!s.roster) throw IllFormedScenario("roster: missing");
  const Roster& r = *s.roster;
  if (r.proposer_count() == 0 || r.acceptor_count() == 0) {
    throw IllFormedScenario("roster: needs at least one proposer and one acceptor");
  }
  for (ActorId p : r.proposers()) {
    if (!is_quorum(r, r.info(p).quorum)) {
      throw IllFormedScenario("quorum: " + r.name(p) +
                              "'s quorum must be a strict majority of the acceptors");
    }
  }
  if (s.budget == 0) throw IllFormedScenario("limits: budget must be > 0");
  if (s.patience == 0) throw IllFormedScenario("limits: patience must be > 0");
  if (s.fairness_bound == 0) throw IllFormedScenario("limits: fairness_bound must be > 0");
  for (ActorId a : s.nonfaulty) {
    if (!r.contains(a)) throw IllFormedScenario("nonfaulty: unknown actor");
  }

  std::map<ActorId, std::vector<const FailureEvent*>> per_actor;
  for (const auto& f : s.failures) {
    if (!r.contains(f.actor)) throw IllFormedScenario("failures: unknown actor");
    per_actor[f.actor].push_back(&f);
  }
  for (const auto& [actor, events] : per_actor) {
    bool up = true;
    for (const auto* ev : events) {
      const bool stp = ev->action == FailureAction::Stp;
      if (stp != up) {
        throw IllFormedScenario("failures: " + r.name(actor) + " " + (stp ? "stp" : "bgn") +
                                " at index " + std::to_string(ev->index) +
                                " is not enabled (stp/bgn must alternate, starting with stp)");
      }
      up = !up;
    }
    if (s.nonfaulty.contains(actor)) {
      if (!up) {
        throw IllFormedScenario("nonfaulty: " + r.name(actor) +
                                " stops without a later bgn (nonfaulty actors never fail permanently)");
      }
      if (!events.empty() && events.back()->index >= s.budget) {
        throw IllFormedScenario("nonfaulty: " + r.name(actor) + " restarts at or beyond the budget");
      }
    }
  }

  if (s.policy.kind == PolicyKind::Cnd) {
    if (!s.policy.cnd) throw IllFormedScenario("policy: cnd parameters missing");
    const auto& c = *s.policy.cnd;
    if (!r.contains(c.proposer) || r.role(c.proposer) != Role::Proposer) {
      throw IllFormedScenario("cnd: protected actor must be a proposer");
    }
    if (!s.nonfaulty.contains(c.proposer)) throw IllFormedScenario("cnd: protected proposer must be nonfaulty");
    if (!is_quorum(r, c.quorum)) {
      throw IllFormedScenario("cnd: quorum must be a strict majority of the acceptors");
    }
    for (ActorId a : c.quorum) {
      if (!s.nonfaulty.contains(a)) {
        throw IllFormedScenario("cnd: quorum member " + r.name(a) + " must be nonfaulty");
      }
    }
    if (c.ballot) {
      const auto n = r.proposer_count();
      if (c.ballot->number == 0 || c.ballot->number % n != r.proposer_index(c.proposer)) {
        throw IllFormedScenario("cnd: ballot must be positive and belong to the proposer's residue class");
      }
    }
  } else if (s.policy.cnd) {
    throw IllFormedScenario("policy: cnd parameters on a non-cnd policy");
  }
}

Scenario random_scenario(std::uint64_t seed, const RandomScenarioLimits& limits) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto below = [&](std::uint64_t n) { return uniform_below(rng, n); };

  const std::size_t np = 1 + below(limits.max_proposers);
  const std::size_t na = 1 + below(limits.max_acceptors);
  auto roster = std::make_shared<Roster>();
  std::vector<ActorId> proposers;
  std::vector<ActorId> acceptors;
  for (std::size_t i = 0; i < np; ++i) {
    ActorInfo info;
    info.name = "P" + std::to_string(i + 1);
    info.role = Role::Proposer;
    info.value = Value{static_cast<std::uint32_t>(10 + i)};
    proposers.push_back(roster->add(std::move(info)));
  }
  for (std::size_t i = 0; i < na; ++i) {
    ActorInfo info;
    info.name = "A" + std::to_string(i + 1);
    acceptors.push_back(roster->add(std::move(info)));
  }
  const std::size_t majority = na / 2 + 1;
  for (ActorId p : proposers) {
    auto pool = acceptors;
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(majority + below(na - majority + 1));
    roster->set_quorum(p, pool);
  }

  Scenario s;
  s.name = "random-" + std::to_string(seed);
  s.budget = limits.budget;
  s.patience = 20 + below(100);
  s.fairness_bound = 8 + below(57);
  s.seed = seed;

  std::vector<PolicyKind> kinds{PolicyKind::FairRandom, PolicyKind::RoundRobin, PolicyKind::Cnd};
  if (np == 2) kinds.push_back(PolicyKind::AdversarialDuel);
  s.policy.kind = kinds[below(kinds.size())];

  std::set<ActorId> protected_actors;
  if (s.policy.kind == PolicyKind::Cnd) {
    CndParams c;
    c.proposer = proposers[below(np)];
    c.quorum = roster->info(c.proposer).quorum;
    c.activation = below(600);
    std::vector<PolicyKind> before{PolicyKind::FairRandom, PolicyKind::RoundRobin};
    if (np == 2) before.push_back(PolicyKind::AdversarialDuel);
    c.before = before[below(before.size())];
    protected_actors.insert(c.proposer);
    protected_actors.insert(c.quorum.begin(), c.quorum.end());
    s.policy.cnd = std::move(c);
  }

  for (std::uint32_t i = 0; i < roster->size(); ++i) s.nonfaulty.insert(ActorId{i});
  const std::size_t events = below(4);
  std::set<ActorId> touched;
  for (std::size_t e = 0; e < events; ++e) {
    ActorId a{static_cast<std::uint32_t>(below(roster->size()))};
    if (!touched.insert(a).second) continue;
    const std::size_t stop_at = below(limits.budget / 4);
    s.failures.push_back(FailureEvent{stop_at, a, FailureAction::Stp});
    const bool permanent = !protected_actors.contains(a) && below(4) == 0;
    if (permanent) {
      s.nonfaulty.erase(a);
    } else {
      const std::size_t restart = stop_at + 1 + below(limits.budget / 4);
      s.failures.push_back(FailureEvent{restart, a, FailureAction::Bgn});
    }
  }
  std::stable_sort(s.failures.begin(), s.failures.end(),
                   [](const FailureEvent& a, const FailureEvent& b) { return a.index < b.index; });
  s.roster = std::move(roster);
  return s;
}

}  // namespace synodsim::sched
