#include "synodsim/explore.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <deque>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "synodsim/checker.hpp"
#include "synodsim/digest.hpp"

namespace synodsim::check {

using fam::Configuration;
using fam::StepKind;
using fam::TransitionStep;

namespace {

struct Fingerprint {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  bool operator==(const Fingerprint&) const = default;
};

struct FingerprintHash {
  std::size_t operator()(const Fingerprint& f) const { return static_cast<std::size_t>(f.lo ^ (f.hi << 1)); }
};

/// Exploration node: configuration plus the bookkeeping that distinguishes
/// otherwise equal configurations.
struct Node {
  Configuration config;
  std::vector<Vote> votes;                 // ghost history, sorted
  std::vector<std::uint32_t> proposals;    // per proposer ordinal
  std::uint32_t crashes = 0;
  std::vector<std::pair<TransitionStep, std::uint32_t>> ages;  // sorted, tracked mode only
};

struct StateInfo {
  std::uint32_t depth = 0;
  std::uint32_t parent = 0;
  std::optional<TransitionStep> step;  // step from parent; empty for the root
  std::uint64_t digest = 0;
  bool learned = false;
  bool safe = true;
  bool invariants_ok = true;
  bool maximal = false;
  bool truncated = false;
};

struct Context {
  ExploreOptions options;
  std::shared_ptr<const Roster> roster;
  std::vector<ActorId> proposers;
  bool track_ages = false;
};

std::string key_text(const Node& n, const Context& ctx) {
  std::string key = canonical_text(n.config);
  key += "|v";
  for (const auto& v : n.votes) {
    key += std::to_string(v.acceptor.index) + ':' + std::to_string(v.accepted.ballot.number) + '/' +
           std::to_string(v.accepted.value.id) + ';';
  }
  key += "|r";
  for (auto p : n.proposals) key += std::to_string(p) + ',';
  key += "|c" + std::to_string(n.crashes);
  if (ctx.track_ages) {
    key += "|a";
    for (const auto& [step, age] : n.ages) {
      key += std::string(fam::step_tag(step.kind)) + ':' + std::to_string(step.actor.index) + ':';
      if (step.message) {
        key += std::string(kind_tag(step.message->kind)) + '>' +
               std::to_string(step.message->receiver.index) + ':' +
               std::to_string(step.message->ballot.number) + ':' + std::to_string(step.message->value.id);
        if (step.message->prior) {
          key += ':' + std::to_string(step.message->prior->ballot.number) + '/' +
                 std::to_string(step.message->prior->value.id);
        }
      }
      key += '=' + std::to_string(age) + ';';
    }
  }
  return key;
}

Fingerprint fingerprint(const std::string& key) {
  return Fingerprint{fnv1a64(key), std::hash<std::string>{}(key)};
}

bool all_learned(const Node& n, const Context& ctx) {
  return std::all_of(ctx.proposers.begin(), ctx.proposers.end(),
                     [&](ActorId p) { return n.config.proposer(p)->learned.has_value(); });
}

bool some_learned(const Configuration& c, const Context& ctx) {
  return std::any_of(ctx.proposers.begin(), ctx.proposers.end(),
                     [&](ActorId p) { return c.proposer(p)->learned.has_value(); });
}

bool invariants_hold(const Configuration& c) {
  for (const auto* side : {&c.available, &c.failed}) {
    for (const auto& [id, state] : *side) {
      if (const auto* p = std::get_if<synod::ProposerState>(&state)) {
        const auto q = synod::quorum_predicates(*p);
        if (q.learned && !q.voted) return false;
        if (q.voted && !q.promised) return false;
        if (q.voted != q.learned) return false;
      } else {
        const auto& a = std::get<synod::AcceptorState>(state);
        if (a.accepted && a.accepted->ballot > a.highest_seen) return false;
      }
    }
  }
  return true;
}

std::uint32_t age_of(const Node& n, const TransitionStep& step) {
  auto it = std::lower_bound(n.ages.begin(), n.ages.end(), step,
                             [](const auto& entry, const TransitionStep& s) { return entry.first < s; });
  return it != n.ages.end() && it->first == step ? it->second : 0;
}

/// Enabled exploration steps from `n`; empty if `n` is terminal.
std::vector<TransitionStep> choices(const Node& n, const Context& ctx) {
  const auto& c = n.config;
  if (c.failed.empty() && all_learned(n, ctx)) return {};
  auto base = fam::base_steps(c);

  if (ctx.track_ages) {
    std::vector<TransitionStep> overdue;
    for (const auto& s : base) {
      if (age_of(n, s) >= ctx.options.fairness_bound) overdue.push_back(s);
    }
    if (!overdue.empty()) return overdue;
  }

  std::vector<TransitionStep> out = std::move(base);
  for (std::size_t i = 0; i < ctx.proposers.size(); ++i) {
    const ActorId id = ctx.proposers[i];
    if (!c.is_available(id)) continue;
    const auto& p = *c.proposer(id);
    if (p.learned) continue;
    const bool first = n.proposals[i] == 0;
    const bool retry = !first && n.proposals[i] - 1 < ctx.options.max_retries && p.outbox.empty();
    if (first || retry) {
      out.push_back(TransitionStep::propose(id, synod::next_ballot(p), ctx.roster->info(id).quorum));
    }
  }
  if (n.crashes < ctx.options.max_crashes) {
    for (const auto& [id, _] : c.available) out.push_back(TransitionStep::stp(id));
  }
  for (const auto& [id, _] : c.failed) out.push_back(TransitionStep::bgn(id));
  return out;
}

Node successor(const Node& n, const TransitionStep& step, const Context& ctx) {
  Node next;
  next.config = fam::apply(n.config, step);
  VoteLedger ledger(ctx.roster->majority());
  for (const auto& v : n.votes) ledger.add(v);
  ledger.observe(n.config, next.config);
  next.votes.assign(ledger.votes().begin(), ledger.votes().end());
  next.proposals = n.proposals;
  if (step.kind == StepKind::Propose) {
    auto it = std::find(ctx.proposers.begin(), ctx.proposers.end(), step.actor);
    ++next.proposals[static_cast<std::size_t>(it - ctx.proposers.begin())];
  }
  next.crashes = n.crashes + (step.kind == StepKind::Stp ? 1 : 0);
  if (ctx.track_ages) {
    const auto before = fam::base_steps(n.config);
    for (const auto& s : fam::base_steps(next.config)) {
      const bool waited = s != step && std::binary_search(before.begin(), before.end(), s);
      next.ages.emplace_back(s, waited ? age_of(n, s) + 1 : 0);
    }
  }
  return next;
}

StateInfo describe(const Node& n, const Context& ctx) {
  StateInfo info;
  info.digest = digest(n.config);
  info.learned = some_learned(n.config, ctx);
  VoteLedger ledger(ctx.roster->majority());
  for (const auto& v : n.votes) ledger.add(v);
  info.safe = ledger.consistent();
  info.invariants_ok = invariants_hold(n.config);
  return info;
}

Node root_node(const Configuration& initial, const Context& ctx) {
  Node root;
  root.config = initial;
  root.proposals.assign(ctx.proposers.size(), 0);
  VoteLedger ledger(ctx.roster->majority());
  ledger.observe(Configuration{}, initial);
  root.votes.assign(ledger.votes().begin(), ledger.votes().end());
  if (ctx.track_ages) {
    for (const auto& s : fam::base_steps(initial)) root.ages.emplace_back(s, 0);
  }
  return root;
}

Context make_context(const Configuration& initial, const ExploreOptions& options) {
  Context ctx;
  ctx.options = options;
  ctx.roster = initial.roster;
  ctx.proposers = initial.roster->proposers();
  // Ages can only force a choice on paths longer than the bound.
  ctx.track_ages = options.max_depth > options.fairness_bound;
  return ctx;
}

using Edge = std::pair<std::uint32_t, std::uint32_t>;

/// Path counts, longest path and replay check over the explored graph.
void finish(ExplorationReport& r, const std::vector<StateInfo>& infos, const std::vector<Edge>& edges,
            const Configuration& initial, const ExploreOptions& options) {
  const std::size_t n = infos.size();
  r.states = n;
  r.transitions = edges.size();
  r.max_depth = options.max_depth;
  r.fairness_bound = options.fairness_bound;

  std::vector<std::vector<std::uint32_t>> out(n);
  std::vector<std::uint32_t> indegree(n, 0);
  for (const auto& [u, v] : edges) {
    out[u].push_back(v);
    ++indegree[v];
  }
  std::vector<long double> paths(n, 0);
  std::vector<std::size_t> longest(n, 0);
  std::deque<std::uint32_t> ready;
  if (n > 0) {
    paths[0] = 1;
    ready.push_back(0);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const auto u = ready.front();
    ready.pop_front();
    ++visited;
    for (auto v : out[u]) {
      paths[v] += paths[u];
      longest[v] = std::max(longest[v], longest[u] + 1);
      if (--indegree[v] == 0) ready.push_back(v);
    }
  }
  if (visited != n && !r.state_cap_exceeded) {
    throw std::logic_error("explored transition graph has a cycle");
  }

  std::vector<std::uint64_t> terminal;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = infos[i];
    r.max_depth_reached = std::max(r.max_depth_reached, longest[i]);
    if (!s.safe) {
      r.safety_holds = false;
      ++r.safety_violations;
    }
    if (!s.invariants_ok) ++r.invariant_violations;
    if (!s.maximal && !s.truncated) continue;
    ++r.terminal_states;
    if (s.maximal) ++r.maximal_states;
    if (s.truncated) ++r.truncated_states;
    if (s.learned) ++r.learned_terminal_states;
    r.paths += paths[i];
    if (s.learned) r.learned_paths += paths[i];
    terminal.push_back(s.digest);
  }
  std::sort(terminal.begin(), terminal.end());
  terminal.erase(std::unique(terminal.begin(), terminal.end()), terminal.end());
  r.terminal_digests = std::move(terminal);

  if (options.verify_replay && n > 0) {
    // Rebuild every state along its discovery path, independent of the
    // configurations the search kept.
    std::vector<std::vector<std::uint32_t>> children(n);
    for (std::uint32_t i = 1; i < n; ++i) children[infos[i].parent].push_back(i);
    r.replay_checked = true;
    r.replay_ok = digest(initial) == infos[0].digest;
    std::vector<std::pair<std::uint32_t, Configuration>> stack{{0, initial}};
    while (!stack.empty() && r.replay_ok) {
      auto [u, config] = std::move(stack.back());
      stack.pop_back();
      for (auto v : children[u]) {
        if (!infos[v].step || !fam::enabled(config, *infos[v].step)) {
          r.replay_ok = false;
          break;
        }
        auto next = fam::apply(config, *infos[v].step);
        if (digest(next) != infos[v].digest) {
          r.replay_ok = false;
          break;
        }
        stack.emplace_back(v, std::move(next));
      }
    }
  }
}

}  // namespace

double ExplorationReport::learned_fraction() const {
  return paths > 0 ? static_cast<double>(learned_paths / paths) : 0.0;
}

ExplorationReport explore_serial(const Configuration& initial, const ExploreOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Context ctx = make_context(initial, options);
  ExplorationReport report;

  std::unordered_map<Fingerprint, std::uint32_t, FingerprintHash> index;
  std::vector<StateInfo> infos;
  std::vector<Edge> edges;

  Node root = root_node(initial, ctx);
  index.emplace(fingerprint(key_text(root, ctx)), 0);
  infos.push_back(describe(root, ctx));
  std::vector<std::pair<std::uint32_t, Node>> frontier;
  frontier.emplace_back(0, std::move(root));

  for (std::size_t depth = 0; !frontier.empty() && !report.state_cap_exceeded; ++depth) {
    std::vector<std::pair<std::uint32_t, Node>> next;
    for (auto& [id, node] : frontier) {
      const auto steps = choices(node, ctx);
      if (steps.empty()) {
        infos[id].maximal = true;
        continue;
      }
      if (depth >= options.max_depth) {
        infos[id].truncated = true;
        continue;
      }
      for (const auto& step : steps) {
        Node child = successor(node, step, ctx);
        auto [it, inserted] = index.try_emplace(fingerprint(key_text(child, ctx)),
                                                static_cast<std::uint32_t>(infos.size()));
        if (inserted) {
          StateInfo info = describe(child, ctx);
          info.depth = static_cast<std::uint32_t>(depth + 1);
          info.parent = id;
          info.step = step;
          infos.push_back(std::move(info));
          next.emplace_back(it->second, std::move(child));
        }
        edges.emplace_back(id, it->second);
        if (infos.size() > options.state_cap) {
          report.state_cap_exceeded = true;
          break;
        }
      }
      if (report.state_cap_exceeded) break;
    }
    frontier = std::move(next);
  }

  finish(report, infos, edges, initial, options);
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

/// Insert-if-absent set shared by all workers.
class ShardedIndex {
 public:
  static constexpr std::size_t kShards = 64;

  /// Returns (id, inserted). New ids come from a shared counter.
  std::pair<std::uint32_t, bool> insert(const Fingerprint& fp) {
    auto& shard = shards_[fp.lo % kShards];
    std::lock_guard lock(shard.mutex);
    auto it = shard.map.find(fp);
    if (it != shard.map.end()) return {it->second, false};
    const auto id = next_.fetch_add(1, std::memory_order_relaxed);
    shard.map.emplace(fp, id);
    return {id, true};
  }

  std::uint32_t size() const { return next_.load(std::memory_order_relaxed); }

 private:
  struct Shard {
    std::mutex mutex;
    std::unordered_map<Fingerprint, std::uint32_t, FingerprintHash> map;
  };
  std::array<Shard, kShards> shards_;
  std::atomic<std::uint32_t> next_{0};
};

}  // namespace

ExplorationReport explore(const Configuration& initial, const ExploreOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Context ctx = make_context(initial, options);
  ExplorationReport report;

  ShardedIndex index;
  std::vector<StateInfo> infos;
  std::vector<Edge> edges;

  Node root = root_node(initial, ctx);
  index.insert(fingerprint(key_text(root, ctx)));
  infos.push_back(describe(root, ctx));
  std::vector<std::pair<std::uint32_t, Node>> frontier;
  frontier.emplace_back(0, std::move(root));
  std::atomic<bool> capped{false};

  for (std::size_t depth = 0; !frontier.empty() && !capped; ++depth) {
    struct Local {
      std::vector<std::pair<std::uint32_t, Node>> next;
      std::vector<std::pair<std::uint32_t, StateInfo>> found;
      std::vector<Edge> edges;
      std::vector<std::uint32_t> maximal;
      std::vector<std::uint32_t> truncated;
    };
    std::vector<Local> locals(static_cast<std::size_t>(omp_get_max_threads()));
    const auto count = static_cast<std::ptrdiff_t>(frontier.size());

#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      if (capped.load(std::memory_order_relaxed)) continue;
      auto& local = locals[static_cast<std::size_t>(omp_get_thread_num())];
      const auto& [id, node] = frontier[static_cast<std::size_t>(i)];
      const auto steps = choices(node, ctx);
      if (steps.empty()) {
        local.maximal.push_back(id);
        continue;
      }
      if (depth >= options.max_depth) {
        local.truncated.push_back(id);
        continue;
      }
      for (const auto& step : steps) {
        Node child = successor(node, step, ctx);
        auto [child_id, inserted] = index.insert(fingerprint(key_text(child, ctx)));
        if (inserted) {
          StateInfo info = describe(child, ctx);
          info.depth = static_cast<std::uint32_t>(depth + 1);
          info.parent = id;
          info.step = step;
          local.found.emplace_back(child_id, std::move(info));
          local.next.emplace_back(child_id, std::move(child));
        }
        local.edges.emplace_back(id, child_id);
        if (index.size() > options.state_cap) capped = true;
      }
    }

    infos.resize(index.size());
    std::vector<std::pair<std::uint32_t, Node>> next;
    for (auto& local : locals) {
      for (auto& [id, info] : local.found) infos[id] = std::move(info);
      for (auto id : local.maximal) infos[id].maximal = true;
      for (auto id : local.truncated) infos[id].truncated = true;
      edges.insert(edges.end(), local.edges.begin(), local.edges.end());
      std::move(local.next.begin(), local.next.end(), std::back_inserter(next));
    }
    frontier = std::move(next);
  }
  report.state_cap_exceeded = capped;

  finish(report, infos, edges, initial, options);
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string report_text(const ExplorationReport& r) {
  std::ostringstream out;
  out << kReportHeader << '\n'
      << "states_visited = " << r.states << '\n'
      << "transitions = " << r.transitions << '\n'
      << "depth_limit = " << r.max_depth << '\n'
      << "max_depth_reached = " << r.max_depth_reached << '\n'
      << "fairness_bound = " << r.fairness_bound << '\n'
      << "terminal_states = " << r.terminal_states << '\n'
      << "maximal_states = " << r.maximal_states << '\n'
      << "truncated_states = " << r.truncated_states << '\n'
      << "distinct_terminal_configurations = " << r.terminal_digests.size() << '\n'
      << "terminal_paths = " << static_cast<double>(r.paths) << '\n'
      << "learned_paths = " << static_cast<double>(r.learned_paths) << '\n'
      << "learned_coverage = " << r.learned_fraction() << '\n'
      << "safety = " << (r.safety_holds ? "holds" : "violated") << '\n'
      << "safety_violations = " << r.safety_violations << '\n'
      << "invariant_violations = " << r.invariant_violations << '\n'
      << "state_cap_exceeded = " << (r.state_cap_exceeded ? "true" : "false") << '\n'
      << "replay = " << (!r.replay_checked ? "skipped" : r.replay_ok ? "ok" : "mismatch") << '\n'
      << "elapsed_seconds = " << r.elapsed_seconds << '\n';
  return out.str();
}

}  // namespace synodsim::check
