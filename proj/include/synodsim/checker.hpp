#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "synodsim/path.hpp"

namespace synodsim::check {

enum class Property : std::uint8_t { Safety, Lemma1, Lemma2, Theorem1, Livelock };

std::string_view property_name(Property p);
std::optional<Property> parse_property(std::string_view name);

struct Verdict {
  Property property = Property::Safety;
  bool holds = false;
  std::optional<std::size_t> witness_index{};
  std::optional<fam::Path> counterexample{};
  /// Parameters the verdict depends on (threshold, ballot, quorum, ...).
  std::vector<std::pair<std::string, std::string>> params{};
};

/// A vote cast by an acceptor: it accepted (ballot, value).
struct Vote {
  ActorId acceptor;
  Accepted accepted;
  auto operator<=>(const Vote&) const = default;
};

/// Omniscient record of votes over a path, from which "chosen" is derived:
/// (b, v) is chosen once a majority of the acceptor roster voted for it.
class VoteLedger {
 public:
  explicit VoteLedger(std::size_t majority) : majority_(majority) {}

  /// Records votes visible as changes of `accepted` between two configurations.
  void observe(const fam::Configuration& before, const fam::Configuration& after);
  void add(const Vote& vote);

  const std::set<Vote>& votes() const { return votes_; }
  std::vector<Accepted> chosen() const;
  /// Every chosen pair carries the same value.
  bool consistent() const;

 private:
  std::size_t majority_;
  std::set<Vote> votes_;
};

Verdict check_safety(const fam::Path& path);
Verdict check_theorem1(const fam::Path& path);
Verdict check_lemma1(const fam::Path& path, ActorId p, Ballot b, std::span<const ActorId> quorum);
/// Holds iff Φ(p, b, Q) at some index no earlier than check_lemma1's witness.
Verdict check_lemma2(const fam::Path& path, ActorId p, Ballot b, std::span<const ActorId> quorum);

inline constexpr std::size_t kDefaultLivelockThreshold = 10;

/// Holds (livelock detected) iff at least `threshold` re-proposals occur and
/// no proposer ever learns.
Verdict detect_livelock(const fam::Path& path, std::size_t threshold = kDefaultLivelockThreshold);

/// Propose steps beyond each proposer's first.
std::size_t count_reproposals(const fam::Path& path);

/// First position where some proposer (or `proposer`, if given) has learned.
std::optional<std::size_t> first_learned_index(const fam::Path& path,
                                               std::optional<ActorId> proposer = std::nullopt);

}  // namespace synodsim::check
