#pragma once

#include <cstddef>
#include <vector>

#include "synodsim/fam.hpp"

namespace synodsim::fam {

/// Alternating sequence of configurations and steps. Position 0 is the
/// initial configuration; position i is the configuration after step i.
/// Positions are the logical time of every "eventually" predicate.
class Path {
 public:
  struct Entry {
    TransitionStep step;
    Configuration config;
  };

  explicit Path(Configuration initial);

  /// Number of steps.
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const Configuration& initial() const { return initial_; }
  /// ς: configuration after the last step.
  const Configuration& last() const;
  const Configuration& config_at(std::size_t position) const;
  /// Step that produced position `position` (1-based).
  const TransitionStep& step_at(std::size_t position) const;
  const std::vector<Entry>& entries() const { return entries_; }

  /// ρ: prefix through position `position`.
  Path prefix(std::size_t position) const;
  /// ⊤: extends by applying `step` to the last configuration.
  void extend(const TransitionStep& step);
  /// Appends a step/config pair without applying it. For synthetic paths in
  /// checker tests and for replay of recorded traces.
  void append_unchecked(TransitionStep step, Configuration config);

 private:
  Configuration initial_;
  std::vector<Entry> entries_;
};

}  // namespace synodsim::fam
