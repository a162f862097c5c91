#include "synodsim/path.hpp"

#include <stdexcept>

namespace synodsim::fam {

Path::Path(Configuration initial) : initial_(std::move(initial)) {}

const Configuration& Path::last() const {
  return entries_.empty() ? initial_ : entries_.back().config;
}

const Configuration& Path::config_at(std::size_t position) const {
  if (position == 0) return initial_;
  return entries_.at(position - 1).config;
}

const TransitionStep& Path::step_at(std::size_t position) const {
  if (position == 0) throw std::out_of_range("position 0 has no step");
  return entries_.at(position - 1).step;
}

Path Path::prefix(std::size_t position) const {
  Path out(initial_);
  const auto n = std::min(position, entries_.size());
  out.entries_.assign(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

void Path::extend(const TransitionStep& step) {
  Configuration next = apply(last(), step);
  entries_.push_back(Entry{step, std::move(next)});
}

void Path::append_unchecked(TransitionStep step, Configuration config) {
  entries_.push_back(Entry{std::move(step), std::move(config)});
}

}  // namespace synodsim::fam
