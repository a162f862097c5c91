#include "synodsim/ids.hpp"

#include <algorithm>
#include <stdexcept>

namespace synodsim {

std::string_view role_name(Role role) {
  return role == Role::Proposer ? "proposer" : "acceptor";
}

ActorId Roster::add(ActorInfo info) {
  if (find(info.name)) throw std::invalid_argument("duplicate actor name " + info.name);
  actors_.push_back(std::move(info));
  return ActorId{static_cast<std::uint32_t>(actors_.size() - 1)};
}

std::optional<ActorId> Roster::find(std::string_view name) const {
  for (std::size_t i = 0; i < actors_.size(); ++i) {
    if (actors_[i].name == name) return ActorId{static_cast<std::uint32_t>(i)};
  }
  return std::nullopt;
}

std::vector<ActorId> Roster::proposers() const {
  std::vector<ActorId> out;
  for (std::size_t i = 0; i < actors_.size(); ++i) {
    if (actors_[i].role == Role::Proposer) out.push_back(ActorId{static_cast<std::uint32_t>(i)});
  }
  return out;
}

std::vector<ActorId> Roster::acceptors() const {
  std::vector<ActorId> out;
  for (std::size_t i = 0; i < actors_.size(); ++i) {
    if (actors_[i].role == Role::Acceptor) out.push_back(ActorId{static_cast<std::uint32_t>(i)});
  }
  return out;
}

std::size_t Roster::proposer_count() const {
  return static_cast<std::size_t>(std::count_if(
      actors_.begin(), actors_.end(), [](const ActorInfo& a) { return a.role == Role::Proposer; }));
}

std::size_t Roster::acceptor_count() const { return actors_.size() - proposer_count(); }

std::uint32_t Roster::proposer_index(ActorId id) const {
  std::uint32_t n = 0;
  for (std::size_t i = 0; i < id.index && i < actors_.size(); ++i) {
    if (actors_[i].role == Role::Proposer) ++n;
  }
  return n;
}

void Roster::set_quorum(ActorId id, std::vector<ActorId> quorum) {
  std::sort(quorum.begin(), quorum.end());
  quorum.erase(std::unique(quorum.begin(), quorum.end()), quorum.end());
  actors_.at(id.index).quorum = std::move(quorum);
}

}  // namespace synodsim
