#pragma once

#include <exception>
#include <optional>

namespace synodsim::sched {

template <typename Summary>
std::vector<Summary> sweep_serial(std::span<const Scenario> scenarios,
                                  const RunReducer<Summary>& summarize) {
  std::vector<Summary> out;
  out.reserve(scenarios.size());
  for (const auto& s : scenarios) out.push_back(summarize(s.seed, run(s)));
  return out;
}

template <typename Summary>
std::vector<Summary> sweep(std::span<const Scenario> scenarios,
                           const RunReducer<Summary>& summarize) {
  const auto n = static_cast<std::ptrdiff_t>(scenarios.size());
  std::vector<std::optional<Summary>> slots(scenarios.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto& s = scenarios[static_cast<std::size_t>(i)];
      slots[static_cast<std::size_t>(i)] = summarize(s.seed, run(s));
    } catch (...) {
#pragma omp critical(synodsim_sweep_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<Summary> out;
  out.reserve(slots.size());
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

}  // namespace synodsim::sched
