#pragma once

#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "incalign/alignment.hpp"
#include "incalign/errors.hpp"
#include "incalign/petri.hpp"
#include "incalign/spn.hpp"

namespace incalign {

// Explicit reachability graph. Test-only machinery; bounded.
struct StateSpace {
  struct Edge {
    std::size_t from;
    std::size_t to;
    TransitionIndex transition;
  };
  std::vector<Marking> markings;
  std::unordered_map<Marking, std::size_t> index;
  std::vector<Edge> edges;
};

inline StateSpace explore_state_space(const PetriNet& net, const Marking& start, std::size_t bound = 100'000) {
  StateSpace space;
  space.markings.push_back(start);
  space.index.emplace(start, 0);
  for (std::size_t i = 0; i < space.markings.size(); ++i) {
    const Marking current = space.markings[i];
    for (auto t : enabled_transitions(net, current)) {
      Marking next = fire(net, current, t);
      auto [it, inserted] = space.index.try_emplace(next, space.markings.size());
      if (inserted) {
        if (space.markings.size() >= bound) throw StateSpaceLimit("reachable state space exceeds bound");
        space.markings.push_back(std::move(next));
      }
      space.edges.push_back({i, it->second, t});
    }
  }
  return space;
}

// Exact cheapest cost from every explored marking to a goal marking (nullopt if none
// is reachable), by reverse Dijkstra from all goals.
inline std::vector<std::optional<Cost>> distances_to_goal(const SyncProductNet& spn, const StateSpace& space) {
  const std::size_t n = space.markings.size();
  std::vector<std::vector<std::pair<std::size_t, Cost>>> reverse(n);
  for (const auto& e : space.edges) reverse[e.to].push_back({e.from, move_cost(spn.move(e.transition))});
  std::vector<std::optional<Cost>> dist(n);
  using Item = std::pair<Cost, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (std::size_t i = 0; i < n; ++i)
    if (spn.is_goal(space.markings[i])) {
      dist[i] = 0;
      queue.push({0, i});
    }
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d != *dist[v]) continue;
    for (auto [u, c] : reverse[v])
      if (!dist[u] || d + c < *dist[u]) {
        dist[u] = d + c;
        queue.push({d + c, u});
      }
  }
  return dist;
}

}  // namespace incalign
