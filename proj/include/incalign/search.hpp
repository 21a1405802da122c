#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "incalign/alignment.hpp"
#include "incalign/errors.hpp"
#include "incalign/heuristic.hpp"
#include "incalign/lp.hpp"
#include "incalign/petri.hpp"
#include "incalign/spn.hpp"

namespace incalign {

// eager: recompute h of every open marking before resuming (IASR).
// lazy: recompute h only when a stale marking is popped (IAS).
enum class Refresh : std::uint8_t { eager, lazy };

struct SearchMetrics {
  std::uint64_t queued = 0;   // open-set insertions of new markings
  std::uint64_t visited = 0;  // closed-set insertions
  std::uint64_t lps_solved = 0;
  std::uint64_t heuristic_recomputations = 0;
  std::uint64_t pops = 0;
  std::uint32_t max_pops_per_marking = 0;
  double wall_seconds = 0;

  SearchMetrics& operator+=(const SearchMetrics& o) {
    queued += o.queued;
    visited += o.visited;
    lps_solved += o.lps_solved;
    heuristic_recomputations += o.heuristic_recomputations;
    pops += o.pops;
    max_pops_per_marking = std::max(max_pops_per_marking, o.max_pops_per_marking);
    wall_seconds += o.wall_seconds;
    return *this;
  }
};

struct SearchOutcome;

// Reusable A* state for one case: open/closed sets, g, predecessors, stored h values.
// A stored h is stale when it was computed for a shorter trace than the current one.
class SearchCache {
 public:
  using NodeId = std::uint32_t;
  static constexpr std::size_t kNoTarget = std::numeric_limits<std::size_t>::max();

  struct StoredHeuristic {
    lp::Rational value;
    bool infinite = false;
    std::size_t trace_length = kNoTarget;
  };

  SearchCache() = default;

  // Open = {start}, g(start) = 0, p(start) = root sentinel.
  explicit SearchCache(const Marking& start) {
    nodes_.push_back(Node{start});
    nodes_.back().g = 0;
    index_.emplace(start, 0);
    push(0);
  }

  bool initialized() const noexcept { return !nodes_.empty(); }
  const Marking& start() const { return nodes_.at(0).marking; }
  std::size_t size() const noexcept { return nodes_.size(); }

  bool in_open(const Marking& m) const { return state(m) == State::open; }
  bool in_closed(const Marking& m) const { return state(m) == State::closed; }

  std::optional<Cost> g(const Marking& m) const {
    auto it = index_.find(m);
    if (it == index_.end()) return std::nullopt;
    return nodes_[it->second].g;
  }

  std::optional<StoredHeuristic> stored_h(const Marking& m) const {
    auto it = index_.find(m);
    if (it == index_.end()) return std::nullopt;
    const auto& n = nodes_[it->second];
    return StoredHeuristic{n.h, n.h_infinite, n.h_length};
  }

  std::optional<PredecessorEntry> lookup(const Marking& m) const {
    auto it = index_.find(m);
    if (it == index_.end()) return std::nullopt;
    const auto& n = nodes_[it->second];
    if (!n.has_pred) return PredecessorEntry{true, 0, {}};
    return PredecessorEntry{false, n.pred_transition, nodes_[n.pred_node].marking};
  }

  std::vector<Marking> open_markings() const { return collect(State::open); }
  std::vector<Marking> closed_markings() const { return collect(State::closed); }

  std::map<Marking, Cost> g_map() const {
    std::map<Marking, Cost> out;
    for (const auto& n : nodes_) out.emplace(n.marking, n.g);
    return out;
  }

  std::size_t byte_estimate() const {
    std::size_t bytes = nodes_.capacity() * sizeof(Node) + heap_.capacity() * sizeof(HeapEntry);
    for (const auto& n : nodes_) bytes += n.marking.entries().size() * sizeof(Marking::Entry) * 2 + 48;
    return bytes;
  }

  // open and closed disjoint, g(start) = 0, predecessor chains acyclic and rooted at start.
  void check_invariants() const {
    if (nodes_.empty()) return;
    if (nodes_[0].g != 0 || nodes_[0].has_pred) throw InvariantViolation("start node must be the root with g = 0");
    for (NodeId id = 0; id < nodes_.size(); ++id) {
      NodeId cur = id;
      std::size_t steps = 0;
      while (nodes_[cur].has_pred) {
        cur = nodes_[cur].pred_node;
        if (++steps > nodes_.size()) throw InvariantViolation("predecessor cycle");
      }
      if (cur != 0) throw InvariantViolation("predecessor chain does not end at the start marking");
      if (nodes_[id].g == kInfinity) throw InvariantViolation("discovered marking without g");
    }
  }

 private:
  friend SearchOutcome astar_inc(const SyncProductNet&, SearchCache&, HeuristicMode, Refresh);

  static constexpr Cost kInfinity = std::numeric_limits<Cost>::max();
  enum class State : std::uint8_t { unknown, open, closed };

  struct Node {
    Marking marking;
    Cost g = kInfinity;
    lp::Rational h = 0;
    bool h_infinite = false;
    std::size_t h_length = kNoTarget;
    State state = State::open;
    bool has_pred = false;
    TransitionIndex pred_transition = 0;
    NodeId pred_node = 0;
    std::uint32_t version = 0;
  };

  struct HeapEntry {
    lp::Rational f;
    bool infinite;
    Cost g;
    NodeId node;
    std::uint32_t version;
  };

  State state(const Marking& m) const {
    auto it = index_.find(m);
    return it == index_.end() ? State::unknown : nodes_[it->second].state;
  }

  std::vector<Marking> collect(State s) const {
    std::vector<Marking> out;
    for (const auto& n : nodes_)
      if (n.state == s) out.push_back(n.marking);
    std::sort(out.begin(), out.end());
    return out;
  }

  // Lower f first; ties: larger g, then smaller marking in canonical order.
  bool worse(const HeapEntry& a, const HeapEntry& b) const {
    if (a.infinite != b.infinite) return a.infinite;
    if (!a.infinite) {
      int c = cmp(a.f, b.f);
      if (c != 0) return c > 0;
    }
    if (a.g != b.g) return a.g < b.g;
    if (a.node != b.node) return nodes_[a.node].marking > nodes_[b.node].marking;
    return a.version < b.version;
  }

  void push(NodeId id) {
    auto& n = nodes_[id];
    ++n.version;
    HeapEntry e{n.h + n.g, n.h_infinite, n.g, id, n.version};
    heap_.push_back(std::move(e));
    std::push_heap(heap_.begin(), heap_.end(), [this](const HeapEntry& a, const HeapEntry& b) { return worse(a, b); });
  }

  std::optional<HeapEntry> pop() {
    auto cmp_fn = [this](const HeapEntry& a, const HeapEntry& b) { return worse(a, b); };
    while (!heap_.empty()) {
      std::pop_heap(heap_.begin(), heap_.end(), cmp_fn);
      HeapEntry e = std::move(heap_.back());
      heap_.pop_back();
      const auto& n = nodes_[e.node];
      if (n.state == State::open && n.version == e.version) return e;
    }
    return std::nullopt;
  }

  void rebuild_heap() {
    heap_.clear();
    for (NodeId id = 0; id < nodes_.size(); ++id)
      if (nodes_[id].state == State::open) push(id);
  }

  std::vector<Node> nodes_;
  std::unordered_map<Marking, NodeId> index_;
  std::vector<HeapEntry> heap_;
};

struct SearchOutcome {
  PrefixAlignment alignment;
  SearchMetrics metrics;
};

// Resumes A* on `spn` from the cached open/closed sets. The cache must be fresh or the
// result of the previous call for the same case followed by at most one extension.
// The returned goal marking stays in the open set.
inline SearchOutcome astar_inc(const SyncProductNet& spn, SearchCache& cache, HeuristicMode mode, Refresh refresh) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  if (!cache.initialized()) throw DataError("search cache is not initialized");

  SearchOutcome out;
  auto& metrics = out.metrics;
  const std::size_t n = spn.trace_length();
  const auto& net = spn.net();
  std::vector<std::uint32_t> pops(cache.nodes_.size(), 0);

  auto compute_h = [&](SearchCache::NodeId id) {
    auto& node = cache.nodes_[id];
    if (node.h_length != SearchCache::kNoTarget) ++metrics.heuristic_recomputations;
    auto hv = estimate(spn, node.marking, mode);
    if (mode != HeuristicMode::zero) ++metrics.lps_solved;
    node.h = std::move(hv.value);
    node.h_infinite = hv.infeasible;
    node.h_length = n;
  };

  if (refresh == Refresh::eager) {
    bool refreshed = false;
    for (SearchCache::NodeId id = 0; id < cache.nodes_.size(); ++id) {
      auto& node = cache.nodes_[id];
      if (node.state != SearchCache::State::open || node.h_length == n) continue;
      compute_h(id);
      refreshed = true;
    }
    if (refreshed) cache.rebuild_heap();
  }

  while (auto entry = cache.pop()) {
    const auto id = entry->node;
    pops[id] += 1;
    metrics.max_pops_per_marking = std::max(metrics.max_pops_per_marking, pops[id]);
    ++metrics.pops;
    if (cache.nodes_[id].h_length != n) {
      compute_h(id);
      cache.push(id);
      continue;
    }
    if (spn.is_goal(cache.nodes_[id].marking)) {
      cache.push(id);
      out.alignment = reconstruct(spn, cache, cache.nodes_[id].marking, cache.start());
#ifdef INCALIGN_VERIFY_ALIGNMENTS
      if (cache.start() == spn.initial_marking() && !verify_prefix_alignment(out.alignment, spn.trace(), spn.model()))
        throw InvariantViolation("search produced an invalid prefix-alignment");
#endif
      metrics.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
      return out;
    }
    cache.nodes_[id].state = SearchCache::State::closed;
    ++metrics.visited;
    const Marking current = cache.nodes_[id].marking;
    const Cost g_here = cache.nodes_[id].g;
    for (auto t : enabled_transitions(net, current)) {
      Marking next = fire(net, current, t);
      auto [it, inserted] = cache.index_.try_emplace(next, static_cast<SearchCache::NodeId>(cache.nodes_.size()));
      const auto child = it->second;
      if (inserted) {
        cache.nodes_.push_back(SearchCache::Node{std::move(next)});
        pops.push_back(0);
        ++metrics.queued;
        compute_h(child);
      } else if (cache.nodes_[child].state == SearchCache::State::closed) {
        continue;
      }
      const Cost candidate = g_here + move_cost(spn.move(t));
      auto& cn = cache.nodes_[child];
      if (candidate < cn.g) {
        cn.g = candidate;
        cn.has_pred = true;
        cn.pred_transition = t;
        cn.pred_node = id;
        cache.push(child);
      }
    }
  }
  throw InvariantViolation("open set exhausted without reaching a goal marking");
}

// Fresh A* from `start` to the current goal condition.
inline SearchOutcome astar_scratch(const SyncProductNet& spn, HeuristicMode mode, const Marking& start) {
  SearchCache cache(start);
  return astar_inc(spn, cache, mode, Refresh::eager);
}

inline SearchOutcome astar_scratch(const SyncProductNet& spn, HeuristicMode mode) {
  return astar_scratch(spn, mode, spn.initial_marking());
}

struct OracleResult {
  Cost cost = 0;
  Marking goal;
  std::unordered_map<Marking, Cost> distances;  // settled markings
};

// Uniform-cost search to the nearest goal marking. Throws StateSpaceLimit past `bound`
// discovered markings.
inline OracleResult dijkstra_oracle(const SyncProductNet& spn, const Marking& start, std::size_t bound = 1'000'000) {
  using Item = std::pair<Cost, Marking>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::unordered_map<Marking, Cost> best{{start, 0}};
  OracleResult result;
  queue.push({0, start});
  while (!queue.empty()) {
    auto [d, m] = queue.top();
    queue.pop();
    if (result.distances.contains(m)) continue;
    result.distances.emplace(m, d);
    if (spn.is_goal(m)) {
      result.cost = d;
      result.goal = m;
      return result;
    }
    for (auto t : enabled_transitions(spn.net(), m)) {
      Marking next = fire(spn.net(), m, t);
      Cost nd = d + move_cost(spn.move(t));
      auto it = best.find(next);
      if (it != best.end() && it->second <= nd) continue;
      if (it == best.end() && best.size() >= bound) throw StateSpaceLimit("oracle state space exceeds bound");
      best[next] = nd;
      queue.push({nd, std::move(next)});
    }
  }
  throw InvariantViolation("no goal marking reachable");
}

inline OracleResult dijkstra_oracle(const SyncProductNet& spn) { return dijkstra_oracle(spn, spn.initial_marking()); }

}  // namespace incalign
