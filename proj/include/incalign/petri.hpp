#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "incalign/errors.hpp"

namespace incalign {

using PlaceIndex = std::uint32_t;
using TransitionIndex = std::uint32_t;

// An activity label, or the invisible label tau. Tau is a distinct state, never a string.
class ActivityLabel {
 public:
  static ActivityLabel silent() { return ActivityLabel{}; }

  static ActivityLabel visible(std::string text) {
    if (text.empty()) throw DataError("activity label must be non-empty");
    ActivityLabel label;
    label.text_ = std::move(text);
    return label;
  }

  bool is_silent() const noexcept { return !text_.has_value(); }
  bool is_visible() const noexcept { return text_.has_value(); }

  // Precondition: visible.
  const std::string& text() const {
    if (!text_) throw DataError("tau has no text");
    return *text_;
  }

  std::string display() const { return text_ ? *text_ : std::string{"tau"}; }

  friend bool operator==(const ActivityLabel&, const ActivityLabel&) = default;
  friend auto operator<=>(const ActivityLabel&, const ActivityLabel&) = default;

 private:
  ActivityLabel() = default;
  std::optional<std::string> text_;
};

inline std::vector<ActivityLabel> labels(std::initializer_list<std::string_view> texts) {
  std::vector<ActivityLabel> out;
  out.reserve(texts.size());
  for (auto t : texts) out.push_back(ActivityLabel::visible(std::string{t}));
  return out;
}

// Multiset of places, stored sparse and sorted by place index. Absent places count 0.
class Marking {
 public:
  using Entry = std::pair<PlaceIndex, std::uint32_t>;

  Marking() = default;

  // One token per listed place (repeats accumulate).
  Marking(std::initializer_list<PlaceIndex> places) {
    for (auto p : places) add(p, 1);
  }

  static Marking from_entries(std::vector<Entry> entries) {
    Marking m;
    for (auto [p, c] : entries) m.add(p, static_cast<std::int64_t>(c));
    return m;
  }

  std::uint32_t operator[](PlaceIndex p) const noexcept {
    auto it = find(p);
    return (it != entries_.end() && it->first == p) ? it->second : 0;
  }

  std::span<const Entry> entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  std::uint64_t total() const noexcept {
    std::uint64_t sum = 0;
    for (auto& e : entries_) sum += e.second;
    return sum;
  }

  // Throws InvariantViolation if the count would become negative.
  void add(PlaceIndex p, std::int64_t delta) {
    if (delta == 0) return;
    auto it = find(p);
    if (it != entries_.end() && it->first == p) {
      std::int64_t next = static_cast<std::int64_t>(it->second) + delta;
      if (next < 0) throw InvariantViolation("negative token count");
      if (next == 0)
        entries_.erase(it);
      else
        it->second = static_cast<std::uint32_t>(next);
      return;
    }
    if (delta < 0) throw InvariantViolation("negative token count");
    entries_.insert(it, Entry{p, static_cast<std::uint32_t>(delta)});
  }

  std::size_t hash() const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (auto [p, c] : entries_) {
      h ^= (static_cast<std::size_t>(p) << 20) ^ c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  friend bool operator==(const Marking&, const Marking&) = default;
  // Canonical order: lexicographic over (place index, count) entries.
  friend auto operator<=>(const Marking&, const Marking&) = default;

 private:
  std::vector<Entry>::iterator find(PlaceIndex p) {
    return std::lower_bound(entries_.begin(), entries_.end(), p,
                            [](const Entry& e, PlaceIndex q) { return e.first < q; });
  }
  std::vector<Entry>::const_iterator find(PlaceIndex p) const {
    return std::lower_bound(entries_.begin(), entries_.end(), p,
                            [](const Entry& e, PlaceIndex q) { return e.first < q; });
  }

  std::vector<Entry> entries_;
};

struct MarkingHash {
  std::size_t operator()(const Marking& m) const noexcept { return m.hash(); }
};

struct TransitionData {
  std::string id;
  ActivityLabel label = ActivityLabel::silent();
  std::vector<PlaceIndex> pre;   // sorted, unique
  std::vector<PlaceIndex> post;  // sorted, unique
};

// Plain labeled Petri net with unit arc weights. Append-only.
class PetriNet {
 public:
  PlaceIndex add_place(std::string id) {
    if (place_lookup_.contains(id)) throw DataError("duplicate place id '" + id + "'");
    auto idx = static_cast<PlaceIndex>(places_.size());
    place_lookup_.emplace(id, idx);
    places_.push_back(std::move(id));
    producers_.emplace_back();
    consumers_.emplace_back();
    return idx;
  }

  TransitionIndex add_transition(std::string id, ActivityLabel label, std::vector<PlaceIndex> pre,
                                 std::vector<PlaceIndex> post) {
    if (transition_lookup_.contains(id)) throw DataError("duplicate transition id '" + id + "'");
    normalize(pre, id);
    normalize(post, id);
    auto idx = static_cast<TransitionIndex>(transitions_.size());
    for (auto p : pre) consumers_[p].push_back(idx);
    for (auto p : post) producers_[p].push_back(idx);
    if (pre.empty()) unconditional_.push_back(idx);
    transition_lookup_.emplace(id, idx);
    transitions_.push_back(TransitionData{std::move(id), std::move(label), std::move(pre), std::move(post)});
    return idx;
  }

  std::size_t place_count() const noexcept { return places_.size(); }
  std::size_t transition_count() const noexcept { return transitions_.size(); }

  const std::string& place_id(PlaceIndex p) const { return places_.at(p); }
  const TransitionData& transition(TransitionIndex t) const {
    if (t >= transitions_.size()) throw DataError("unknown transition index " + std::to_string(t));
    return transitions_[t];
  }

  std::optional<PlaceIndex> find_place(std::string_view id) const {
    auto it = place_lookup_.find(std::string{id});
    if (it == place_lookup_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<TransitionIndex> find_transition(std::string_view id) const {
    auto it = transition_lookup_.find(std::string{id});
    if (it == transition_lookup_.end()) return std::nullopt;
    return it->second;
  }
  TransitionIndex transition_index(std::string_view id) const {
    auto t = find_transition(id);
    if (!t) throw DataError("unknown transition id '" + std::string{id} + "'");
    return *t;
  }
  PlaceIndex place_index(std::string_view id) const {
    auto p = find_place(id);
    if (!p) throw DataError("unknown place id '" + std::string{id} + "'");
    return *p;
  }

  // Transitions with an empty preset (always enabled).
  std::span<const TransitionIndex> unconditional() const noexcept { return unconditional_; }

  std::span<const TransitionIndex> producers(PlaceIndex p) const { return producers_.at(p); }
  std::span<const TransitionIndex> consumers(PlaceIndex p) const { return consumers_.at(p); }

  // Builds a marking from place ids, one token each.
  Marking marking(std::initializer_list<std::string_view> ids) const {
    Marking m;
    for (auto id : ids) m.add(place_index(id), 1);
    return m;
  }

  std::string format(const Marking& m) const {
    std::string out = "[";
    bool first = true;
    for (auto [p, c] : m.entries()) {
      if (!first) out += ",";
      first = false;
      out += p < places_.size() ? places_[p] : "#" + std::to_string(p);
      if (c > 1) out += "^" + std::to_string(c);
    }
    return out + "]";
  }

 private:
  void normalize(std::vector<PlaceIndex>& ps, const std::string& id) const {
    std::sort(ps.begin(), ps.end());
    if (std::adjacent_find(ps.begin(), ps.end()) != ps.end())
      throw DataError("transition '" + id + "' has a duplicate arc (arc weights are fixed at 1)");
    for (auto p : ps)
      if (p >= places_.size()) throw DataError("transition '" + id + "' references an unknown place");
  }

  std::vector<std::string> places_;
  std::vector<TransitionData> transitions_;
  std::vector<std::vector<TransitionIndex>> producers_;
  std::vector<std::vector<TransitionIndex>> consumers_;
  std::vector<TransitionIndex> unconditional_;
  std::unordered_map<std::string, PlaceIndex> place_lookup_;
  std::unordered_map<std::string, TransitionIndex> transition_lookup_;
};

inline bool enabled(const PetriNet& net, const Marking& m, TransitionIndex t) {
  const auto& tr = net.transition(t);
  return std::all_of(tr.pre.begin(), tr.pre.end(), [&](PlaceIndex p) { return m[p] > 0; });
}

inline bool enabled(const PetriNet& net, const Marking& m, std::string_view transition_id) {
  return enabled(net, m, net.transition_index(transition_id));
}

namespace detail {

inline Marking fire_at(const PetriNet& net, const Marking& m, TransitionIndex t, std::size_t step) {
  const auto& tr = net.transition(t);
  for (auto p : tr.pre)
    if (m[p] == 0) throw DisabledTransition(step, tr.id, net.place_id(p));
  Marking next = m;
  // -1 on pre \ post, +1 on post \ pre; self-loops cancel.
  for (auto p : tr.pre)
    if (!std::binary_search(tr.post.begin(), tr.post.end(), p)) next.add(p, -1);
  for (auto p : tr.post)
    if (!std::binary_search(tr.pre.begin(), tr.pre.end(), p)) next.add(p, +1);
  return next;
}

}  // namespace detail

inline Marking fire(const PetriNet& net, const Marking& m, TransitionIndex t) {
  return detail::fire_at(net, m, t, 0);
}

inline Marking fire(const PetriNet& net, const Marking& m, std::string_view transition_id) {
  return fire(net, m, net.transition_index(transition_id));
}

// Left fold of fire; a DisabledTransition reports the first failing step (0-based).
inline Marking fire_sequence(const PetriNet& net, Marking m, std::span<const TransitionIndex> sequence) {
  for (std::size_t k = 0; k < sequence.size(); ++k) m = detail::fire_at(net, m, sequence[k], k);
  return m;
}

inline Marking fire_sequence(const PetriNet& net, Marking m, std::initializer_list<std::string_view> ids) {
  std::vector<TransitionIndex> seq;
  for (auto id : ids) seq.push_back(net.transition_index(id));
  return fire_sequence(net, std::move(m), seq);
}

// Transitions enabled at m, ascending by index.
inline std::vector<TransitionIndex> enabled_transitions(const PetriNet& net, const Marking& m) {
  std::vector<TransitionIndex> candidates(net.unconditional().begin(), net.unconditional().end());
  for (auto [p, c] : m.entries()) {
    if (p >= net.place_count()) continue;
    auto cs = net.consumers(p);
    candidates.insert(candidates.end(), cs.begin(), cs.end());
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::erase_if(candidates, [&](TransitionIndex t) { return !enabled(net, m, t); });
  return candidates;
}

}  // namespace incalign

template <>
struct std::hash<incalign::Marking> {
  std::size_t operator()(const incalign::Marking& m) const noexcept { return m.hash(); }
};
