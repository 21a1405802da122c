#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "incalign/errors.hpp"
#include "incalign/petri.hpp"
#include "incalign/spn.hpp"

namespace incalign {

using Cost = std::int64_t;

// Standard cost function: sync and tau model moves are free, everything else costs 1.
inline Cost move_cost(const SpnTransition& t) {
  switch (t.kind) {
    case MoveKind::sync: return 0;
    case MoveKind::log: return 1;
    case MoveKind::model: return t.model_label && t.model_label->is_silent() ? 0 : 1;
  }
  return 1;
}

struct Move {
  TransitionIndex transition = 0;  // index in the product net
  SpnTransition info;
  std::string model_transition_id;  // empty for log moves
  Cost cost = 0;

  std::string top() const { return info.log_label ? info.log_label->display() : ">>"; }
  std::string bottom() const { return info.model_transition ? model_transition_id : ">>"; }
};

struct PrefixAlignment {
  std::vector<Move> moves;
  Cost total_cost = 0;
  Marking end_marking;

  void append(Move m) {
    total_cost += m.cost;
    moves.push_back(std::move(m));
  }
};

inline Move make_move(const SyncProductNet& spn, TransitionIndex t) {
  Move m;
  m.transition = t;
  m.info = spn.move(t);
  if (m.info.model_transition) m.model_transition_id = spn.model().net().transition(*m.info.model_transition).id;
  m.cost = move_cost(m.info);
  return m;
}

// One predecessor-map entry: either the root sentinel (null, null) or (transition, marking).
struct PredecessorEntry {
  bool root = false;
  TransitionIndex transition = 0;
  Marking from;
};

template <class S>
concept PredecessorSource = requires(const S& s, const Marking& m) {
  { s.lookup(m) } -> std::same_as<std::optional<PredecessorEntry>>;
};

class PredecessorMap {
 public:
  void set_root(const Marking& m) { entries_[m] = PredecessorEntry{true, 0, {}}; }
  void set(const Marking& m, TransitionIndex t, Marking from) { entries_[m] = PredecessorEntry{false, t, std::move(from)}; }
  std::optional<PredecessorEntry> lookup(const Marking& m) const {
    auto it = entries_.find(m);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::unordered_map<Marking, PredecessorEntry> entries_;
};

// Walks predecessors from goal back to the root sentinel, which must be `initial`.
template <PredecessorSource Source>
PrefixAlignment reconstruct(const SyncProductNet& spn, const Source& predecessors, const Marking& goal,
                            const Marking& initial) {
  std::vector<TransitionIndex> reversed;
  std::unordered_set<Marking> seen;
  Marking current = goal;
  while (true) {
    if (!seen.insert(current).second) throw DataError("predecessor chain contains a cycle");
    auto entry = predecessors.lookup(current);
    if (!entry) throw DataError("broken predecessor chain at " + spn.net().format(current));
    if (entry->root) break;
    reversed.push_back(entry->transition);
    current = entry->from;
  }
  if (current != initial) throw DataError("predecessor chain does not end at the initial marking");
  PrefixAlignment al;
  for (auto it = reversed.rbegin(); it != reversed.rend(); ++it) al.append(make_move(spn, *it));
  al.end_marking = goal;
  return al;
}

// Both row projections, move typing and cost bookkeeping.
inline bool verify_prefix_alignment(const PrefixAlignment& al, std::span<const ActivityLabel> trace,
                                    const WorkflowNet& model) {
  std::vector<ActivityLabel> first_row;
  std::vector<TransitionIndex> second_row;
  Cost total = 0;
  const auto& mnet = model.net();
  for (const auto& mv : al.moves) {
    const auto& info = mv.info;
    if (mv.cost != move_cost(info)) return false;
    total += mv.cost;
    switch (info.kind) {
      case MoveKind::log:
        if (!info.log_label || info.log_label->is_silent() || info.model_transition) return false;
        break;
      case MoveKind::model:
        if (info.log_label || !info.model_transition) return false;
        break;
      case MoveKind::sync:
        if (!info.log_label || !info.model_transition || info.log_label->is_silent()) return false;
        break;
    }
    if (info.model_transition) {
      if (*info.model_transition >= mnet.transition_count()) return false;
      const auto& mt = mnet.transition(*info.model_transition);
      if (mt.id != mv.model_transition_id) return false;
      if (info.kind == MoveKind::sync && mt.label != *info.log_label) return false;
      if (info.model_label && *info.model_label != mt.label) return false;
      second_row.push_back(*info.model_transition);
    }
    if (info.log_label) first_row.push_back(*info.log_label);
  }
  if (total != al.total_cost) return false;
  if (first_row.size() != trace.size() || !std::equal(first_row.begin(), first_row.end(), trace.begin()))
    return false;
  try {
    fire_sequence(mnet, model.initial(), second_row);
  } catch (const DisabledTransition&) {
    return false;
  }
  return true;
}

// Two-row table: observed activities on top, model transitions below, >> for skips.
inline std::string render_table(const PrefixAlignment& al) {
  std::vector<std::string> top, bottom;
  for (const auto& mv : al.moves) {
    top.push_back(mv.top());
    bottom.push_back(mv.bottom());
  }
  auto row = [&](const std::vector<std::string>& cells, const std::vector<std::string>& other) {
    std::string out = "|";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      auto width = std::max(cells[i].size(), other[i].size());
      out += " " + cells[i] + std::string(width - cells[i].size(), ' ') + " |";
    }
    return out;
  };
  if (al.moves.empty()) return "(empty alignment)\n";
  return row(top, bottom) + "\n" + row(bottom, top) + "\n";
}

inline nlohmann::ordered_json to_json(const PrefixAlignment& al) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& mv : al.moves) {
    nlohmann::ordered_json rec;
    rec["kind"] = to_string(mv.info.kind);
    rec["activity"] = mv.info.log_label ? nlohmann::ordered_json(mv.info.log_label->text()) : nullptr;
    rec["transition"] = mv.info.model_transition ? nlohmann::ordered_json(mv.model_transition_id) : nullptr;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace incalign
