#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "incalign/errors.hpp"
#include "incalign/petri.hpp"
#include "incalign/workflow.hpp"

namespace incalign {

// Linear net p'_0 -t'_1-> p'_1 ... -t'_n-> p'_n. Places "tp<k>", transitions "tt<k>".
struct TraceNet {
  PetriNet net;
  std::size_t length = 0;
  std::vector<PlaceIndex> places;            // places[k] = p'_k
  std::vector<TransitionIndex> transitions;  // transitions[k-1] = t'_k
  Marking initial;
  Marking final;
};

inline void require_visible(std::span<const ActivityLabel> trace) {
  for (const auto& a : trace)
    if (a.is_silent()) throw DataError("trace contains tau; observed activities must be visible");
}

inline TraceNet build_trace_net(std::span<const ActivityLabel> trace) {
  if (trace.empty()) throw DataError("trace net requires at least one activity");
  require_visible(trace);
  TraceNet tn;
  tn.length = trace.size();
  for (std::size_t k = 0; k <= trace.size(); ++k) tn.places.push_back(tn.net.add_place("tp" + std::to_string(k)));
  for (std::size_t k = 1; k <= trace.size(); ++k)
    tn.transitions.push_back(tn.net.add_transition("tt" + std::to_string(k), trace[k - 1], {tn.places[k - 1]},
                                                   {tn.places[k]}));
  tn.initial = Marking{tn.places.front()};
  tn.final = Marking{tn.places.back()};
  return tn;
}

enum class MoveKind : std::uint8_t { log, model, sync };

inline const char* to_string(MoveKind k) {
  switch (k) {
    case MoveKind::log: return "log";
    case MoveKind::model: return "model";
    case MoveKind::sync: return "sync";
  }
  return "?";
}

// A product transition. A missing side is the skip symbol >>.
struct SpnTransition {
  MoveKind kind = MoveKind::log;
  std::size_t trace_position = 0;  // 1-based; 0 for model moves
  std::optional<TransitionIndex> model_transition;
  std::optional<ActivityLabel> log_label;
  std::optional<ActivityLabel> model_label;
};

struct ExtensionDelta {
  PlaceIndex new_place = 0;
  std::vector<TransitionIndex> new_transitions;
  std::vector<std::pair<PlaceIndex, TransitionIndex>> input_arcs;
  std::vector<std::pair<TransitionIndex, PlaceIndex>> output_arcs;
};

// Product of a growing trace net with a WF-net. Model places keep their model indices
// [0, |P|); trace place p'_k has index |P| + k. Extension is append-only, so indices,
// ids and markings stay valid across extensions.
class SyncProductNet {
 public:
  const WorkflowNet& model() const noexcept { return *model_; }
  const std::shared_ptr<const WorkflowNet>& model_ptr() const noexcept { return model_; }
  const PetriNet& net() const noexcept { return net_; }

  std::size_t trace_length() const noexcept { return trace_.size(); }
  std::span<const ActivityLabel> trace() const noexcept { return trace_; }

  const SpnTransition& move(TransitionIndex t) const { return moves_.at(t); }
  std::span<const SpnTransition> moves() const noexcept { return moves_; }

  std::size_t model_place_count() const noexcept { return model_->net().place_count(); }
  bool is_trace_place(PlaceIndex p) const noexcept { return p >= model_place_count(); }
  PlaceIndex trace_place(std::size_t k) const { return trace_places_.at(k); }
  PlaceIndex last_trace_place() const noexcept { return trace_places_.back(); }

  const Marking& initial_marking() const noexcept { return initial_; }

  // Marks the last trace place: a prefix-alignment goal.
  bool is_goal(const Marking& m) const noexcept { return m[last_trace_place()] >= 1; }

  // Trace position k such that p'_k holds the trace token; nullopt if the marking is not
  // a one-token trace marking.
  std::optional<std::size_t> trace_token(const Marking& m) const {
    std::optional<std::size_t> pos;
    std::uint64_t tokens = 0;
    for (auto [p, c] : m.entries())
      if (is_trace_place(p)) {
        tokens += c;
        pos = p - trace_places_.front();
      }
    if (tokens != 1) return std::nullopt;
    return pos;
  }

  ExtensionDelta extend(const ActivityLabel& activity) {
    if (activity.is_silent()) throw DataError("cannot extend a product net with tau");
    ExtensionDelta delta;
    const std::size_t k = trace_.size() + 1;
    const PlaceIndex prev = trace_places_.back();
    delta.new_place = net_.add_place("tp" + std::to_string(k));
    trace_places_.push_back(delta.new_place);
    trace_.push_back(activity);

    const std::string tt = "tt" + std::to_string(k);
    auto add = [&](std::string id, SpnTransition info, std::vector<PlaceIndex> pre, std::vector<PlaceIndex> post) {
      auto label = info.kind == MoveKind::model ? *info.model_label : *info.log_label;
      auto t = net_.add_transition(std::move(id), label, pre, post);
      moves_.push_back(std::move(info));
      delta.new_transitions.push_back(t);
      for (auto p : net_.transition(t).pre) delta.input_arcs.emplace_back(p, t);
      for (auto p : net_.transition(t).post) delta.output_arcs.emplace_back(t, p);
    };
    add("log:" + tt, SpnTransition{MoveKind::log, k, std::nullopt, activity, std::nullopt}, {prev},
        {delta.new_place});
    const auto& mnet = model_->net();
    for (TransitionIndex t = 0; t < mnet.transition_count(); ++t) {
      const auto& mt = mnet.transition(t);
      if (mt.label.is_silent() || mt.label != activity) continue;
      std::vector<PlaceIndex> pre = mt.pre, post = mt.post;
      pre.push_back(prev);
      post.push_back(delta.new_place);
      add("sync:" + tt + "|" + mt.id, SpnTransition{MoveKind::sync, k, t, activity, mt.label}, std::move(pre),
          std::move(post));
    }
    return delta;
  }

 private:
  friend SyncProductNet build_spn(std::shared_ptr<const WorkflowNet>, std::span<const ActivityLabel>);

  std::shared_ptr<const WorkflowNet> model_;
  PetriNet net_;
  std::vector<SpnTransition> moves_;
  std::vector<ActivityLabel> trace_;
  std::vector<PlaceIndex> trace_places_;
  Marking initial_;
};

namespace detail {

inline void require_valid(const WorkflowNet& model) {
  auto report = validate_wfnet(model);
  if (!report.ok()) throw DataError("model is not a WF-net:\n" + report.summary());
}

}  // namespace detail

// Direct construction from the product definition: log moves T'x{>>}, model moves
// {>>}xT and sync moves (t',t) with matching visible labels. Arcs are the union of
// the component arcs.
inline SyncProductNet build_spn(std::shared_ptr<const WorkflowNet> model, std::span<const ActivityLabel> trace) {
  detail::require_valid(*model);
  TraceNet tn = build_trace_net(trace);
  SyncProductNet spn;
  spn.model_ = std::move(model);
  const auto& mnet = spn.model_->net();
  const PlaceIndex offset = static_cast<PlaceIndex>(mnet.place_count());
  for (PlaceIndex p = 0; p < mnet.place_count(); ++p) spn.net_.add_place(mnet.place_id(p));
  for (auto p : tn.places) spn.trace_places_.push_back(spn.net_.add_place(tn.net.place_id(p)));
  spn.trace_.assign(trace.begin(), trace.end());

  auto shift = [&](const std::vector<PlaceIndex>& ps) {
    std::vector<PlaceIndex> out;
    for (auto p : ps) out.push_back(p + offset);
    return out;
  };
  auto add = [&](std::string id, SpnTransition info, std::vector<PlaceIndex> pre, std::vector<PlaceIndex> post) {
    auto label = info.kind == MoveKind::model ? *info.model_label : *info.log_label;
    spn.net_.add_transition(std::move(id), label, std::move(pre), std::move(post));
    spn.moves_.push_back(std::move(info));
  };

  for (TransitionIndex t = 0; t < mnet.transition_count(); ++t) {
    const auto& mt = mnet.transition(t);
    add("model:" + mt.id, SpnTransition{MoveKind::model, 0, t, std::nullopt, mt.label}, mt.pre, mt.post);
  }
  for (std::size_t k = 1; k <= tn.length; ++k) {
    const auto& tt = tn.net.transition(tn.transitions[k - 1]);
    add("log:" + tt.id, SpnTransition{MoveKind::log, k, std::nullopt, tt.label, std::nullopt}, shift(tt.pre),
        shift(tt.post));
    for (TransitionIndex t = 0; t < mnet.transition_count(); ++t) {
      const auto& mt = mnet.transition(t);
      if (mt.label.is_silent() || mt.label != tt.label) continue;
      auto pre = shift(tt.pre);
      pre.insert(pre.end(), mt.pre.begin(), mt.pre.end());
      auto post = shift(tt.post);
      post.insert(post.end(), mt.post.begin(), mt.post.end());
      add("sync:" + tt.id + "|" + mt.id, SpnTransition{MoveKind::sync, k, t, tt.label, mt.label}, std::move(pre),
          std::move(post));
    }
  }
  spn.initial_ = spn.model_->initial();
  spn.initial_.add(spn.trace_places_.front(), 1);
  return spn;
}

inline SyncProductNet build_spn(const WorkflowNet& model, std::span<const ActivityLabel> trace) {
  return build_spn(std::make_shared<const WorkflowNet>(model), trace);
}

inline ExtensionDelta extend_spn(SyncProductNet& spn, const ActivityLabel& activity) { return spn.extend(activity); }

// Canonical text form (sorted transition lines), independent of insertion order.
inline std::string canonical_form(const SyncProductNet& spn) {
  const auto& net = spn.net();
  std::vector<std::string> lines;
  for (PlaceIndex p = 0; p < net.place_count(); ++p)
    lines.push_back(std::string{"place "} + (spn.is_trace_place(p) ? "trace " : "model ") + net.place_id(p));
  for (TransitionIndex t = 0; t < net.transition_count(); ++t) {
    const auto& tr = net.transition(t);
    const auto& mv = spn.move(t);
    std::vector<std::string> pre, post;
    for (auto p : tr.pre) pre.push_back(net.place_id(p));
    for (auto p : tr.post) post.push_back(net.place_id(p));
    std::sort(pre.begin(), pre.end());
    std::sort(post.begin(), post.end());
    std::string line = std::string{"transition "} + tr.id + " kind=" + to_string(mv.kind) +
                       " pos=" + std::to_string(mv.trace_position) + " label=" + tr.label.display() + " pre=";
    for (auto& p : pre) line += p + ",";
    line += " post=";
    for (auto& p : post) line += p + ",";
    lines.push_back(std::move(line));
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace incalign
