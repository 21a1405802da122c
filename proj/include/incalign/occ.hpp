#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "incalign/alignment.hpp"
#include "incalign/errors.hpp"
#include "incalign/heuristic.hpp"
#include "incalign/search.hpp"
#include "incalign/spn.hpp"

namespace incalign {

// Number of trace events an OCC run may revert; nullopt means unbounded.
using Window = std::optional<std::size_t>;

inline std::string window_name(const Window& w) { return w ? std::to_string(*w) : "inf"; }

struct RevertResult {
  PrefixAlignment prefix;
  Marking restart;
};

// Drops trailing moves until min(w, aligned events) log/sync moves are gone, then also
// drops the model moves now at the tail. The restart marking is replayed on `spn`.
inline RevertResult revert_alignment(const SyncProductNet& spn, const PrefixAlignment& al, const Window& w) {
  if (w && *w == 0) throw DataError("window must be at least 1");
  RevertResult out;
  std::size_t keep = 0;
  if (w) {
    keep = al.moves.size();
    std::size_t removed = 0;
    while (keep > 0 && removed < *w) {
      if (al.moves[keep - 1].info.kind != MoveKind::model) ++removed;
      --keep;
    }
    while (keep > 0 && al.moves[keep - 1].info.kind == MoveKind::model) --keep;
  }
  Marking m = spn.initial_marking();
  for (std::size_t i = 0; i < keep; ++i) {
    m = fire(spn.net(), m, al.moves[i].transition);
    out.prefix.append(al.moves[i]);
  }
  out.prefix.end_marking = m;
  out.restart = std::move(m);
  return out;
}

struct OccState {
  Window window;
  std::optional<SyncProductNet> spn;
  PrefixAlignment alignment;

  explicit OccState(Window w = std::nullopt) : window(w) {
    if (w && *w == 0) throw DataError("window must be at least 1");
  }
};

// One event for one case: extend, revert, search from the reverted marking, stitch.
inline SearchOutcome occ_process_event(OccState& state, std::shared_ptr<const WorkflowNet> model,
                                       const ActivityLabel& activity, HeuristicMode mode) {
  if (!state.spn) {
    std::vector<ActivityLabel> trace{activity};
    state.spn.emplace(build_spn(std::move(model), trace));
  } else {
    extend_spn(*state.spn, activity);
  }
  const auto& spn = *state.spn;
  auto reverted = revert_alignment(spn, state.alignment, state.window);
  auto outcome = astar_scratch(spn, mode, reverted.restart);
  PrefixAlignment joined = std::move(reverted.prefix);
  for (auto& mv : outcome.alignment.moves) joined.append(std::move(mv));
  joined.end_marking = outcome.alignment.end_marking;
#ifdef INCALIGN_VERIFY_ALIGNMENTS
  if (!verify_prefix_alignment(joined, spn.trace(), spn.model()))
    throw InvariantViolation("OCC produced an invalid prefix-alignment");
#endif
  state.alignment = joined;
  outcome.alignment = std::move(joined);
  return outcome;
}

}  // namespace incalign
