#pragma once

#include <cstdint>
#include <string>

#include "incalign/alignment.hpp"
#include "incalign/errors.hpp"
#include "incalign/lp.hpp"
#include "incalign/spn.hpp"

namespace incalign {

enum class HeuristicMode : std::uint8_t { zero, lp, ilp };

inline const char* to_string(HeuristicMode m) {
  switch (m) {
    case HeuristicMode::zero: return "zero";
    case HeuristicMode::lp: return "lp";
    case HeuristicMode::ilp: return "ilp";
  }
  return "?";
}

inline HeuristicMode parse_heuristic_mode(std::string_view s) {
  if (s == "zero") return HeuristicMode::zero;
  if (s == "lp") return HeuristicMode::lp;
  if (s == "ilp") return HeuristicMode::ilp;
  throw DataError("unknown heuristic mode '" + std::string{s} + "'");
}

// State-equation relaxation towards the last trace place, evaluated at marking m:
//   trace place p:  m(p) + sum_{t in .p} x_t - sum_{t in p.} x_t  = [p == p_last]
//   model place p:  m(p) + sum_{t in .p} x_t - sum_{t in p.} x_t >= 0
//   minimize sum_t cost(t) x_t, x >= 0.
struct HeuristicProblem {
  lp::LinearProgram program;
  std::size_t trace_rows = 0;
  std::size_t model_rows = 0;
  PlaceIndex target = 0;
};

inline HeuristicProblem build_problem(const SyncProductNet& spn, const Marking& m) {
  const auto& net = spn.net();
  for (auto [p, c] : m.entries())
    if (p >= net.place_count()) throw DataError("marking references a place outside the product net");
  if (!spn.trace_token(m)) throw DataError("marking must hold exactly one trace-part token");

  HeuristicProblem hp;
  hp.target = spn.last_trace_place();
  auto& prog = hp.program;
  prog.variable_count = net.transition_count();
  prog.objective.reserve(prog.variable_count);
  for (TransitionIndex t = 0; t < net.transition_count(); ++t) prog.objective.push_back(move_cost(spn.move(t)));

  auto row_for = [&](PlaceIndex p) {
    lp::Constraint c;
    for (auto t : net.producers(p)) c.terms.push_back({t, +1});
    for (auto t : net.consumers(p)) c.terms.push_back({t, -1});
    return c;
  };
  for (PlaceIndex p = 0; p < net.place_count(); ++p) {
    auto c = row_for(p);
    const auto here = static_cast<std::int64_t>(m[p]);
    if (spn.is_trace_place(p)) {
      c.relation = lp::Relation::equal;
      c.rhs = (p == hp.target ? 1 : 0) - here;
      ++hp.trace_rows;
    } else {
      c.relation = lp::Relation::greater_equal;
      c.rhs = -here;
      ++hp.model_rows;
    }
    prog.constraints.push_back(std::move(c));
  }
  return hp;
}

struct HeuristicValue {
  lp::Rational value = 0;
  bool infeasible = false;
  HeuristicMode mode = HeuristicMode::zero;
  std::size_t relaxations = 0;
};

inline HeuristicValue solve_problem(const HeuristicProblem& problem, HeuristicMode mode) {
  HeuristicValue hv;
  hv.mode = mode;
  if (mode == HeuristicMode::zero) return hv;
  auto sol = mode == HeuristicMode::lp ? lp::solve_lp(problem.program) : lp::solve_ilp(problem.program);
  hv.relaxations = sol.relaxations;
  if (sol.status == lp::Status::infeasible) {
    hv.infeasible = true;
    return hv;
  }
  if (sgn(sol.objective) < 0) throw InvariantViolation("negative heuristic value");
  hv.value = sol.objective;
  return hv;
}

inline HeuristicValue estimate(const SyncProductNet& spn, const Marking& m, HeuristicMode mode) {
  if (mode == HeuristicMode::zero) {
    if (!spn.trace_token(m)) throw DataError("marking must hold exactly one trace-part token");
    return HeuristicValue{};
  }
  return solve_problem(build_problem(spn, m), mode);
}

}  // namespace incalign
