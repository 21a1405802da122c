#include <gtest/gtest.h>

#include <random>

#include "incalign/heuristic.hpp"
#include "incalign/reachability.hpp"
#include "support.hpp"

using namespace incalign;
using testing_support::model;
using testing_support::spn_for;

namespace {

lp::Rational h(const SyncProductNet& spn, std::initializer_list<std::string_view> places, HeuristicMode mode) {
  auto v = estimate(spn, spn.net().marking(places), mode);
  EXPECT_FALSE(v.infeasible);
  return v.value;
}

// tau, then a, then b.
std::shared_ptr<const WorkflowNet> tau_a_b() {
  return std::make_shared<const WorkflowNet>(WorkflowNet::from_json(R"({
    "places": ["i", "p1", "p2", "o"],
    "transitions": [{"id": "t0", "label": null}, {"id": "ta", "label": "a"}, {"id": "tb", "label": "b"}],
    "arcs": [["i","t0"],["t0","p1"],["p1","ta"],["ta","p2"],["p2","tb"],["tb","o"]],
    "initial": {"i": 1}, "final": {"o": 1}})"));
}

}  // namespace

TEST(BuildProblem, RunningExampleShape) {
  auto spn = spn_for(model("n1"), {"a"});
  auto hp = build_problem(spn, spn.initial_marking());
  EXPECT_EQ(hp.trace_rows, 2u);
  EXPECT_EQ(hp.model_rows, 3u);
  EXPECT_EQ(hp.program.variable_count, 6u);
  EXPECT_EQ(hp.target, spn.last_trace_place());
  for (const auto& c : hp.program.constraints)
    for (const auto& t : c.terms) EXPECT_TRUE(t.coefficient == 1 || t.coefficient == -1);
}

TEST(BuildProblem, RejectsBadMarkings) {
  auto spn = spn_for(model("n1"), {"a"});
  EXPECT_THROW(build_problem(spn, Marking{40}), DataError);
  EXPECT_THROW(build_problem(spn, spn.net().marking({"p1"})), DataError);
  EXPECT_THROW(estimate(spn, spn.net().marking({"p1"}), HeuristicMode::zero), DataError);
}

TEST(Estimate, RunningExampleValues) {
  auto spn = spn_for(model("n1"), {"a"});
  for (auto mode : {HeuristicMode::lp, HeuristicMode::ilp}) {
    EXPECT_EQ(h(spn, {"tp0", "p1"}, mode), 0);
    EXPECT_EQ(h(spn, {"tp0", "p2"}, mode), 1);
    EXPECT_EQ(h(spn, {"tp1", "p3"}, mode), 0);
  }
  EXPECT_EQ(h(spn, {"tp0", "p2"}, HeuristicMode::zero), 0);
}

TEST(Estimate, TokenBehindTargetForcesForwardFlow) {
  auto spn = spn_for(model("n1"), {"a", "b"});
  EXPECT_EQ(h(spn, {"tp0", "p3"}, HeuristicMode::ilp), 2);
  EXPECT_EQ(h(spn, {"tp0", "p1"}, HeuristicMode::ilp), 0);
  EXPECT_EQ(h(spn, {"tp1", "p3"}, HeuristicMode::lp), 1);
}

// Log moves always exist, so no one-token marking yields an infeasible problem.
TEST(Estimate, FeasibleOnEveryReachableMarking) {
  auto spn = spn_for(model("parallel-tau"), {"a", "c", "zz", "e"});
  for (const auto& mk : explore_state_space(spn.net(), spn.initial_marking()).markings)
    EXPECT_FALSE(estimate(spn, mk, HeuristicMode::ilp).infeasible);
}

TEST(Estimate, LpNeverExceedsIlpOnRandomProblems) {
  std::mt19937_64 rng(23);
  int checked = 0;
  for (const char* name : {"n1", "choice-loop", "parallel-tau", "adversarial"}) {
    auto m = model(name);
    auto alphabet = m->alphabet();
    alphabet.push_back("zz");
    for (int round = 0; round < 25; ++round) {
      Trace t(1 + rng() % 5);
      for (auto& a : t) a = alphabet[rng() % alphabet.size()];
      auto spn = spn_for(m, t);
      auto space = explore_state_space(spn.net(), spn.initial_marking());
      const auto& mk = space.markings[rng() % space.markings.size()];
      auto lp_v = estimate(spn, mk, HeuristicMode::lp);
      auto ilp_v = estimate(spn, mk, HeuristicMode::ilp);
      ASSERT_EQ(lp_v.infeasible, ilp_v.infeasible);
      if (!lp_v.infeasible) EXPECT_LE(lp_v.value, ilp_v.value);
      if (!ilp_v.infeasible) EXPECT_TRUE(lp::is_integral(ilp_v.value));
      ++checked;
    }
  }
  EXPECT_GE(checked, 100);
}

// Exhaustive on small product nets: admissible and consistent against exact distances.
TEST(Estimate, AdmissibleAndConsistent) {
  std::mt19937_64 rng(31);
  for (const char* name : {"n1", "choice-loop", "parallel-tau", "adversarial"}) {
    auto m = model(name);
    auto alphabet = m->alphabet();
    for (int round = 0; round < 6; ++round) {
      Trace t(1 + rng() % 4);
      for (auto& a : t) a = alphabet[rng() % alphabet.size()];
      auto spn = spn_for(m, t);
      auto space = explore_state_space(spn.net(), spn.initial_marking());
      auto dist = distances_to_goal(spn, space);
      for (auto mode : {HeuristicMode::lp, HeuristicMode::ilp}) {
        std::vector<HeuristicValue> hs;
        for (const auto& mk : space.markings) hs.push_back(estimate(spn, mk, mode));
        for (std::size_t i = 0; i < hs.size(); ++i)
          if (dist[i]) {
            ASSERT_FALSE(hs[i].infeasible);
            EXPECT_LE(hs[i].value, *dist[i]) << spn.net().format(space.markings[i]);
          }
        for (const auto& e : space.edges) {
          if (hs[e.to].infeasible) continue;
          ASSERT_FALSE(hs[e.from].infeasible);
          EXPECT_LE(hs[e.from].value, hs[e.to].value + move_cost(spn.move(e.transition)));
        }
      }
    }
  }
}

// The state equation lets the new sync a feed the old sync b regardless of order, so
// the estimate at an old marking drops when the trace grows.
TEST(Estimate, CanDecreaseWhenTraceGrows) {
  auto spn = spn_for(tau_a_b(), {"b"});
  const auto at = spn.net().marking({"i", "tp0"});
  EXPECT_EQ(estimate(spn, at, HeuristicMode::ilp).value, 1);
  extend_spn(spn, ActivityLabel::visible("a"));
  EXPECT_EQ(estimate(spn, at, HeuristicMode::ilp).value, 0);
  EXPECT_EQ(estimate(spn, at, HeuristicMode::lp).value, 0);
}

TEST(HeuristicMode, Parse) {
  EXPECT_EQ(parse_heuristic_mode("ilp"), HeuristicMode::ilp);
  EXPECT_EQ(parse_heuristic_mode("lp"), HeuristicMode::lp);
  EXPECT_EQ(parse_heuristic_mode("zero"), HeuristicMode::zero);
  EXPECT_THROW(parse_heuristic_mode("milp"), DataError);
}
