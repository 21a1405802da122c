#pragma once

#include <memory>
#include <string>
#include <vector>

#include "incalign/experiments.hpp"
#include "incalign/heuristic.hpp"
#include "incalign/search.hpp"
#include "incalign/spn.hpp"
#include "incalign/workflow.hpp"

namespace testing_support {

using namespace incalign;

inline std::shared_ptr<const WorkflowNet> model(const std::string& name) { return resolve_model(name); }

inline std::vector<ActivityLabel> to_labels(const Trace& t) {
  std::vector<ActivityLabel> out;
  for (const auto& a : t) out.push_back(ActivityLabel::visible(a));
  return out;
}

struct Instance {
  std::string preset;
  std::shared_ptr<const WorkflowNet> model;
  Trace trace;
};

struct GeneratedLog {
  std::string preset;
  std::shared_ptr<const WorkflowNet> model;
  std::vector<Trace> traces;
};

// The oracle-equivalence suite: two presets, noisy traces of length <= 8.
inline std::vector<GeneratedLog> suite_logs(std::size_t per_preset = 100) {
  std::vector<GeneratedLog> out;
  std::uint64_t seed = 11;
  for (const char* name : {"choice-loop", "parallel-tau"}) {
    auto m = model(name);
    out.push_back({name, m, generate_log(*m, per_preset, Noise{0.1, 0.1, 0.1}, 8, seed++)});
  }
  return out;
}

inline std::vector<Instance> suite_instances(std::size_t per_preset = 100) {
  std::vector<Instance> out;
  for (auto& log : suite_logs(per_preset))
    for (auto& t : log.traces) out.push_back({log.preset, log.model, t});
  return out;
}

inline SyncProductNet spn_for(const std::shared_ptr<const WorkflowNet>& m, const Trace& t) {
  auto labels = to_labels(t);
  return build_spn(m, labels);
}

}  // namespace testing_support
