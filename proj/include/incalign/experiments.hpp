#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "incalign/errors.hpp"
#include "incalign/heuristic.hpp"
#include "incalign/search.hpp"
#include "incalign/stream.hpp"
#include "incalign/workflow.hpp"

namespace incalign {

namespace presets {

// The running example: a or tau, then b or c.
inline const char* const n1 = R"({
  "places": ["p1", "p2", "p3"],
  "transitions": [
    {"id": "t1", "label": "a"}, {"id": "t2", "label": null},
    {"id": "t3", "label": "b"}, {"id": "t4", "label": "c"}
  ],
  "arcs": [["p1","t1"],["t1","p2"],["p1","t2"],["t2","p2"],
           ["p2","t3"],["t3","p3"],["p2","t4"],["t4","p3"]],
  "initial": {"p1": 1},
  "final": {"p3": 1}
})";

// Choice between b and c inside a d-loop, optional e at the end.
inline const char* const choice_loop = R"({
  "places": ["i", "p1", "p2", "p3", "o"],
  "transitions": [
    {"id": "ta", "label": "a"}, {"id": "tb", "label": "b"}, {"id": "tc", "label": "c"},
    {"id": "td", "label": "d"}, {"id": "texit", "label": null},
    {"id": "te", "label": "e"}, {"id": "tskip", "label": null}
  ],
  "arcs": [["i","ta"],["ta","p1"],["p1","tb"],["tb","p2"],["p1","tc"],["tc","p2"],
           ["p2","td"],["td","p1"],["p2","texit"],["texit","p3"],
           ["p3","te"],["te","o"],["p3","tskip"],["tskip","o"]],
  "initial": {"i": 1},
  "final": {"o": 1}
})";

// a, then b (skippable) in parallel with c;d, then a silent join and e.
inline const char* const parallel_tau = R"({
  "places": ["i", "p1", "p2", "p3", "p4", "p5", "p6", "o"],
  "transitions": [
    {"id": "ta", "label": "a"}, {"id": "tb", "label": "b"}, {"id": "tskip", "label": null},
    {"id": "tc", "label": "c"}, {"id": "td", "label": "d"},
    {"id": "tjoin", "label": null}, {"id": "te", "label": "e"}
  ],
  "arcs": [["i","ta"],["ta","p1"],["ta","p2"],
           ["p1","tb"],["tb","p3"],["p1","tskip"],["tskip","p3"],
           ["p2","tc"],["tc","p4"],["p4","td"],["td","p5"],
           ["p3","tjoin"],["p5","tjoin"],["tjoin","p6"],["p6","te"],["te","o"]],
  "initial": {"i": 1},
  "final": {"o": 1}
})";

// Two branches that both start with a: a;b;c or a;d;e. Committing early to the wrong
// a is what a short revert window cannot undo.
inline const char* const adversarial = R"({
  "places": ["i", "p1", "p2", "q1", "q2", "o"],
  "transitions": [
    {"id": "ta1", "label": "a"}, {"id": "tb", "label": "b"}, {"id": "tc", "label": "c"},
    {"id": "ta2", "label": "a"}, {"id": "td", "label": "d"}, {"id": "te", "label": "e"}
  ],
  "arcs": [["i","ta1"],["ta1","p1"],["p1","tb"],["tb","p2"],["p2","tc"],["tc","o"],
           ["i","ta2"],["ta2","q1"],["q1","td"],["td","q2"],["q2","te"],["te","o"]],
  "initial": {"i": 1},
  "final": {"o": 1}
})";

inline const std::map<std::string, const char*>& models() {
  static const std::map<std::string, const char*> table{
      {"n1", n1}, {"choice-loop", choice_loop}, {"parallel-tau", parallel_tau}, {"adversarial", adversarial}};
  return table;
}

inline const std::map<std::string, std::vector<Trace>>& logs() {
  static const std::map<std::string, std::vector<Trace>> table{
      {"bundled-3traces", {{"a", "b", "c"}, {"a", "c"}, {"c", "b"}}},
      {"adversarial",
       {{"a", "b", "d", "e"},
        {"a", "b", "d", "e"},
        {"a", "d", "b", "c"},
        {"a", "b", "x", "d", "e"},
        {"a", "b", "c"},
        {"a", "d", "e"}}},
  };
  return table;
}

}  // namespace presets

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A path to a net file, or the name of a bundled model.
inline std::shared_ptr<const WorkflowNet> resolve_model(const std::string& spec) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(spec, ec))
    return std::make_shared<const WorkflowNet>(WorkflowNet::from_json(read_file(spec)));
  auto it = presets::models().find(spec);
  if (it == presets::models().end()) throw DataError("no model file or bundled model named '" + spec + "'");
  return std::make_shared<const WorkflowNet>(WorkflowNet::from_json(it->second));
}

struct NamedLog {
  std::string name;
  std::vector<Trace> traces;
};

// A path to an event file (NDJSON or CSV), or the name of a bundled log.
inline NamedLog resolve_log(const std::string& spec) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(spec, ec)) {
    NamedLog out{std::filesystem::path(spec).stem().string(), {}};
    for (auto& t : events_to_log(parse_event_stream(read_file(spec)))) out.traces.push_back(std::move(t.activities));
    if (out.traces.empty()) throw DataError("log '" + spec + "' contains no events");
    return out;
  }
  auto it = presets::logs().find(spec);
  if (it == presets::logs().end()) throw DataError("no log file or bundled log named '" + spec + "'");
  return NamedLog{spec, it->second};
}

struct Noise {
  double swap_p = 0;
  double drop_p = 0;
  double insert_p = 0;
};

// Random enabled-transition walks from the initial to the final marking, then
// per-position noise. Traces longer than max_len are truncated.
inline std::vector<Trace> generate_log(const WorkflowNet& model, std::size_t n_traces, Noise noise,
                                       std::size_t max_len, std::uint64_t seed) {
  for (double p : {noise.swap_p, noise.drop_p, noise.insert_p})
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("noise probabilities must lie in [0, 1]");
  if (max_len == 0) throw DataError("max_len must be positive");
  auto report = validate_wfnet(model);
  if (!report.ok()) throw DataError("model is not a WF-net:\n" + report.summary());

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const auto alphabet = model.alphabet();
  const auto& net = model.net();
  const std::size_t step_limit = 4 * max_len + 16;
  constexpr int kRetries = 1000;

  auto walk = [&]() -> std::optional<Trace> {
    Marking m = model.initial();
    Trace t;
    for (std::size_t step = 0; step < step_limit; ++step) {
      if (m == model.final()) return t;
      auto en = enabled_transitions(net, m);
      if (en.empty()) return std::nullopt;
      auto pick = en[std::uniform_int_distribution<std::size_t>(0, en.size() - 1)(rng)];
      m = fire(net, m, pick);
      const auto& label = net.transition(pick).label;
      if (!label.is_silent()) {
        if (t.size() == max_len) return std::nullopt;
        t.push_back(label.text());
      }
    }
    return m == model.final() ? std::optional{t} : std::nullopt;
  };

  auto perturb = [&](Trace t) {
    Trace out;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i + 1 < t.size() && coin(rng) < noise.swap_p) std::swap(t[i], t[i + 1]);
      if (!alphabet.empty() && coin(rng) < noise.insert_p)
        out.push_back(alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)]);
      if (coin(rng) < noise.drop_p) continue;
      out.push_back(t[i]);
    }
    if (out.size() > max_len) out.resize(max_len);
    return out;
  };

  std::vector<Trace> log;
  while (log.size() < n_traces) {
    std::optional<Trace> clean;
    for (int r = 0; r < kRetries && !(clean && !clean->empty()); ++r) clean = walk();
    if (!clean || clean->empty())
      throw DataError("no non-empty model execution within the length bound was found");
    Trace noisy;
    for (int r = 0; r < kRetries && noisy.empty(); ++r) noisy = perturb(*clean);
    if (noisy.empty()) noisy.push_back(clean->front());
    log.push_back(std::move(noisy));
  }
  return log;
}

// Per-trace record of one algorithm's run.
struct TraceRun {
  Trace trace;
  std::vector<Cost> costs;  // per prefix
  SearchMetrics metrics;    // summed over events
};

struct AlgorithmRun {
  AlgorithmSpec algorithm;
  std::vector<TraceRun> traces;  // log order
  std::vector<EventResult> events;  // emission order
};

struct MetricsRecord {
  std::string algorithm;
  std::size_t traces = 0;
  double avg_queued = 0;
  double avg_visited = 0;
  std::size_t traces_with_fp = 0;
  std::size_t variants_with_fp = 0;
  double avg_time = 0;
  double avg_lps = 0;
};

inline std::vector<bool> false_positive_flags(const AlgorithmRun& run, const std::vector<std::vector<Cost>>& optimal) {
  if (optimal.size() != run.traces.size()) throw DataError("oracle costs missing for some traces");
  std::vector<bool> flags;
  for (std::size_t i = 0; i < run.traces.size(); ++i) {
    const auto& got = run.traces[i].costs;
    if (optimal[i].size() != got.size()) throw DataError("oracle costs missing for some prefixes");
    bool fp = false;
    for (std::size_t k = 0; k < got.size(); ++k) {
      if (got[k] < optimal[i][k]) throw InvariantViolation("algorithm reported a cost below the optimum");
      fp = fp || got[k] > optimal[i][k];
    }
    flags.push_back(fp);
  }
  return flags;
}

inline MetricsRecord compute_metrics(const AlgorithmRun& run, const std::vector<std::vector<Cost>>& optimal) {
  MetricsRecord rec;
  rec.algorithm = run.algorithm.name();
  rec.traces = run.traces.size();
  auto flags = false_positive_flags(run, optimal);
  std::set<Trace> fp_variants;
  double queued = 0, visited = 0, time = 0, lps = 0;
  for (std::size_t i = 0; i < run.traces.size(); ++i) {
    const auto& m = run.traces[i].metrics;
    queued += static_cast<double>(m.queued);
    visited += static_cast<double>(m.visited);
    lps += static_cast<double>(m.lps_solved);
    time += m.wall_seconds;
    if (flags[i]) {
      ++rec.traces_with_fp;
      fp_variants.insert(run.traces[i].trace);
    }
  }
  rec.variants_with_fp = fp_variants.size();
  if (rec.traces > 0) {
    const auto n = static_cast<double>(rec.traces);
    rec.avg_queued = queued / n;
    rec.avg_visited = visited / n;
    rec.avg_time = time / n;
    rec.avg_lps = lps / n;
  }
  return rec;
}

// Streams the log through one engine per algorithm.
inline AlgorithmRun run_algorithm(std::shared_ptr<const WorkflowNet> model, const std::vector<Trace>& log,
                                  AlgorithmSpec algorithm, HeuristicMode mode, StreamOrder order) {
  StreamEngine engine(std::move(model), algorithm, mode);
  AlgorithmRun run;
  run.algorithm = algorithm;
  run.traces.resize(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) run.traces[i].trace = log[i];
  for (const auto& e : replay_log_as_stream(log, order)) {
    auto r = engine.process(e);
    if (r.error) throw DataError("event rejected: " + *r.error);
    auto& tr = run.traces.at(std::stoul(r.case_id) - 1);
    tr.costs.push_back(r.cost);
    tr.metrics += r.metrics;
    run.events.push_back(std::move(r));
  }
  return run;
}

// Optimal cost for every prefix of every trace, by scratch A*.
inline std::vector<std::vector<Cost>> optimal_prefix_costs(std::shared_ptr<const WorkflowNet> model,
                                                           const std::vector<Trace>& log, HeuristicMode mode) {
  std::vector<std::vector<Cost>> out;
  for (const auto& t : log) {
    std::vector<Cost> costs;
    std::optional<SyncProductNet> spn;
    for (const auto& a : t) {
      auto label = ActivityLabel::visible(a);
      if (!spn) {
        std::vector<ActivityLabel> first{label};
        spn.emplace(build_spn(model, first));
      } else {
        extend_spn(*spn, label);
      }
      costs.push_back(astar_scratch(*spn, mode).alignment.total_cost);
    }
    out.push_back(std::move(costs));
  }
  return out;
}

struct SuiteResult {
  std::string log_name;
  std::vector<AlgorithmRun> runs;
  std::vector<std::vector<Cost>> optimal;
  std::vector<MetricsRecord> metrics;
};

// Oracle costs come from the IAS run when one is configured.
inline SuiteResult run_suite(std::shared_ptr<const WorkflowNet> model, const NamedLog& log,
                             const std::vector<AlgorithmSpec>& algorithms, HeuristicMode mode, StreamOrder order) {
  SuiteResult res;
  res.log_name = log.name;
  for (const auto& a : algorithms) res.runs.push_back(run_algorithm(model, log.traces, a, mode, order));
  auto ias = std::find_if(res.runs.begin(), res.runs.end(),
                          [](const AlgorithmRun& r) { return r.algorithm.kind == AlgorithmKind::ias; });
  if (ias != res.runs.end()) {
    for (const auto& t : ias->traces) res.optimal.push_back(t.costs);
  } else {
    res.optimal = optimal_prefix_costs(model, log.traces, mode);
  }
  for (const auto& r : res.runs) res.metrics.push_back(compute_metrics(r, res.optimal));
  return res;
}

// Column families of the results table, in order.
inline const std::vector<std::string>& deterministic_columns() {
  static const std::vector<std::string> cols{"avg_queued_per_trace", "avg_visited_per_trace", "traces_with_fp",
                                             "variants_with_fp", "avg_solved_lps_per_trace"};
  return cols;
}

inline const std::vector<std::string>& timing_columns() {
  static const std::vector<std::string> cols{"avg_time_per_trace_s"};
  return cols;
}

inline std::string format_number(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string metric_cell(const MetricsRecord& m, const std::string& col) {
  if (col == "avg_queued_per_trace") return format_number(m.avg_queued, 3);
  if (col == "avg_visited_per_trace") return format_number(m.avg_visited, 3);
  if (col == "traces_with_fp") return std::to_string(m.traces_with_fp);
  if (col == "variants_with_fp") return std::to_string(m.variants_with_fp);
  if (col == "avg_solved_lps_per_trace") return format_number(m.avg_lps, 3);
  if (col == "avg_time_per_trace_s") return format_number(m.avg_time, 6);
  throw InvariantViolation("unknown metric column " + col);
}

struct ResultTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// One row per log; one column per (metric family, algorithm).
inline ResultTable build_table(const std::vector<SuiteResult>& suites, const std::vector<std::string>& families) {
  ResultTable t;
  t.header = {"log", "traces"};
  if (suites.empty()) return t;
  for (const auto& f : families)
    for (const auto& m : suites.front().metrics) t.header.push_back(f + "." + m.algorithm);
  for (const auto& s : suites) {
    std::vector<std::string> row{s.log_name, std::to_string(s.metrics.empty() ? 0 : s.metrics.front().traces)};
    for (const auto& f : families)
      for (const auto& m : s.metrics) row.push_back(metric_cell(m, f));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::string to_csv(const ResultTable& t) {
  auto line = [](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    return out + "\n";
  };
  std::string out = line(t.header);
  for (const auto& r : t.rows) out += line(r);
  return out;
}

inline std::string to_text(const ResultTable& t) {
  std::vector<std::size_t> width(t.header.size());
  for (std::size_t i = 0; i < t.header.size(); ++i) width[i] = t.header[i].size();
  for (const auto& r : t.rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += "  ";
      out += std::string(width[i] - cells[i].size(), ' ') + cells[i];
    }
    return out + "\n";
  };
  std::string out = line(t.header);
  for (const auto& r : t.rows) out += line(r);
  return out;
}

}  // namespace incalign
