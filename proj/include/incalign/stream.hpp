#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "incalign/alignment.hpp"
#include "incalign/errors.hpp"
#include "incalign/heuristic.hpp"
#include "incalign/occ.hpp"
#include "incalign/search.hpp"
#include "incalign/spn.hpp"
#include "incalign/workflow.hpp"

namespace incalign {

// activity == nullopt encodes tau (a JSON null); such events are rejected.
struct Event {
  std::string case_id;
  std::optional<std::string> activity;
  std::uint64_t arrival = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

enum class AlgorithmKind : std::uint8_t { ias, iasr, occ };

struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::ias;
  Window window;  // occ only

  std::string name() const {
    switch (kind) {
      case AlgorithmKind::ias: return "ias";
      case AlgorithmKind::iasr: return "iasr";
      case AlgorithmKind::occ: return window ? "occ-w" + std::to_string(*window) : "occ";
    }
    return "?";
  }

  // True for the algorithms that always return optimal prefix-alignments.
  bool exact() const { return kind != AlgorithmKind::occ || !window; }

  friend bool operator==(const AlgorithmSpec&, const AlgorithmSpec&) = default;
};

inline AlgorithmSpec parse_algorithm(std::string_view s) {
  if (s == "ias") return {AlgorithmKind::ias, std::nullopt};
  if (s == "iasr") return {AlgorithmKind::iasr, std::nullopt};
  if (s == "occ") return {AlgorithmKind::occ, std::nullopt};
  if (s.starts_with("occ-w")) {
    auto digits = s.substr(5);
    std::size_t w = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), w);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && !digits.empty() && w > 0)
      return {AlgorithmKind::occ, w};
  }
  throw DataError("unknown algorithm '" + std::string{s} + "'");
}

inline std::vector<AlgorithmSpec> parse_algorithm_list(std::string_view s) {
  std::vector<AlgorithmSpec> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    auto item = s.substr(start, end - start);
    if (item.empty()) throw DataError("empty algorithm name in list");
    out.push_back(parse_algorithm(item));
    start = end + 1;
  }
  return out;
}

struct EventResult {
  std::string case_id;
  std::size_t event_index = 0;  // 1-based position within the case
  std::uint64_t arrival = 0;
  std::optional<std::string> error;
  Cost cost = 0;
  PrefixAlignment alignment;
  SearchMetrics metrics;
};

inline nlohmann::ordered_json to_json(const EventResult& r) {
  nlohmann::ordered_json j;
  j["case"] = r.case_id;
  j["event_index"] = r.event_index;
  if (r.error) {
    j["error"] = *r.error;
    return j;
  }
  j["cost"] = r.cost;
  j["alignment"] = to_json(r.alignment);
  j["queued"] = r.metrics.queued;
  j["visited"] = r.metrics.visited;
  j["lps"] = r.metrics.lps_solved;
  return j;
}

class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void emit(const EventResult& r) = 0;
};

class MemorySink : public EventSink {
 public:
  void emit(const EventResult& r) override { results.push_back(r); }
  std::vector<EventResult> results;
};

class NdjsonSink : public EventSink {
 public:
  explicit NdjsonSink(std::ostream& out) : out_(out) {}
  void emit(const EventResult& r) override { out_ << to_json(r).dump() << '\n'; }

 private:
  std::ostream& out_;
};

struct CaseState {
  std::size_t order = 0;  // creation order
  std::vector<ActivityLabel> trace;
  std::optional<SyncProductNet> spn;
  SearchCache cache;
  OccState occ;
  PrefixAlignment alignment;
};

class CaseTable {
 public:
  CaseState* find(const std::string& id) {
    auto it = cases_.find(id);
    return it == cases_.end() ? nullptr : &it->second;
  }

  CaseState& get_or_create(const std::string& id, const Window& w) {
    auto it = cases_.find(id);
    if (it != cases_.end()) return it->second;
    CaseState st{order_.size(), {}, std::nullopt, SearchCache{}, OccState{w}, {}};
    order_.push_back(id);
    return cases_.emplace(id, std::move(st)).first->second;
  }

  std::size_t size() const noexcept { return cases_.size(); }
  const std::vector<std::string>& creation_order() const noexcept { return order_; }

  std::size_t byte_estimate() const {
    std::size_t bytes = 0;
    for (const auto& [id, st] : cases_) {
      bytes += id.size() + sizeof(CaseState) + st.cache.byte_estimate();
      bytes += st.trace.size() * sizeof(ActivityLabel);
      bytes += st.alignment.moves.size() * sizeof(Move);
      if (st.spn) bytes += st.spn->net().transition_count() * 96 + st.spn->net().place_count() * 32;
      if (st.occ.spn) bytes += st.occ.spn->net().transition_count() * 96 + st.occ.spn->net().place_count() * 32;
    }
    return bytes;
  }

 private:
  std::unordered_map<std::string, CaseState> cases_;
  std::vector<std::string> order_;
};

// Per-case incremental conformance checking over an event stream.
class StreamEngine {
 public:
  StreamEngine(std::shared_ptr<const WorkflowNet> model, AlgorithmSpec algorithm, HeuristicMode mode)
      : model_(std::move(model)), algorithm_(algorithm), mode_(mode) {
    if (!model_) throw DataError("engine requires a model");
    auto report = validate_wfnet(*model_);
    if (!report.ok()) throw DataError("model is not a WF-net:\n" + report.summary());
  }

  const AlgorithmSpec& algorithm() const noexcept { return algorithm_; }
  std::size_t case_count() const noexcept { return table_.size(); }
  std::size_t byte_estimate() const { return table_.byte_estimate(); }
  const CaseTable& table() const noexcept { return table_; }

  EventResult process(const Event& e) {
    EventResult r;
    r.case_id = e.case_id;
    r.arrival = e.arrival;
    if (!e.activity || e.activity->empty()) {
      auto* st = table_.find(e.case_id);
      r.event_index = st ? st->trace.size() : 0;
      r.error = e.activity ? "empty activity" : "tau is not an observable activity";
      return r;
    }
    auto activity = ActivityLabel::visible(*e.activity);
    auto& st = table_.get_or_create(e.case_id, algorithm_.window);
    st.trace.push_back(activity);
    r.event_index = st.trace.size();

    SearchOutcome out;
    if (algorithm_.kind == AlgorithmKind::occ) {
      out = occ_process_event(st.occ, model_, activity, mode_);
    } else {
      if (!st.spn) {
        st.spn.emplace(build_spn(model_, st.trace));
        st.cache = SearchCache(st.spn->initial_marking());
      } else {
        extend_spn(*st.spn, activity);
      }
      auto refresh = algorithm_.kind == AlgorithmKind::ias ? Refresh::lazy : Refresh::eager;
      out = astar_inc(*st.spn, st.cache, mode_, refresh);
    }
    st.alignment = out.alignment;
    r.cost = out.alignment.total_cost;
    r.alignment = std::move(out.alignment);
    r.metrics = out.metrics;
    return r;
  }

  void process(const Event& e, EventSink& sink) { sink.emit(process(e)); }

 private:
  std::shared_ptr<const WorkflowNet> model_;
  AlgorithmSpec algorithm_;
  HeuristicMode mode_;
  CaseTable table_;
};

using Trace = std::vector<std::string>;

struct LoggedTrace {
  std::string case_id;
  Trace activities;
};

enum class StreamOrder : std::uint8_t { sequential, round_robin };

inline StreamOrder parse_stream_order(std::string_view s) {
  if (s == "sequential") return StreamOrder::sequential;
  if (s == "round-robin" || s == "round_robin") return StreamOrder::round_robin;
  throw DataError("unknown stream order '" + std::string{s} + "'");
}

// Case ids are 1..n in log order.
inline std::vector<Event> replay_log_as_stream(const std::vector<Trace>& log, StreamOrder order) {
  std::vector<Event> out;
  for (const auto& t : log)
    if (t.empty()) throw DataError("log contains an empty trace");
  std::uint64_t arrival = 0;
  auto emit = [&](std::size_t c, std::size_t k) { out.push_back({std::to_string(c + 1), log[c][k], arrival++}); };
  if (order == StreamOrder::sequential) {
    for (std::size_t c = 0; c < log.size(); ++c)
      for (std::size_t k = 0; k < log[c].size(); ++k) emit(c, k);
    return out;
  }
  for (std::size_t round = 0;; ++round) {
    bool any = false;
    for (std::size_t c = 0; c < log.size(); ++c)
      if (round < log[c].size()) {
        emit(c, round);
        any = true;
      }
    if (!any) break;
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  if (quoted) throw DataError("line " + std::to_string(line_no) + ": unterminated quote");
  cells.push_back(std::move(cell));
  return cells;
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

// NDJSON {"case","activity"} lines, or CSV with a header naming case and activity.
inline std::vector<Event> parse_event_stream(std::istream& in) {
  std::vector<Event> events;
  std::string line;
  std::size_t line_no = 0;
  std::optional<bool> json_mode;
  std::size_t case_col = 0, activity_col = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (!json_mode) {
      json_mode = line[first] == '{';
      if (!*json_mode) {
        auto header = detail::split_csv_line(line, line_no);
        std::optional<std::size_t> c, a;
        for (std::size_t i = 0; i < header.size(); ++i) {
          if (header[i] == "case") c = i;
          if (header[i] == "activity") a = i;
        }
        if (!c || !a) throw DataError("CSV header must contain 'case' and 'activity' columns");
        case_col = *c;
        activity_col = *a;
        continue;
      }
    }
    const std::string where = "line " + std::to_string(line_no) + ": ";
    Event e;
    e.arrival = events.size();
    if (*json_mode) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        throw DataError(where + "not a JSON record");
      }
      if (!j.is_object() || !j.contains("case") || !j.contains("activity"))
        throw DataError(where + "record needs 'case' and 'activity'");
      const auto& c = j["case"];
      if (c.is_string())
        e.case_id = c.get<std::string>();
      else if (c.is_number_integer())
        e.case_id = std::to_string(c.get<std::int64_t>());
      else
        throw DataError(where + "'case' must be a string");
      const auto& a = j["activity"];
      if (a.is_string())
        e.activity = a.get<std::string>();
      else if (!a.is_null())
        throw DataError(where + "'activity' must be a string or null");
    } else {
      auto cells = detail::split_csv_line(line, line_no);
      if (cells.size() <= std::max(case_col, activity_col)) throw DataError(where + "missing columns");
      e.case_id = cells[case_col];
      e.activity = cells[activity_col];
    }
    events.push_back(std::move(e));
  }
  return events;
}

inline std::vector<Event> parse_event_stream(const std::string& text) {
  std::istringstream in(text);
  return parse_event_stream(in);
}

// Groups events into traces by case, in order of first appearance.
inline std::vector<LoggedTrace> events_to_log(const std::vector<Event>& events) {
  std::vector<LoggedTrace> log;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& e : events) {
    if (!e.activity || e.activity->empty()) throw DataError("log contains a tau or empty activity");
    auto [it, inserted] = index.try_emplace(e.case_id, log.size());
    if (inserted) log.push_back({e.case_id, {}});
    log[it->second].activities.push_back(*e.activity);
  }
  return log;
}

inline std::string log_to_ndjson(const std::vector<Trace>& log) {
  std::string out;
  for (std::size_t c = 0; c < log.size(); ++c)
    for (const auto& a : log[c]) {
      nlohmann::ordered_json j;
      j["case"] = std::to_string(c + 1);
      j["activity"] = a;
      out += j.dump() + "\n";
    }
  return out;
}

}  // namespace incalign
