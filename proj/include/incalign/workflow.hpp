#pragma once

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "incalign/errors.hpp"
#include "incalign/petri.hpp"

namespace incalign {

// On-disk net description. Labels: string = visible activity, null = tau.
struct NetDocument {
  struct TransitionEntry {
    std::string id;
    std::optional<std::string> label;
  };

  std::vector<std::string> places;
  std::vector<TransitionEntry> transitions;
  std::vector<std::pair<std::string, std::string>> arcs;
  std::map<std::string, std::uint32_t> initial;
  std::map<std::string, std::uint32_t> final;
};

inline NetDocument parse_net_document(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string{"net document is not valid JSON: "} + e.what());
  }
  NetDocument doc;
  try {
    for (const auto& p : j.at("places")) doc.places.push_back(p.get<std::string>());
    for (const auto& t : j.at("transitions")) {
      NetDocument::TransitionEntry entry{t.at("id").get<std::string>(), std::nullopt};
      if (t.contains("label") && !t.at("label").is_null()) entry.label = t.at("label").get<std::string>();
      doc.transitions.push_back(std::move(entry));
    }
    for (const auto& a : j.at("arcs")) {
      if (!a.is_array() || a.size() != 2) throw DataError("arc must be a [source, target] pair");
      doc.arcs.emplace_back(a[0].get<std::string>(), a[1].get<std::string>());
    }
    for (auto& [k, v] : j.at("initial").items()) doc.initial[k] = v.get<std::uint32_t>();
    for (auto& [k, v] : j.at("final").items()) doc.final[k] = v.get<std::uint32_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string{"malformed net document: "} + e.what());
  }
  return doc;
}

inline std::string to_json(const NetDocument& doc) {
  nlohmann::ordered_json j;
  j["places"] = doc.places;
  auto ts = nlohmann::ordered_json::array();
  for (const auto& t : doc.transitions) {
    nlohmann::ordered_json e;
    e["id"] = t.id;
    e["label"] = t.label ? nlohmann::ordered_json(*t.label) : nlohmann::ordered_json(nullptr);
    ts.push_back(std::move(e));
  }
  j["transitions"] = std::move(ts);
  auto arcs = nlohmann::ordered_json::array();
  for (const auto& [s, t] : doc.arcs) arcs.push_back({s, t});
  j["arcs"] = std::move(arcs);
  j["initial"] = doc.initial;
  j["final"] = doc.final;
  return j.dump(2);
}

inline NetDocument load_net_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read net file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_net_document(ss.str());
}

// Labeled Petri net with initial/final markings. Place and transition indices follow
// lexicographic id order. Construction only checks that ids resolve; the WF-net
// structure is checked by validate_wfnet.
class WorkflowNet {
 public:
  static WorkflowNet from_document(const NetDocument& doc) {
    WorkflowNet wf;
    std::vector<std::string> places = doc.places;
    std::sort(places.begin(), places.end());
    for (auto& p : places) wf.net_.add_place(p);

    std::vector<NetDocument::TransitionEntry> transitions = doc.transitions;
    std::sort(transitions.begin(), transitions.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    std::map<std::string, std::pair<std::vector<PlaceIndex>, std::vector<PlaceIndex>>> arcs;
    std::set<std::string> transition_ids;
    for (auto& t : transitions) {
      if (!transition_ids.insert(t.id).second) throw DataError("duplicate transition id '" + t.id + "'");
      if (t.label && t.label->empty()) throw DataError("transition '" + t.id + "' has an empty label");
    }
    for (const auto& [src, tgt] : doc.arcs) {
      bool src_place = wf.net_.find_place(src).has_value(), src_trans = transition_ids.contains(src);
      bool tgt_place = wf.net_.find_place(tgt).has_value(), tgt_trans = transition_ids.contains(tgt);
      // Shared ids are tolerated here (validation reports them) unless the arc is ambiguous.
      const bool p2t = src_place && tgt_trans, t2p = src_trans && tgt_place;
      if (p2t && !t2p) {
        arcs[tgt].first.push_back(*wf.net_.find_place(src));
      } else if (t2p && !p2t) {
        arcs[src].second.push_back(*wf.net_.find_place(tgt));
      } else {
        throw DataError("arc (" + src + "," + tgt + ") does not connect a place and a transition");
      }
    }
    for (auto& t : transitions) {
      auto& [pre, post] = arcs[t.id];
      wf.net_.add_transition(t.id, t.label ? ActivityLabel::visible(*t.label) : ActivityLabel::silent(),
                             pre, post);
    }
    wf.initial_ = wf.to_marking(doc.initial);
    wf.final_ = wf.to_marking(doc.final);
    for (auto& t : transition_ids)
      if (wf.net_.find_place(t)) wf.shared_ids_.push_back(t);
    return wf;
  }

  static WorkflowNet from_json(const std::string& text) { return from_document(parse_net_document(text)); }

  NetDocument to_document() const {
    NetDocument doc;
    for (PlaceIndex p = 0; p < net_.place_count(); ++p) doc.places.push_back(net_.place_id(p));
    for (TransitionIndex t = 0; t < net_.transition_count(); ++t) {
      const auto& tr = net_.transition(t);
      doc.transitions.push_back({tr.id, tr.label.is_silent() ? std::nullopt : std::optional{tr.label.text()}});
      for (auto p : tr.pre) doc.arcs.emplace_back(net_.place_id(p), tr.id);
      for (auto p : tr.post) doc.arcs.emplace_back(tr.id, net_.place_id(p));
    }
    for (auto [p, c] : initial_.entries()) doc.initial[net_.place_id(p)] = c;
    for (auto [p, c] : final_.entries()) doc.final[net_.place_id(p)] = c;
    return doc;
  }

  const PetriNet& net() const noexcept { return net_; }
  const Marking& initial() const noexcept { return initial_; }
  const Marking& final() const noexcept { return final_; }

  // Ids declared both as a place and as a transition.
  const std::vector<std::string>& shared_ids() const noexcept { return shared_ids_; }

  // Distinct visible labels, sorted.
  std::vector<std::string> alphabet() const {
    std::set<std::string> out;
    for (TransitionIndex t = 0; t < net_.transition_count(); ++t)
      if (net_.transition(t).label.is_visible()) out.insert(net_.transition(t).label.text());
    return {out.begin(), out.end()};
  }

 private:
  Marking to_marking(const std::map<std::string, std::uint32_t>& counts) const {
    Marking m;
    for (auto& [id, c] : counts) {
      auto p = net_.find_place(id);
      if (!p) throw DataError("marking references unknown place '" + id + "'");
      m.add(*p, c);
    }
    return m;
  }

  PetriNet net_;
  Marking initial_;
  Marking final_;
  std::vector<std::string> shared_ids_;
};

struct Violation {
  std::string code;
  std::vector<std::string> nodes;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(std::string_view code) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.code == code; });
  }
  std::string summary() const {
    std::string out;
    for (const auto& v : violations) out += v.code + ": " + v.message + "\n";
    return out;
  }
};

// Structural WF-net checks: disjoint ids, unique source/sink matching the initial/final
// markings, and every node on a path from source to sink.
inline ValidationReport validate_wfnet(const WorkflowNet& wf) {
  ValidationReport report;
  const auto& net = wf.net();
  auto add = [&](std::string code, std::vector<std::string> nodes, std::string message) {
    report.violations.push_back({std::move(code), std::move(nodes), std::move(message)});
  };

  if (!wf.shared_ids().empty())
    add("shared-ids", wf.shared_ids(), "ids declared both as place and transition");

  std::vector<PlaceIndex> sources, sinks;
  for (PlaceIndex p = 0; p < net.place_count(); ++p) {
    if (net.producers(p).empty()) sources.push_back(p);
    if (net.consumers(p).empty()) sinks.push_back(p);
  }
  auto ids = [&](const std::vector<PlaceIndex>& ps) {
    std::vector<std::string> out;
    for (auto p : ps) out.push_back(net.place_id(p));
    return out;
  };
  if (sources.empty()) add("no-source", {}, "no place without incoming arcs");
  if (sources.size() > 1) add("multiple-sources", ids(sources), "more than one place without incoming arcs");
  if (sinks.empty()) add("no-sink", {}, "no place without outgoing arcs");
  if (sinks.size() > 1) add("multiple-sinks", ids(sinks), "more than one place without outgoing arcs");

  std::optional<PlaceIndex> source = sources.size() == 1 ? std::optional{sources[0]} : std::nullopt;
  std::optional<PlaceIndex> sink = sinks.size() == 1 ? std::optional{sinks[0]} : std::nullopt;
  if (source && sink && *source == *sink)
    add("source-equals-sink", {net.place_id(*source)}, "source place equals sink place");
  if (source && wf.initial() != Marking{*source})
    add("initial-marking", {net.place_id(*source)}, "initial marking is not [source]");
  if (sink && wf.final() != Marking{*sink})
    add("final-marking", {net.place_id(*sink)}, "final marking is not [sink]");

  if (source && sink) {
    // Node ids: places [0, P), transitions [P, P+T).
    const std::size_t np = net.place_count(), nt = net.transition_count();
    auto reach = [&](std::size_t start, bool forward) {
      std::vector<bool> seen(np + nt, false);
      std::deque<std::size_t> queue{start};
      seen[start] = true;
      while (!queue.empty()) {
        auto n = queue.front();
        queue.pop_front();
        std::vector<std::size_t> next;
        if (n < np) {
          auto ts = forward ? net.consumers(static_cast<PlaceIndex>(n)) : net.producers(static_cast<PlaceIndex>(n));
          for (auto t : ts) next.push_back(np + t);
        } else {
          const auto& tr = net.transition(static_cast<TransitionIndex>(n - np));
          for (auto p : forward ? tr.post : tr.pre) next.push_back(p);
        }
        for (auto m : next)
          if (!seen[m]) {
            seen[m] = true;
            queue.push_back(m);
          }
      }
      return seen;
    };
    auto from_source = reach(*source, true);
    auto to_sink = reach(*sink, false);
    for (std::size_t n = 0; n < np + nt; ++n) {
      if (from_source[n] && to_sink[n]) continue;
      std::string id = n < np ? net.place_id(static_cast<PlaceIndex>(n))
                              : net.transition(static_cast<TransitionIndex>(n - np)).id;
      std::string why = !from_source[n] ? "unreachable from source" : "cannot reach sink";
      add("not-on-path", {id}, "'" + id + "' is not on a path from source to sink (" + why + ")");
    }
  }
  return report;
}

}  // namespace incalign
