#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "incalign/experiments.hpp"
#include "incalign/stream.hpp"

namespace fs = std::filesystem;
using namespace incalign;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

// Files written by this run; removed again if the run fails.
class OutputGuard {
 public:
  void track_dir(const fs::path& dir) {
    std::error_code ec;
    if (!fs::exists(dir, ec)) {
      fs::create_directories(dir);
      created_dirs_.push_back(dir);
    }
  }

  void write(const fs::path& path, const std::string& content) {
    files_.push_back(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw DataError("failed writing '" + path.string() + "'");
  }

  void rollback() {
    std::error_code ec;
    for (auto& f : files_) fs::remove(f, ec);
    for (auto it = created_dirs_.rbegin(); it != created_dirs_.rend(); ++it) fs::remove_all(*it, ec);
  }

 private:
  std::vector<fs::path> files_;
  std::vector<fs::path> created_dirs_;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string sanitize(std::string s) {
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental prefix-alignment computation over event streams"};
  app.require_subcommand(1);

  std::string model_spec;
  std::vector<std::string> log_specs;
  std::string algorithms = "ias,iasr,occ,occ-w1,occ-w2,occ-w5,occ-w10";
  std::string heuristic = "ilp";
  std::string order = "sequential";
  std::string out_path;
  std::uint64_t seed = 1;
  std::size_t generate_count = 0;
  std::string trace_text;
  std::string algorithm = "ias";
  std::size_t max_len = 8;
  double swap_p = 0, drop_p = 0, insert_p = 0;

  auto* replay = app.add_subcommand("replay", "Replay logs as event streams and write metrics");
  replay->add_option("--model", model_spec, "Net file or bundled model name")->required();
  replay->add_option("--log", log_specs, "Event file or bundled log name (repeatable)");
  replay->add_option("--generate", generate_count, "Also replay a generated log with this many traces");
  replay->add_option("--max-len", max_len, "Maximum generated trace length");
  replay->add_option("--swap", swap_p, "Generator swap probability");
  replay->add_option("--drop", drop_p, "Generator drop probability");
  replay->add_option("--insert", insert_p, "Generator insert probability");
  replay->add_option("--algorithms", algorithms, "Comma-separated algorithm list");
  replay->add_option("--heuristic", heuristic, "lp, ilp or zero");
  replay->add_option("--order", order, "sequential or round-robin");
  replay->add_option("--out", out_path, "Output directory")->required();
  replay->add_option("--seed", seed, "Generator seed");

  auto* align = app.add_subcommand("align", "Align one trace event by event and print the result");
  align->add_option("--model", model_spec, "Net file or bundled model name")->required();
  align->add_option("--trace", trace_text, "Comma-separated activities")->required();
  align->add_option("--algorithm", algorithm, "ias, iasr, occ or occ-wN");
  align->add_option("--heuristic", heuristic, "lp, ilp or zero");

  auto* generate = app.add_subcommand("generate", "Write a synthetic event log");
  generate->add_option("--model", model_spec, "Net file or bundled model name")->required();
  generate->add_option("--traces", generate_count, "Number of traces")->required();
  generate->add_option("--max-len", max_len, "Maximum trace length");
  generate->add_option("--swap", swap_p, "Swap probability");
  generate->add_option("--drop", drop_p, "Drop probability");
  generate->add_option("--insert", insert_p, "Insert probability");
  generate->add_option("--seed", seed, "Random seed");
  generate->add_option("--out", out_path, "Output event file (NDJSON)")->required();

  auto* validate = app.add_subcommand("validate", "Check the structural WF-net conditions");
  validate->add_option("--model", model_spec, "Net file or bundled model name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  OutputGuard guard;
  try {
    if (validate->parsed()) {
      auto model = resolve_model(model_spec);
      auto report = validate_wfnet(*model);
      if (report.ok()) {
        std::cout << "ok: " << model->net().place_count() << " places, " << model->net().transition_count()
                  << " transitions\n";
        return kOk;
      }
      std::cout << report.summary();
      return kData;
    }

    const auto mode = parse_heuristic_mode(heuristic);

    if (align->parsed()) {
      auto model = resolve_model(model_spec);
      StreamEngine engine(model, parse_algorithm(algorithm), mode);
      EventResult last;
      for (const auto& a : split(trace_text, ',')) {
        last = engine.process(Event{"1", a, 0});
        if (last.error) throw DataError("activity rejected: " + *last.error);
        std::cout << "after " << a << ": cost " << last.cost << "\n";
      }
      std::cout << render_table(last.alignment) << "cost: " << last.cost << "\n";
      return kOk;
    }

    if (generate->parsed()) {
      auto model = resolve_model(model_spec);
      auto log = generate_log(*model, generate_count, Noise{swap_p, drop_p, insert_p}, max_len, seed);
      auto parent = fs::path(out_path).parent_path();
      if (!parent.empty()) guard.track_dir(parent);
      guard.write(out_path, log_to_ndjson(log));
      return kOk;
    }

    if (replay->parsed()) {
      auto model = resolve_model(model_spec);
      auto algs = parse_algorithm_list(algorithms);
      auto stream_order = parse_stream_order(order);
      std::vector<NamedLog> logs;
      for (const auto& s : log_specs) logs.push_back(resolve_log(s));
      if (generate_count > 0)
        logs.push_back({"generated-" + std::to_string(seed),
                        generate_log(*model, generate_count, Noise{swap_p, drop_p, insert_p}, max_len, seed)});
      if (logs.empty()) throw CLI::ValidationError("--log", "at least one --log or --generate is required");

      std::vector<SuiteResult> suites;
      for (const auto& l : logs) suites.push_back(run_suite(model, l, algs, mode, stream_order));

      const fs::path out_dir(out_path);
      guard.track_dir(out_dir);
      guard.track_dir(out_dir / "events");
      auto det = build_table(suites, deterministic_columns());
      auto timing = build_table(suites, timing_columns());
      guard.write(out_dir / "metrics.csv", to_csv(det));
      guard.write(out_dir / "metrics.txt", to_text(det));
      guard.write(out_dir / "timing.csv", to_csv(timing));
      for (const auto& s : suites)
        for (const auto& run : s.runs) {
          std::string lines;
          for (const auto& e : run.events) lines += to_json(e).dump() + "\n";
          guard.write(out_dir / "events" / (sanitize(s.log_name) + "." + run.algorithm.name() + ".ndjson"), lines);
        }
      std::cout << to_text(det);
      return kOk;
    }
  } catch (const CLI::ValidationError& e) {
    guard.rollback();
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    guard.rollback();
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const StateSpaceLimit& e) {
    guard.rollback();
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    guard.rollback();
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
