// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include "tinv/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "tinv/error.hpp"
#include "tinv/synth.hpp"

namespace tinv {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void require_dir(const std::string& p) {
  if (!std::filesystem::is_directory(p)) throw Error("not a trace directory: " + p);
}

void require_file(const std::string& p) {
  if (!std::filesystem::is_regular_file(p)) throw Error("no such file: " + p);
}

// Writes to `path`, or to `fallback` when the path is empty or "-".
template <typename F>
void emit(const std::string& path, std::ostream& fallback, F&& body) {
  if (path.empty() || path == "-") {
    body(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  body(f);
}

std::string text_line(const ViolationReport& r) {
  return "[step " + std::to_string(r.detection_step) + "] " + r.invariant + " " + r.description;
}

}  // namespace

std::vector<ViolationReport> parse_reports(std::istream& in) {
  std::vector<ViolationReport> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw MalformedRecord(n, e.what());
    }
    if (j.contains("summary") && !j.contains("invariant")) continue;
    out.push_back(report_from_json(j));
  }
  return out;
}

std::string render_report(const std::vector<ViolationReport>& reports) {
  if (reports.empty()) return "no violations\n";
  struct Group {
    std::string relation;
    std::string label;
    std::size_t count = 0;
    std::int64_t first = 0;
  };
  std::map<std::string, Group> by_inv;
  std::map<std::string, std::size_t> by_target;
  for (const auto& r : reports) {
    auto [it, fresh] = by_inv.try_emplace(r.invariant);
    Group& g = it->second;
    if (fresh) {
      g.relation = r.relation;
      for (std::size_t i = 0; i < r.descriptors.size(); ++i) {
        g.label += (i ? ", " : "") + descriptor_name(r.descriptors[i]);
      }
      g.first = r.detection_step;
    }
    ++g.count;
    g.first = std::min(g.first, r.detection_step);
    std::set<std::string> names;
    for (const auto& d : r.descriptors) names.insert(descriptor_name(d));
    for (const auto& n : names) ++by_target[n];
  }
  std::ostringstream out;
  out << reports.size() << " violation report" << (reports.size() == 1 ? "" : "s") << " from " << by_inv.size()
      << " invariant" << (by_inv.size() == 1 ? "" : "s") << "\n\nby invariant:\n";
  for (const auto& [id, g] : by_inv) {
    out << "  " << id << "  " << g.relation << "(" << g.label << ")  reports=" << g.count
        << "  first_detection_step=" << g.first << "\n";
  }
  out << "\nby API/variable:\n";
  std::vector<std::pair<std::size_t, std::string>> targets;
  for (const auto& [n, c] : by_target) targets.emplace_back(c, n);
  std::stable_sort(targets.begin(), targets.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [c, n] : targets) out << "  " << n << "  " << c << "\n";
  return out.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Infer training invariants from execution traces and check new traces against them", "tinv"};
  app.require_subcommand(1);
  int schema = kSchemaVersion;
  app.add_option("--schema", schema, "Trace/invariant schema version")->default_val(kSchemaVersion);
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--jobs,-j", jobs, "Worker threads");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic training-run trace");
  RunConfig cfg;
  std::string fault;
  std::string gen_out;
  gen->add_option("--dp", cfg.dp_ranks, "Data-parallel ranks")->default_val(cfg.dp_ranks);
  gen->add_option("--tp", cfg.tp_ranks, "Tensor-parallel ranks")->default_val(cfg.tp_ranks);
  gen->add_option("--params", cfg.n_params, "Parameters per rank")->default_val(cfg.n_params);
  gen->add_option("--replicated-fraction", cfg.replicated_fraction, "Share of replicated parameters")
      ->default_val(cfg.replicated_fraction);
  gen->add_option("--steps", cfg.n_steps, "Training steps")->default_val(cfg.n_steps);
  gen->add_option("--seed", cfg.seed, "Seed")->default_val(cfg.seed);
  gen->add_option("--fault", fault, "Fault to inject, KIND@STEP");
  gen->add_option("--run-id", cfg.run_id, "Run id recorded in the manifest");
  gen->add_option("--out", gen_out, "Output directory")->required();
  bool list_faults = false;
  auto* faults = app.add_subcommand("faults", "Print the fault catalog");
  faults->callback([&] { list_faults = true; });

  // infer
  auto* infer_cmd = app.add_subcommand("infer", "Infer invariants from trace directories");
  std::vector<std::string> trace_dirs;
  std::string relations;
  std::string inv_out;
  std::optional<std::size_t> cap;
  InferOptions iopts;
  std::string strategy = "augment";
  infer_cmd->add_option("traces", trace_dirs, "Trace directories")->required();
  infer_cmd->add_option("--relations", relations, "Comma-separated relation names (default: all)");
  infer_cmd->add_option("--out,-o", inv_out, "Invariant file (default: stdout)");
  infer_cmd->add_option("--cap", cap, "Keep at most N invariants");
  infer_cmd->add_option("--max-examples", iopts.max_examples, "Stored examples per hypothesis")
      ->default_val(iopts.max_examples);
  infer_cmd->add_option("--max-hypotheses", iopts.max_hypotheses, "Hypotheses per relation")
      ->default_val(iopts.max_hypotheses);
  infer_cmd->add_option("--budget", iopts.deduce.budget, "Safety checks per precondition")
      ->default_val(iopts.deduce.budget);
  infer_cmd->add_option("--strategy", strategy, "Precondition strategy")
      ->check(CLI::IsMember({"augment", "split"}))
      ->default_val(strategy);

  // check
  auto* check_cmd = app.add_subcommand("check", "Check a trace against invariants");
  std::string inv_path;
  std::string trace_src;
  std::string report_out;
  std::string format = "ndjson";
  std::string mode = "batch";
  std::string manifest_out;
  check_cmd->add_option("--invariants,-i", inv_path, "Invariant file")->required();
  check_cmd->add_option("trace", trace_src, "Trace directory, or - for a record stream on stdin")->required();
  check_cmd->add_option("--out,-o", report_out, "Report file (default: stdout)");
  check_cmd->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"text", "ndjson"}))
      ->default_val(format);
  check_cmd->add_option("--mode", mode, "online emits reports as units close")
      ->check(CLI::IsMember({"online", "batch"}))
      ->default_val(mode);

  // report
  auto* report_cmd = app.add_subcommand("report", "Summarize a report file");
  std::string report_in;
  report_cmd->add_option("reports", report_in, "ndjson report file")->required();

  // manifest
  auto* manifest_cmd = app.add_subcommand("manifest", "Print what a tracer must emit for some invariants");
  std::string manifest_inv;
  manifest_cmd->add_option("invariants", manifest_inv, "Invariant file")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "tinv: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (schema != kSchemaVersion) throw SchemaVersionMismatch(schema);

    if (list_faults) {
      out << faults_to_json(describe_faults()).dump(2) << "\n";
      return kExitOk;
    }

    if (gen->parsed()) {
      if (!fault.empty()) cfg.fault = parse_fault(fault);
      cfg.validate();
      const Run run = generate(cfg);
      write_generated(run, cfg, gen_out);
      err << "wrote " << run.record_count() << " records for " << run.processes.size() << " processes to "
          << gen_out << "\n";
      return kExitOk;
    }

    if (infer_cmd->parsed()) {
      for (const auto& d : trace_dirs) require_dir(d);
      iopts.relations = split_list(relations);
      for (const auto& r : iopts.relations) RelationRegistry::builtin().get(r);
      iopts.deduce.strategy = strategy == "split" ? DeduceStrategy::Split : DeduceStrategy::Augment;
      iopts.jobs = jobs;
      std::vector<Run> runs;
      for (const auto& d : trace_dirs) runs.push_back(load_run(d));
      InvariantSet set = infer(runs, iopts);
      if (cap) set = cap_invariants(std::move(set), *cap);
      for (const auto& w : set.warnings) err << "warning: " << w << "\n";
      emit(inv_out, out, [&](std::ostream& o) { o << dump_invariants(set); });
      return kExitOk;
    }

    if (check_cmd->parsed()) {
      require_file(inv_path);
      if (trace_src != "-") require_dir(trace_src);
      const InvariantSet set = read_invariants(inv_path);
      const CheckMode m = mode == "online" ? CheckMode::Online : CheckMode::Batch;
      std::size_t count = 0;
      CheckSummary summary;
      emit(report_out, out, [&](std::ostream& o) {
        auto write = [&](const ViolationReport& r) {
          ++count;
          if (format == "ndjson") {
            o << report_to_json(r).dump() << "\n";
          } else {
            o << text_line(r) << "\n";
          }
        };
        if (m == CheckMode::Online && trace_src == "-") {
          // Records are checked as they arrive.
          Verifier v(set.invariants);
          std::string line;
          std::size_t n = 0;
          bool first = true;
          while (std::getline(std::cin, line)) {
            ++n;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            if (first) {
              first = false;
              json j = json::parse(line, nullptr, false);
              if (j.is_object() && j.value("kind", "") == "header") {
                if (j.value("schema", -1) != kSchemaVersion) throw SchemaVersionMismatch(j.value("schema", -1));
                continue;
              }
            }
            v.feed(parse_record(line, n), write);
            o.flush();
          }
          v.finish(write);
          summary = v.summary();
        } else {
          std::vector<ViolationReport> reports;
          if (trace_src == "-") {
            const auto records = parse_trace(std::cin);
            reports = check_stream(set.invariants, records, m, &summary);
          } else {
            const Run run = load_run(trace_src);
            if (m == CheckMode::Online) {
              std::set<std::int64_t> pids;
              for (const auto& p : run.processes) pids.insert(p.pid);
              reports = check_stream(set.invariants, merge_by_step(run), m, &summary, pids);
            } else {
              reports = check_run(set.invariants, run, &summary);
            }
          }
          for (const auto& r : reports) write(r);
        }
        if (format == "ndjson") {
          o << summary_to_json(summary).dump() << "\n";
        } else {
          o << (count ? std::to_string(count) + " violation report(s)" : std::string("no violations")) << ", "
            << summary.records << " records checked\n";
        }
      });
      for (const auto& w : summary.warnings) err << "warning: " << w << "\n";
      return count ? kExitViolations : kExitOk;
    }

    if (report_cmd->parsed()) {
      require_file(report_in);
      std::ifstream in(report_in, std::ios::binary);
      out << render_report(parse_reports(in));
      return kExitOk;
    }

    if (manifest_cmd->parsed()) {
      require_file(manifest_inv);
      const InvariantSet set = read_invariants(manifest_inv);
      out << manifest_to_json(required_descriptors(set.invariants)).dump(2) << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "tinv: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace tinv
