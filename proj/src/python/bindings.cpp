// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

// Python bindings. Structured data crosses the boundary as JSON text; the
// pure-Python package turns it into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tinv/cli.hpp"
#include "tinv/digest.hpp"
#include "tinv/error.hpp"
#include "tinv/infer.hpp"
#include "tinv/synth.hpp"
#include "tinv/verifier.hpp"

namespace py = pybind11;
using namespace tinv;

namespace {

std::string digest(const std::string& dtype, const std::vector<std::int64_t>& shape, const py::bytes& data) {
  const std::string_view raw = data;
  return tensor_digest(dtype, shape, {reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()});
}

std::size_t gen(const std::string& out_dir, int dp, int tp, int params, double replicated_fraction, int steps,
                std::uint64_t seed, const std::optional<std::string>& fault, const std::string& run_id) {
  RunConfig cfg;
  cfg.dp_ranks = dp;
  cfg.tp_ranks = tp;
  cfg.n_params = params;
  cfg.replicated_fraction = replicated_fraction;
  cfg.n_steps = steps;
  cfg.seed = seed;
  cfg.run_id = run_id;
  if (fault) cfg.fault = parse_fault(*fault);
  py::gil_scoped_release release;
  const Run run = generate(cfg);
  write_generated(run, cfg, out_dir);
  return run.record_count();
}

std::string infer_dirs(const std::vector<std::string>& dirs, const std::vector<std::string>& relations,
                       std::size_t max_examples, std::size_t max_hypotheses, std::size_t budget, unsigned jobs,
                       std::optional<std::size_t> cap) {
  InferOptions opts;
  opts.relations = relations;
  opts.max_examples = max_examples;
  opts.max_hypotheses = max_hypotheses;
  opts.deduce.budget = budget;
  opts.jobs = jobs;
  py::gil_scoped_release release;
  std::vector<Run> runs;
  for (const auto& d : dirs) runs.push_back(load_run(d));
  InvariantSet set = infer(runs, opts);
  if (cap) set = cap_invariants(std::move(set), *cap);
  return dump_invariants(set);
}

std::pair<std::vector<std::string>, std::string> to_text(const std::vector<ViolationReport>& reports,
                                                         const CheckSummary& summary) {
  std::vector<std::string> out;
  for (const auto& r : reports) out.push_back(report_to_json(r).dump());
  return {out, summary_to_json(summary).dump()};
}

std::pair<std::vector<std::string>, std::string> check_dir(const std::string& invariants, const std::string& dir,
                                                           const std::string& mode) {
  if (mode != "batch" && mode != "online") throw InvalidConfig("mode must be batch or online");
  py::gil_scoped_release release;
  const InvariantSet set = parse_invariants(invariants);
  const Run run = load_run(dir);
  CheckSummary summary;
  std::vector<ViolationReport> reports;
  if (mode == "online") {
    std::set<std::int64_t> pids;
    for (const auto& p : run.processes) pids.insert(p.pid);
    reports = check_stream(set.invariants, merge_by_step(run), CheckMode::Online, &summary, pids);
  } else {
    reports = check_run(set.invariants, run, &summary);
  }
  return to_text(reports, summary);
}

std::pair<std::vector<std::string>, std::string> check_text(const std::string& invariants, const std::string& records) {
  py::gil_scoped_release release;
  const InvariantSet set = parse_invariants(invariants);
  const auto recs = parse_trace(std::string_view(records));
  CheckSummary summary;
  const auto reports = check_stream(set.invariants, recs, CheckMode::Batch, &summary);
  return to_text(reports, summary);
}

std::string manifest(const std::string& invariants) {
  return manifest_to_json(required_descriptors(parse_invariants(invariants).invariants)).dump();
}

std::tuple<int, std::string, std::string> cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = run_cli(args, out, err);
  }
  return {code, out.str(), err.str()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Training-invariant inference and checking";
  m.attr("ENGINE_VERSION") = std::string(kEngineVersion);
  m.attr("SCHEMA_VERSION") = kSchemaVersion;
  m.attr("DIGEST_HEX_LENGTH") = kDigestHexLength;

  // Later registrations are tried first, so subclasses go last.
  auto& error = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<MalformedRecord>(m, "MalformedRecord", error.ptr());
  py::register_exception<SchemaVersionMismatch>(m, "SchemaVersionMismatch", error.ptr());
  py::register_exception<InvalidConfig>(m, "InvalidConfig", error.ptr());

  m.def("tensor_digest", &digest, py::arg("dtype"), py::arg("shape"), py::arg("data"),
        "Content digest of a tensor: dtype, shape and raw bytes");
  m.def("generate", &gen, py::arg("out_dir"), py::arg("dp") = 2, py::arg("tp") = 2, py::arg("params") = 8,
        py::arg("replicated_fraction") = 0.25, py::arg("steps") = 5, py::arg("seed") = 0,
        py::arg("fault") = py::none(), py::arg("run_id") = "",
        "Writes a synthetic run to out_dir and returns its record count");
  m.def("infer", &infer_dirs, py::arg("trace_dirs"), py::arg("relations") = std::vector<std::string>{},
        py::arg("max_examples") = 10000, py::arg("max_hypotheses") = 5000, py::arg("budget") = 1000,
        py::arg("jobs") = 1, py::arg("cap") = py::none(), "Infers invariants; returns the invariant file text");
  m.def("check", &check_dir, py::arg("invariants"), py::arg("trace_dir"), py::arg("mode") = "batch",
        "Checks a run directory; returns (report lines, summary line)");
  m.def("check_records", &check_text, py::arg("invariants"), py::arg("records"),
        "Checks newline-delimited trace records; returns (report lines, summary line)");
  m.def("required_descriptors", &manifest, py::arg("invariants"),
        "What a tracer must record for the given invariants (JSON text)");
  m.def("validate_trace", [](const std::string& text) { return parse_trace(std::string_view(text)).size(); },
        py::arg("text"), "Parses trace text and returns the record count");
  m.def("faults", [] { return faults_to_json(describe_faults()).dump(); }, "The fault catalog (JSON text)");
  m.def("run_cli", &cli, py::arg("args"), "Runs the command-line interface; returns (exit code, stdout, stderr)");
}
