// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include "tinv/trace.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "tinv/error.hpp"

namespace tinv {

namespace fs = std::filesystem;

std::string_view to_string(RecordKind kind) {
  switch (kind) {
    case RecordKind::FuncEntry:
      return "func_entry";
    case RecordKind::FuncExit:
      return "func_exit";
    case RecordKind::VarState:
      return "var_state";
  }
  return "?";
}

std::optional<std::int64_t> TraceRecord::step() const {
  auto it = meta.find("step");
  if (it == meta.end() || it->second.kind() != Value::Kind::Int) return std::nullopt;
  return it->second.as_int();
}

std::string header_line() {
  return json{{"kind", "header"}, {"schema", kSchemaVersion}}.dump();
}

namespace {

std::int64_t required_int(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer())
    throw MalformedRecord(line_no, std::string("missing integer field \"") + key + "\"");
  return it->get<std::int64_t>();
}

std::string required_string(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw MalformedRecord(line_no, std::string("missing string field \"") + key + "\"");
  return it->get<std::string>();
}

}  // namespace

TraceRecord parse_record(std::string_view line, std::size_t line_no) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw MalformedRecord(line_no, "not a JSON object");

  const std::string kind = required_string(j, "kind", line_no);
  TraceRecord rec;
  if (kind == "func_entry") {
    rec.kind = RecordKind::FuncEntry;
  } else if (kind == "func_exit") {
    rec.kind = RecordKind::FuncExit;
  } else if (kind == "var_state") {
    rec.kind = RecordKind::VarState;
  } else {
    throw MalformedRecord(line_no, "unknown record kind \"" + kind + "\"");
  }
  rec.ts = required_int(j, "ts", line_no);
  rec.pid = required_int(j, "pid", line_no);
  rec.tid = required_int(j, "tid", line_no);

  try {
    if (rec.kind == RecordKind::VarState) {
      rec.var_type = required_string(j, "var_type", line_no);
      rec.var_id = required_string(j, "var_id", line_no);
      rec.attr = required_string(j, "attr", line_no);
      if (!j.contains("value")) throw MalformedRecord(line_no, "var_state without \"value\"");
      rec.value = Value::from_json(j["value"]);
    } else {
      rec.func = required_string(j, "func", line_no);
      if (rec.kind == RecordKind::FuncEntry) {
        if (auto it = j.find("args"); it != j.end()) {
          if (!it->is_array()) throw MalformedRecord(line_no, "\"args\" must be an array");
          for (const auto& a : *it) rec.args.push_back(Value::from_json(a));
        }
      } else {
        if (auto it = j.find("ret"); it != j.end()) rec.ret = Value::from_json(*it);
        if (auto it = j.find("exc"); it != j.end() && it->is_string()) rec.exc = it->get<std::string>();
      }
    }
    if (auto it = j.find("meta"); it != j.end()) {
      if (!it->is_object()) throw MalformedRecord(line_no, "\"meta\" must be an object");
      for (const auto& [k, v] : it->items()) rec.meta.emplace(k, Value::from_plain_json(v));
    }
  } catch (const MalformedRecord&) {
    throw;
  } catch (const std::exception& e) {
    throw MalformedRecord(line_no, e.what());
  }
  return rec;
}

std::vector<TraceRecord> parse_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (first) {
      first = false;
      json j = json::parse(line, nullptr, false);
      if (!j.is_discarded() && j.is_object() && j.value("kind", "") == "header") {
        auto it = j.find("schema");
        if (it == j.end() || !it->is_number_integer())
          throw MalformedRecord(line_no, "header without integer \"schema\"");
        if (it->get<int>() != kSchemaVersion) throw SchemaVersionMismatch(it->get<int>());
        continue;
      }
    }
    out.push_back(parse_record(line, line_no));
  }
  return out;
}

std::vector<TraceRecord> parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

std::string serialize_record(const TraceRecord& rec) {
  json j;
  j["kind"] = std::string(to_string(rec.kind));
  j["ts"] = rec.ts;
  j["pid"] = rec.pid;
  j["tid"] = rec.tid;
  if (rec.kind == RecordKind::VarState) {
    j["var_type"] = rec.var_type;
    j["var_id"] = rec.var_id;
    j["attr"] = rec.attr;
    j["value"] = rec.value.to_json();
  } else {
    j["func"] = rec.func;
    if (rec.kind == RecordKind::FuncEntry) {
      json args = json::array();
      for (const auto& a : rec.args) args.push_back(a.to_json());
      j["args"] = std::move(args);
    } else {
      if (rec.ret) j["ret"] = rec.ret->to_json();
      if (rec.exc) j["exc"] = *rec.exc;
    }
  }
  if (!rec.meta.empty()) {
    json meta = json::object();
    for (const auto& [k, v] : rec.meta) meta[k] = v.to_plain_json();
    j["meta"] = std::move(meta);
  }
  return j.dump();
}

std::string serialize_trace(std::span<const TraceRecord> records) {
  std::string out = header_line();
  out += '\n';
  for (const auto& r : records) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

std::string_view var_id_suffix(std::string_view var_id) {
  auto pos = var_id.find('/');
  return pos == std::string_view::npos ? var_id : var_id.substr(pos + 1);
}

std::size_t Run::record_count() const {
  std::size_t n = 0;
  for (const auto& p : processes) n += p.records.size();
  return n;
}

Run load_run(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a trace directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ndjson") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  Run run;
  run.id = fs::weakly_canonical(dir).filename().string();
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw Error("cannot open " + f.string());
    ProcessTrace proc;
    proc.file = f.filename().string();
    try {
      proc.records = parse_trace(in);
    } catch (const MalformedRecord& e) {
      throw MalformedRecord(e.line(), f.filename().string() + ": " + e.what());
    }
    proc.pid = proc.records.empty() ? static_cast<std::int64_t>(run.processes.size())
                                    : proc.records.front().pid;
    run.processes.push_back(std::move(proc));
  }
  std::stable_sort(run.processes.begin(), run.processes.end(),
                   [](const ProcessTrace& a, const ProcessTrace& b) { return a.pid < b.pid; });
  return run;
}

std::vector<fs::path> write_run(const Run& run, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (const auto& proc : run.processes) {
    fs::path p = dir / (proc.file.empty() ? "trace_" + std::to_string(proc.pid) + ".ndjson" : proc.file);
    std::ofstream out(p, std::ios::binary);
    out << serialize_trace(proc.records);
    if (!out) throw Error("cannot write " + p.string());
    written.push_back(p);
  }
  return written;
}

std::vector<TraceRecord> merge_by_step(const Run& run) {
  struct Chunk {
    std::int64_t window;
    std::size_t proc;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Chunk> chunks;
  for (std::size_t p = 0; p < run.processes.size(); ++p) {
    const auto& recs = run.processes[p].records;
    std::int64_t window = 0;
    bool seen = false;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (auto s = recs[i].step()) {
        if (!seen || *s > window) window = seen ? std::max(window, *s) : *s;
        seen = true;
      }
      if (chunks.empty() || chunks.back().proc != p || chunks.back().window != window) {
        chunks.push_back({window, p, i, i + 1});
      } else {
        chunks.back().end = i + 1;
      }
    }
  }
  std::stable_sort(chunks.begin(), chunks.end(),
                   [](const Chunk& a, const Chunk& b) { return a.window < b.window; });
  std::vector<TraceRecord> out;
  out.reserve(run.record_count());
  for (const auto& c : chunks) {
    const auto& recs = run.processes[c.proc].records;
    out.insert(out.end(), recs.begin() + static_cast<std::ptrdiff_t>(c.begin),
               recs.begin() + static_cast<std::ptrdiff_t>(c.end));
  }
  return out;
}

}  // namespace tinv
