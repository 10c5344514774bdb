// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tinv/value.hpp"

namespace tinv {

inline constexpr int kSchemaVersion = 1;

enum class RecordKind { FuncEntry, FuncExit, VarState };

std::string_view to_string(RecordKind kind);

using MetaVars = std::map<std::string, Value>;

/// One timestamped observation emitted by an instrumented process.
struct TraceRecord {
  RecordKind kind = RecordKind::FuncEntry;
  std::int64_t ts = 0;  // ns, non-decreasing per (pid, tid)
  std::int64_t pid = 0;
  std::int64_t tid = 0;

  // FUNC_ENTRY / FUNC_EXIT
  std::string func;
  std::vector<Value> args;        // entry only
  std::optional<Value> ret;       // exit only
  std::optional<std::string> exc; // exit only

  // VAR_STATE
  std::string var_type;
  std::string var_id;
  std::string attr;
  Value value;

  MetaVars meta;

  /// meta["step"] when it is an integer.
  std::optional<std::int64_t> step() const;
};

/// Header line that opens every trace file.
std::string header_line();

/// Decodes one wire line. `line_no` is used for error reporting only.
TraceRecord parse_record(std::string_view line, std::size_t line_no);

/// Reads a newline-delimited trace. An optional header line may open the
/// stream; blank lines are skipped.
/// Throws MalformedRecord or SchemaVersionMismatch.
std::vector<TraceRecord> parse_trace(std::istream& in);
std::vector<TraceRecord> parse_trace(std::string_view text);

std::string serialize_record(const TraceRecord& rec);
/// Header plus one line per record, each terminated by '\n'.
std::string serialize_trace(std::span<const TraceRecord> records);

/// Identity suffix used to align the same variable across processes:
/// everything after the first '/' of the id, or the whole id.
std::string_view var_id_suffix(std::string_view var_id);

/// One trace file (one process).
struct ProcessTrace {
  std::int64_t pid = 0;
  std::string file;
  std::vector<TraceRecord> records;
};

/// A run is a directory of per-process trace files.
struct Run {
  std::string id;
  std::vector<ProcessTrace> processes;  // sorted by pid

  std::size_t record_count() const;
};

/// Loads every `*.ndjson` file in `dir` (sorted by file name).
Run load_run(const std::filesystem::path& dir);

/// Writes one file per process plus nothing else; returns written paths.
std::vector<std::filesystem::path> write_run(const Run& run, const std::filesystem::path& dir);

/// Merges the processes of a run into a single stream ordered by step
/// window: all step-s records of every process (in pid order) precede any
/// step-(s+1) record. Within one process file order is kept.
std::vector<TraceRecord> merge_by_step(const Run& run);

}  // namespace tinv
