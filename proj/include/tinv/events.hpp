// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "tinv/trace.hpp"

namespace tinv {

struct EventRef {
  enum class Kind { Call, Change };
  Kind kind;
  std::size_t index;  // into EventLog::calls or EventLog::changes
};

/// A complete (or, at stream end, still open) API invocation.
struct APICallEvent {
  std::string func;
  std::int64_t pid = 0;
  std::int64_t tid = 0;
  TraceRecord entry;
  std::optional<TraceRecord> exit;
  std::int64_t duration = 0;
  std::vector<EventRef> children;  // direct children, in time order
  bool incomplete = false;
  const MetaVars& meta() const { return entry.meta; }
};

/// A change of one attribute of one tracked variable. `old_value` is absent
/// only for the first observation of (pid, var_id, attr).
struct VarChangeEvent {
  std::string var_type;
  std::string var_id;
  std::string attr;
  std::optional<Value> old_value;
  Value new_value;
  std::int64_t ts = 0;
  std::int64_t pid = 0;
  std::int64_t tid = 0;
  MetaVars meta;
};

struct EventLog {
  std::vector<APICallEvent> calls;
  std::vector<VarChangeEvent> changes;
  std::vector<EventRef> roots;  // events not nested in any span

  /// All events nested (transitively) under `calls[index]`.
  std::vector<EventRef> descendants(std::size_t index) const;
};

/// Incremental event reconstruction. Feed records in per-thread order;
/// callers that need streaming results can inspect the log after each feed.
class EventBuilder {
 public:
  /// Returns the index of the call closed by this record, if any.
  std::optional<std::size_t> feed(const TraceRecord& rec);
  /// Marks spans still open as incomplete.
  void finish();

  const EventLog& log() const { return log_; }
  EventLog take() { return std::move(log_); }

 private:
  void attach(std::int64_t pid, std::int64_t tid, EventRef ref);

  EventLog log_;
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> stacks_;
  std::map<std::tuple<std::int64_t, std::string, std::string>, Value> last_;
};

/// Pairs entries and exits per (pid, tid) under stack discipline and turns
/// VAR_STATE records into change events. Throws ExitWithoutEntry.
EventLog reconstruct_events(std::span<const TraceRecord> records);

}  // namespace tinv
