// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tinv/descriptor.hpp"
#include "tinv/events.hpp"

namespace tinv {

/// Flattened fields of one record as seen by precondition conditions:
/// `meta_vars.<key>` for meta variables, `args.<i>` (plus `.shape`/`.dtype`
/// for digests) for API arguments, and the tracked attributes of a variable.
using FieldView = std::map<std::string, Value>;

FieldView entry_view(const TraceRecord& entry);

/// A closed API span.
struct SpanUnit {
  std::int64_t step = 0;
  std::int64_t pid = 0;
  std::int64_t tid = 0;
  std::string func;
  std::vector<Value> args;
  std::optional<Value> ret;
  FieldView view;
  std::vector<ChildKey> descendants;
  MetaVars meta;
};

/// The API calls one thread made during one step, in first-occurrence order.
struct WindowUnit {
  std::int64_t step = 0;
  std::int64_t pid = 0;
  std::int64_t tid = 0;
  std::vector<std::string> first_calls;
  FieldView view;
  MetaVars meta;
};

struct VarObservation {
  std::string var_id;
  std::int64_t pid = 0;
  Value value;
  FieldView view;
  MetaVars meta;
};

struct CallObservation {
  std::int64_t pid = 0;
  std::int64_t tid = 0;
  std::vector<Value> args;
  FieldView view;
  MetaVars meta;
};

/// Everything observed across all processes during one step: the last
/// state of every (var_type, attr) per variable, grouped by var-id suffix,
/// and every API entry grouped by name.
struct StepUnit {
  std::int64_t step = 0;
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::vector<VarObservation>>> vars;
  std::map<std::string, std::vector<CallObservation>> calls;
};

using Unit = std::variant<SpanUnit, WindowUnit, StepUnit>;

std::int64_t unit_step(const Unit& u);

/// Turns an ordered record stream into checkable units as soon as each is
/// complete. A step closes once every known process has moved past it, or
/// once any process is two steps ahead (stragglers do not block checking).
class UnitScanner {
 public:
  using Sink = std::function<void(Unit&&)>;

  explicit UnitScanner(std::set<std::int64_t> expected_pids = {});

  void feed(const TraceRecord& rec, const Sink& emit);
  void finish(const Sink& emit);

  /// Highest step any process has reached.
  std::int64_t progress() const { return max_step_; }

  /// Spans still open at finish().
  const std::vector<std::string>& incomplete() const { return incomplete_; }

 private:
  struct ThreadWindow {
    std::int64_t step = 0;
    std::vector<std::string> first_calls;
    std::set<std::string> seen;
    FieldView view;
    MetaVars meta;
  };

  std::int64_t window_of(const TraceRecord& rec);
  void close_window(std::pair<std::int64_t, std::int64_t> key, const Sink& emit);
  void close_ready_steps(const Sink& emit, bool all);
  StepUnit& step_unit(std::int64_t step);

  EventBuilder events_;
  std::set<std::int64_t> pids_;
  std::map<std::int64_t, std::int64_t> process_step_;
  std::int64_t max_step_ = 0;
  std::map<std::int64_t, StepUnit> pending_;
  std::map<std::pair<std::int64_t, std::int64_t>, ThreadWindow> windows_;
  std::map<std::pair<std::int64_t, std::string>, std::map<std::string, Value>> var_state_;
  std::vector<std::string> incomplete_;
};

std::vector<Unit> scan_records(std::span<const TraceRecord> records,
                               std::set<std::int64_t> expected_pids = {});

/// Scans a run in step-merged order.
std::vector<Unit> scan_run(const Run& run);

}  // namespace tinv
