// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tinv/infer.hpp"
#include "tinv/scan.hpp"

namespace tinv {

struct ViolationReport {
  std::string invariant;  // id
  std::string relation;
  std::string description;
  std::vector<Descriptor> descriptors;
  std::size_t clause = 0;  // satisfied precondition clause
  std::int64_t step = 0;   // step of the offending unit
  std::int64_t detection_step = 0;
  std::string unit_key;
  MetaVars meta;  // of the first record in the example
  Example example;
};

json report_to_json(const ViolationReport& r);
ViolationReport report_from_json(const json& j);

enum class CheckMode { Online, Batch };

struct CheckSummary {
  std::map<std::string, std::size_t> occurrences;  // invariant id -> raw failing examples
  std::size_t reports = 0;
  std::size_t records = 0;
  std::vector<std::string> warnings;  // IncompleteStreamWarning and the like
};

json summary_to_json(const CheckSummary& s);

/// Streams records through deployed invariants. Each complete unit is
/// checked when it closes: precondition first, then relation semantics.
/// Reports are deduplicated per (invariant, step, unit); every failing
/// example is still counted in the summary.
class Verifier {
 public:
  using Sink = std::function<void(const ViolationReport&)>;

  explicit Verifier(std::vector<Invariant> invariants, std::set<std::int64_t> expected_pids = {});

  void feed(const TraceRecord& rec, const Sink& sink);
  void finish(const Sink& sink);

  const CheckSummary& summary() const { return summary_; }

 private:
  void check(const Unit& unit, const Sink& sink);

  std::vector<Invariant> invariants_;
  std::map<std::string, std::vector<std::size_t>> by_relation_;
  UnitScanner scanner_;
  std::int64_t progress_ = 0;
  std::set<std::tuple<std::string, std::int64_t, std::string>> reported_;
  CheckSummary summary_;
  bool finished_ = false;
};

/// Checks a whole record stream. Batch mode reads the stream as given;
/// online mode does the same feed-by-feed and is provided for callers that
/// want identical semantics without holding a run in memory.
std::vector<ViolationReport> check_stream(std::span<const Invariant> invariants, std::span<const TraceRecord> records,
                                          CheckMode mode = CheckMode::Batch, CheckSummary* summary = nullptr,
                                          std::set<std::int64_t> expected_pids = {});

/// Checks a run in step-merged order.
std::vector<ViolationReport> check_run(std::span<const Invariant> invariants, const Run& run,
                                       CheckSummary* summary = nullptr);

/// What a tracer must emit for `invariants` to be checkable.
struct SelectionManifest {
  std::set<std::string> apis;
  std::set<std::pair<std::string, std::string>> vars;  // (var_type, attr)
  std::set<std::string> meta_keys;
  std::set<std::string> fields;

  friend bool operator==(const SelectionManifest&, const SelectionManifest&) = default;
};

SelectionManifest required_descriptors(std::span<const Invariant> invariants);
json manifest_to_json(const SelectionManifest& m);
SelectionManifest manifest_from_json(const json& j);

}  // namespace tinv
