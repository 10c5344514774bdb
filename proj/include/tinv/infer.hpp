// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tinv/precondition.hpp"
#include "tinv/relation.hpp"

namespace tinv {

inline constexpr std::string_view kEngineVersion = "tinv 0.1.0";

/// A hypothesis with the evidence gathered for it so far. Example lists are
/// reservoir samples; the counts are exact.
struct Hypothesis {
  HypothesisCore core;
  std::vector<Example> passing;
  std::vector<Example> failing;
  std::size_t passing_count = 0;
  std::size_t failing_count = 0;
  std::vector<std::string> source_traces;
};

struct Invariant {
  std::string id;
  HypothesisCore core;
  Precondition precondition;
  std::size_t passing = 0;
  std::size_t failing = 0;
  std::vector<std::string> runs;
  std::string engine{kEngineVersion};
};

struct InvariantSet {
  std::vector<Invariant> invariants;
  std::vector<std::string> warnings;
  bool partial = false;
};

/// First 16 hex chars of the SHA-256 of the canonical {relation, params,
/// descriptors} document.
std::string hypothesis_id(const HypothesisCore& h);

json invariant_to_json(const Invariant& inv);
Invariant invariant_from_json(const json& j);
json invariant_set_to_json(const InvariantSet& set);
InvariantSet invariant_set_from_json(const json& j);

/// Pretty-printed, key-sorted, newline-terminated.
std::string dump_invariants(const InvariantSet& set);
InvariantSet parse_invariants(std::string_view text);
void write_invariants(const InvariantSet& set, const std::filesystem::path& path);
InvariantSet read_invariants(const std::filesystem::path& path);

/// Probe-style APIs that carry no training semantics.
std::set<std::string> default_api_blocklist();

struct InferOptions {
  std::vector<std::string> relations;  // empty: every registered relation
  GenOptions gen{default_api_blocklist()};
  std::size_t max_examples = 10000;    // stored per hypothesis (passing + failing)
  std::size_t max_hypotheses = 5000;   // per relation
  DeduceOptions deduce;
  unsigned jobs = 1;
};

/// Reservoir-samples examples of `h` found in `units` (one run) into `h`.
void collect_examples(Hypothesis& h, std::span<const Unit> units, const std::string& run_id,
                      std::size_t max_examples);

/// Infers invariants from parsed runs. Output order and content depend only
/// on the inputs and options, never on `jobs`.
InvariantSet infer(std::span<const Run> runs, const InferOptions& opts = {});

/// Keeps the `cap` highest-priority invariants: relation registration order,
/// then more descriptor constraints, then more passing examples, then id.
InvariantSet cap_invariants(InvariantSet set, std::size_t cap);

/// Sorts by relation name, then descriptors, then params.
void sort_invariants(std::vector<Invariant>& invs);

}  // namespace tinv
