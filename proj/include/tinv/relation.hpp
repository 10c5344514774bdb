// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tinv/descriptor.hpp"
#include "tinv/scan.hpp"

namespace tinv {

enum class Verdict { Passing, Failing };

/// A group of records a relation examined together, with the data its
/// verdict depends on. Which payload fields are set depends on the relation.
struct Example {
  std::vector<FieldView> records;
  std::vector<Value> values;           // Consistent, APIArg, APIOutput
  std::vector<std::string> sequence;   // APISequence: first-occurrence order
  std::vector<ChildKey> children;      // EventContain: span descendants
  std::int64_t step = 0;
  std::string unit_key;                // groups reports within a step
  std::vector<std::int64_t> pids;
  Verdict verdict = Verdict::Passing;
};

enum class BoundType { EqualsInputAttr, ConstantAttr };

std::string_view to_string(BoundType b);

struct RelationParams {
  std::optional<bool> is_distinct;
  std::optional<int> arg_index;
  std::optional<BoundType> bound;
  std::optional<std::string> attr;
  std::optional<Value> constant;

  friend auto operator<=>(const RelationParams&, const RelationParams&) = default;
  friend bool operator==(const RelationParams&, const RelationParams&) = default;
};

/// A relation template instantiated with descriptors.
struct HypothesisCore {
  std::string relation;
  RelationParams params;
  std::vector<Descriptor> descriptors;

  friend auto operator<=>(const HypothesisCore&, const HypothesisCore&) = default;
  friend bool operator==(const HypothesisCore&, const HypothesisCore&) = default;
};

json params_to_json(const RelationParams& p);
RelationParams params_from_json(const json& j);

/// Fields a relation forbids as precondition conditions. A listed name
/// blocks itself and every `name.`-prefixed field.
struct Blocklist {
  std::vector<std::string> fields;
  bool digest_fields = false;

  bool blocks(const std::string& field, const Value& value) const;
};

struct GenOptions {
  std::set<std::string> api_blocklist;
  std::size_t max_sequence_window = 16;  // longer windows only seed pairs
  std::size_t max_constant_values = 4;   // APIOutput CONSTANT_ATTR seeds per attr
};

/// The relation interface. Implementations are stateless.
class Relation {
 public:
  virtual ~Relation() = default;

  virtual std::string_view name() const = 0;

  /// Throws ArityMismatch when descriptors or params do not fit the relation.
  virtual void validate(const HypothesisCore& h) const = 0;

  virtual void generate(std::span<const Unit> units, const GenOptions& opts,
                        std::set<HypothesisCore>& out) const = 0;

  /// Emits every example `unit` offers for `h`, verdicts filled in.
  virtual void examples(const HypothesisCore& h, const Unit& unit,
                        const std::function<void(Example&&)>& sink) const = 0;

  virtual Verdict evaluate(const HypothesisCore& h, const Example& e) const = 0;

  /// The examples tell the relation which kinds of values it compares.
  virtual Blocklist blocklist(const HypothesisCore& h, std::span<const Example> passing,
                              std::span<const Example> failing) const;

  virtual std::string describe(const HypothesisCore& h) const;
};

/// Relations keyed by name. `builtin()` holds the five stock relations and
/// accepts additional registrations.
class RelationRegistry {
 public:
  static RelationRegistry& builtin();

  void add(std::unique_ptr<Relation> rel);
  const Relation* find(std::string_view name) const;
  const Relation& get(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::vector<std::unique_ptr<Relation>> relations_;
};

std::unique_ptr<Relation> make_consistent_relation();
std::unique_ptr<Relation> make_event_contain_relation();
std::unique_ptr<Relation> make_api_sequence_relation();
std::unique_ptr<Relation> make_api_arg_relation();
std::unique_ptr<Relation> make_api_output_relation();

/// Verdict of the hypothesis's relation on an example (built-in registry).
Verdict relation_semantics(const HypothesisCore& h, const Example& e);

bool match_descriptor(const Descriptor& d, const TraceRecord& rec);

}  // namespace tinv
