// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tinv/relation.hpp"

namespace tinv {

enum class ConditionType { Constant, Consistent, Unequal, Exist };

std::string_view to_string(ConditionType t);
ConditionType condition_type_from_string(std::string_view s);

/// A predicate over the records of one example.
///   CONSTANT    every record has the field and it equals `value`
///   CONSISTENT  every record has the field and all are identical
///   UNEQUAL     the present values include at least two distinct ones
///   EXIST       every record has the field
struct Condition {
  ConditionType type = ConditionType::Exist;
  std::string field;
  std::optional<Value> value;  // CONSTANT only

  friend auto operator<=>(const Condition&, const Condition&) = default;
  friend bool operator==(const Condition&, const Condition&) = default;
};

using Clause = std::vector<Condition>;

bool holds(const Condition& c, std::span<const FieldView> records);
bool holds(const Clause& c, std::span<const FieldView> records);

/// Every condition that is true of `records`, minus blocked fields.
/// CONSTANT conditions are produced for plain values only. Sorted.
std::vector<Condition> conditions_of(std::span<const FieldView> records, const Blocklist& blocked = {});

/// Disjunction of conjunctions. A single empty clause is the trivially
/// true precondition.
struct Precondition {
  std::vector<Clause> clauses;

  static Precondition always() { return Precondition{{Clause{}}}; }
  bool trivially_true() const;

  /// Index of the first satisfied clause.
  std::optional<std::size_t> satisfied_clause(std::span<const FieldView> records) const;
  bool holds(std::span<const FieldView> records) const { return satisfied_clause(records).has_value(); }

  std::string describe() const;

  friend bool operator==(const Precondition&, const Precondition&) = default;
};

json precondition_to_json(const Precondition& p);
Precondition precondition_from_json(const json& j);

enum class DeduceStrategy { Augment, Split };

struct DeduceOptions {
  DeduceStrategy strategy = DeduceStrategy::Augment;
  std::size_t budget = 1000;  // clause safety checks before giving up
};

/// Finds a precondition true on every passing example and false on every
/// failing one, or nothing when no such formula over the available
/// conditions exists (or the budget runs out).
std::optional<Precondition> deduce(std::span<const Example> passing, std::span<const Example> failing,
                                   const Blocklist& blocked = {}, const DeduceOptions& opts = {});

/// Drops conditions true on every failing example; such conditions never
/// decide a verdict. Safety is preserved. Duplicate clauses are removed.
Precondition prune(Precondition p, std::span<const Example> failing);

/// True when failing examples exist and no separating precondition does.
bool is_superficial(std::span<const Example> passing, std::span<const Example> failing,
                    const Blocklist& blocked = {}, const DeduceOptions& opts = {});

}  // namespace tinv
