// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>

#include "tinv/trace.hpp"

namespace tinv {

/// Selects API entry/exit records by name, optionally constraining
/// positional arguments (keyed by decimal position) and the return value.
struct APIDescriptor {
  std::string func;
  std::map<std::string, Value> arg_constraints;
  std::optional<Value> return_constraint;

  friend auto operator<=>(const APIDescriptor&, const APIDescriptor&) = default;
  friend bool operator==(const APIDescriptor&, const APIDescriptor&) = default;
};

/// Selects variable states by (type, attribute), optionally requiring a value.
struct VariableDescriptor {
  std::string var_type;
  std::string attr;
  std::optional<Value> value_constraint;

  friend auto operator<=>(const VariableDescriptor&, const VariableDescriptor&) = default;
  friend bool operator==(const VariableDescriptor&, const VariableDescriptor&) = default;
};

using Descriptor = std::variant<APIDescriptor, VariableDescriptor>;

/// A child event of an API span, reduced to what child descriptors match on.
struct ChildKey {
  bool is_call = false;
  std::string name;  // func for calls, var_type for changes
  std::string attr;  // changes only
  Value value;       // new value for changes

  friend auto operator<=>(const ChildKey&, const ChildKey&) = default;
  friend bool operator==(const ChildKey&, const ChildKey&) = default;
};

bool matches(const APIDescriptor& d, const TraceRecord& rec);
bool matches(const VariableDescriptor& d, const TraceRecord& rec);
bool matches(const Descriptor& d, const TraceRecord& rec);
bool matches(const Descriptor& d, const ChildKey& child);

/// "torch.optim.Optimizer.step" or "torch.nn.Parameter.data".
std::string descriptor_name(const Descriptor& d);

json descriptor_to_json(const Descriptor& d);
Descriptor descriptor_from_json(const json& j);

}  // namespace tinv
