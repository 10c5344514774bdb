// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include "tinv/descriptor.hpp"

#include "tinv/error.hpp"

namespace tinv {

bool matches(const APIDescriptor& d, const TraceRecord& rec) {
  if (rec.kind == RecordKind::VarState || rec.func != d.func) return false;
  if (rec.kind == RecordKind::FuncEntry) {
    for (const auto& [pos, expected] : d.arg_constraints) {
      std::size_t i = std::stoul(pos);
      if (i >= rec.args.size() || rec.args[i] != expected) return false;
    }
  } else if (d.return_constraint) {
    if (!rec.ret || *rec.ret != *d.return_constraint) return false;
  }
  return true;
}

bool matches(const VariableDescriptor& d, const TraceRecord& rec) {
  if (rec.kind != RecordKind::VarState) return false;
  if (rec.var_type != d.var_type || rec.attr != d.attr) return false;
  return !d.value_constraint || rec.value == *d.value_constraint;
}

bool matches(const Descriptor& d, const TraceRecord& rec) {
  return std::visit([&](const auto& x) { return matches(x, rec); }, d);
}

bool matches(const Descriptor& d, const ChildKey& child) {
  if (const auto* api = std::get_if<APIDescriptor>(&d)) {
    return child.is_call && child.name == api->func;
  }
  const auto& var = std::get<VariableDescriptor>(d);
  return !child.is_call && child.name == var.var_type && child.attr == var.attr &&
         (!var.value_constraint || child.value == *var.value_constraint);
}

std::string descriptor_name(const Descriptor& d) {
  if (const auto* api = std::get_if<APIDescriptor>(&d)) return api->func;
  const auto& var = std::get<VariableDescriptor>(d);
  return var.var_type + "." + var.attr;
}

json descriptor_to_json(const Descriptor& d) {
  json j;
  if (const auto* api = std::get_if<APIDescriptor>(&d)) {
    j["api"] = api->func;
    if (!api->arg_constraints.empty()) {
      json args = json::object();
      for (const auto& [k, v] : api->arg_constraints) args[k] = v.to_json();
      j["args"] = std::move(args);
    }
    if (api->return_constraint) j["ret"] = api->return_constraint->to_json();
    return j;
  }
  const auto& var = std::get<VariableDescriptor>(d);
  j["var_type"] = var.var_type;
  j["attr"] = var.attr;
  if (var.value_constraint) j["value"] = var.value_constraint->to_json();
  return j;
}

Descriptor descriptor_from_json(const json& j) {
  if (j.contains("api")) {
    APIDescriptor d;
    d.func = j.at("api").get<std::string>();
    if (auto it = j.find("args"); it != j.end()) {
      for (const auto& [k, v] : it->items()) d.arg_constraints.emplace(k, Value::from_json(v));
    }
    if (auto it = j.find("ret"); it != j.end()) d.return_constraint = Value::from_json(*it);
    return d;
  }
  if (j.contains("var_type")) {
    VariableDescriptor d;
    d.var_type = j.at("var_type").get<std::string>();
    d.attr = j.at("attr").get<std::string>();
    if (auto it = j.find("value"); it != j.end()) d.value_constraint = Value::from_json(*it);
    return d;
  }
  throw Error("descriptor must carry \"api\" or \"var_type\": " + j.dump());
}

}  // namespace tinv
