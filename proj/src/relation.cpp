// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include "tinv/relation.hpp"

#include <algorithm>

#include "tinv/error.hpp"

namespace tinv {

std::string_view to_string(BoundType b) {
  return b == BoundType::EqualsInputAttr ? "EQUALS_INPUT_ATTR" : "CONSTANT_ATTR";
}

json params_to_json(const RelationParams& p) {
  json j = json::object();
  if (p.is_distinct) j["is_distinct"] = *p.is_distinct;
  if (p.arg_index) j["arg"] = *p.arg_index;
  if (p.bound) j["bound"] = std::string(to_string(*p.bound));
  if (p.attr) j["attr"] = *p.attr;
  if (p.constant) j["value"] = p.constant->to_plain_json();
  return j;
}

RelationParams params_from_json(const json& j) {
  RelationParams p;
  if (!j.is_object()) return p;
  if (auto it = j.find("is_distinct"); it != j.end()) p.is_distinct = it->get<bool>();
  if (auto it = j.find("arg"); it != j.end()) p.arg_index = it->get<int>();
  if (auto it = j.find("bound"); it != j.end()) {
    const auto s = it->get<std::string>();
    if (s == "EQUALS_INPUT_ATTR") {
      p.bound = BoundType::EqualsInputAttr;
    } else if (s == "CONSTANT_ATTR") {
      p.bound = BoundType::ConstantAttr;
    } else {
      throw Error("unknown bound type " + s);
    }
  }
  if (auto it = j.find("attr"); it != j.end()) p.attr = it->get<std::string>();
  if (auto it = j.find("value"); it != j.end()) p.constant = Value::from_plain_json(*it);
  return p;
}

bool Blocklist::blocks(const std::string& field, const Value& value) const {
  if (digest_fields && value.is_digest()) return true;
  for (const auto& f : fields) {
    if (field == f) return true;
    if (field.size() > f.size() && field.compare(0, f.size(), f) == 0 && field[f.size()] == '.') return true;
  }
  return false;
}

Blocklist Relation::blocklist(const HypothesisCore&, std::span<const Example>, std::span<const Example>) const {
  return {};
}

std::string Relation::describe(const HypothesisCore& h) const {
  std::string out(name());
  out += "(";
  for (std::size_t i = 0; i < h.descriptors.size(); ++i) {
    if (i) out += ", ";
    out += descriptor_name(h.descriptors[i]);
  }
  return out + ")";
}

RelationRegistry& RelationRegistry::builtin() {
  static RelationRegistry* reg = [] {
    auto* r = new RelationRegistry;
    r->add(make_consistent_relation());
    r->add(make_event_contain_relation());
    r->add(make_api_sequence_relation());
    r->add(make_api_arg_relation());
    r->add(make_api_output_relation());
    return r;
  }();
  return *reg;
}

void RelationRegistry::add(std::unique_ptr<Relation> rel) {
  if (find(rel->name())) throw Error("relation already registered: " + std::string(rel->name()));
  relations_.push_back(std::move(rel));
}

const Relation* RelationRegistry::find(std::string_view name) const {
  for (const auto& r : relations_) {
    if (r->name() == name) return r.get();
  }
  return nullptr;
}

const Relation& RelationRegistry::get(std::string_view name) const {
  const Relation* r = find(name);
  if (!r) throw Error("unknown relation: " + std::string(name));
  return *r;
}

std::vector<std::string> RelationRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& r : relations_) out.emplace_back(r->name());
  return out;
}

Verdict relation_semantics(const HypothesisCore& h, const Example& e) {
  const Relation& rel = RelationRegistry::builtin().get(h.relation);
  rel.validate(h);
  return rel.evaluate(h, e);
}

bool match_descriptor(const Descriptor& d, const TraceRecord& rec) { return matches(d, rec); }

}  // namespace tinv
