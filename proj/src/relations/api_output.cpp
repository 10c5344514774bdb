// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

// APIOutput(A; bound): an attribute of A's return value either equals the
// same attribute of an input argument or stays at a constant.

#include <map>

#include "tinv/error.hpp"
#include "tinv/relation.hpp"

namespace tinv {

namespace {

// Attributes a bound may refer to: shape/dtype of digests, plain struct fields.
std::map<std::string, Value> attributes(const Value& v) {
  std::map<std::string, Value> out;
  if (v.is_digest()) {
    out.emplace("shape", *v.attribute("shape"));
    out.emplace("dtype", *v.attribute("dtype"));
  } else if (v.kind() == Value::Kind::Struct) {
    for (const auto& [k, f] : v.fields()) {
      if (f.is_plain()) out.emplace(k, f);
    }
  }
  return out;
}

class APIOutputRelation final : public Relation {
 public:
  std::string_view name() const override { return "APIOutput"; }

  void validate(const HypothesisCore& h) const override {
    if (h.descriptors.size() != 1 || !std::holds_alternative<APIDescriptor>(h.descriptors[0])) {
      throw ArityMismatch("APIOutput takes one API descriptor");
    }
    if (!h.params.bound || !h.params.attr) throw ArityMismatch("APIOutput needs bound and attr");
    if (*h.params.bound == BoundType::EqualsInputAttr && !h.params.arg_index) {
      throw ArityMismatch("EQUALS_INPUT_ATTR needs arg");
    }
    if (*h.params.bound == BoundType::ConstantAttr && !h.params.constant) {
      throw ArityMismatch("CONSTANT_ATTR needs value");
    }
  }

  void generate(std::span<const Unit> units, const GenOptions& opts, std::set<HypothesisCore>& out) const override {
    std::map<std::pair<std::string, std::string>, std::set<Value>> constants;
    for (const auto& u : units) {
      const auto* span = std::get_if<SpanUnit>(&u);
      if (!span || !span->ret || opts.api_blocklist.count(span->func)) continue;
      for (const auto& [attr, value] : attributes(*span->ret)) {
        constants[{span->func, attr}].insert(value);
        for (std::size_t i = 0; i < span->args.size(); ++i) {
          auto in = span->args[i].attribute(attr);
          if (!in || *in != value || (!span->args[i].is_digest() && span->args[i].kind() != Value::Kind::Struct)) {
            continue;
          }
          HypothesisCore h = make(span->func, attr);
          h.params.bound = BoundType::EqualsInputAttr;
          h.params.arg_index = static_cast<int>(i);
          out.insert(std::move(h));
        }
      }
    }
    // An attribute taking many values is not a constant.
    for (const auto& [key, values] : constants) {
      if (values.size() > opts.max_constant_values) continue;
      for (const auto& v : values) {
        HypothesisCore h = make(key.first, key.second);
        h.params.bound = BoundType::ConstantAttr;
        h.params.constant = v;
        out.insert(std::move(h));
      }
    }
  }

  void examples(const HypothesisCore& h, const Unit& unit,
                const std::function<void(Example&&)>& sink) const override {
    const auto* span = std::get_if<SpanUnit>(&unit);
    if (!span || !span->ret) return;
    if (span->func != std::get<APIDescriptor>(h.descriptors[0]).func) return;
    Example e;
    const std::string& attr = *h.params.attr;
    e.values.push_back(span->ret->attribute(attr).value_or(Value::none()));
    if (*h.params.bound == BoundType::EqualsInputAttr) {
      const auto i = static_cast<std::size_t>(*h.params.arg_index);
      if (i >= span->args.size()) return;
      e.values.push_back(span->args[i].attribute(attr).value_or(Value::none()));
    } else {
      e.values.push_back(*h.params.constant);
    }
    e.records = {span->view};
    e.step = span->step;
    e.unit_key = std::to_string(span->pid) + ":" + std::to_string(span->tid);
    e.pids = {span->pid};
    e.verdict = evaluate(h, e);
    sink(std::move(e));
  }

  Verdict evaluate(const HypothesisCore&, const Example& e) const override {
    if (e.values.size() != 2) throw ArityMismatch("APIOutput examples carry output and bound values");
    return !e.values[0].is_none() && e.values[0] == e.values[1] ? Verdict::Passing : Verdict::Failing;
  }

  Blocklist blocklist(const HypothesisCore& h, std::span<const Example>,
                      std::span<const Example>) const override {
    Blocklist b;
    if (h.params.bound == BoundType::EqualsInputAttr && h.params.arg_index) {
      b.fields = {"args." + std::to_string(*h.params.arg_index)};
    }
    return b;
  }

  std::string describe(const HypothesisCore& h) const override {
    std::string out = "APIOutput(" + descriptor_name(h.descriptors[0]) + " ret." + h.params.attr.value_or("?");
    if (h.params.bound == BoundType::EqualsInputAttr) {
      return out + " == args." + std::to_string(h.params.arg_index.value_or(-1)) + "." + h.params.attr.value_or("?") +
             ")";
    }
    return out + " == " + (h.params.constant ? h.params.constant->repr() : "?") + ")";
  }

 private:
  static HypothesisCore make(const std::string& func, const std::string& attr) {
    HypothesisCore h;
    h.relation = "APIOutput";
    h.params.attr = attr;
    h.descriptors = {APIDescriptor{func, {}, std::nullopt}};
    return h;
  }
};

}  // namespace

std::unique_ptr<Relation> make_api_output_relation() { return std::make_unique<APIOutputRelation>(); }

}  // namespace tinv
