// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

// Consistent(Va, Vb): two variable attributes hold equal values, whatever
// those values are. Compared per step between different instances that
// share a var-id suffix (the same parameter on different ranks).

#include <algorithm>
#include <map>

#include "tinv/error.hpp"
#include "tinv/relation.hpp"

namespace tinv {

namespace {

using AttrKey = std::pair<std::string, std::string>;
using ValueIndex = std::map<std::string, std::map<Value, std::set<std::string>>>;

const VariableDescriptor& var_at(const HypothesisCore& h, std::size_t i) {
  return std::get<VariableDescriptor>(h.descriptors[i]);
}

bool accepts(const VariableDescriptor& d, const VarObservation& o) {
  return !d.value_constraint || o.value == *d.value_constraint;
}

class ConsistentRelation final : public Relation {
 public:
  std::string_view name() const override { return "Consistent"; }

  void validate(const HypothesisCore& h) const override {
    if (h.descriptors.size() != 2 || !std::holds_alternative<VariableDescriptor>(h.descriptors[0]) ||
        !std::holds_alternative<VariableDescriptor>(h.descriptors[1])) {
      throw ArityMismatch("Consistent takes two variable descriptors");
    }
  }

  void generate(std::span<const Unit> units, const GenOptions&, std::set<HypothesisCore>& out) const override {
    // (type, attr) -> suffix -> value -> instances ("pid:var_id") holding it.
    std::map<AttrKey, ValueIndex> seen;
    for (const auto& u : units) {
      const auto* step = std::get_if<StepUnit>(&u);
      if (!step) continue;
      for (const auto& [key, groups] : step->vars) {
        auto& index = seen[key];
        for (const auto& [suffix, obs] : groups) {
          for (const auto& o : obs) index[suffix][o.value].insert(std::to_string(o.pid) + ":" + o.var_id);
        }
      }
    }
    for (auto a = seen.begin(); a != seen.end(); ++a) {
      for (auto b = a; b != seen.end(); ++b) {
        if (value_match(a->second, b->second, a == b)) {
          HypothesisCore h;
          h.relation = "Consistent";
          h.descriptors = {VariableDescriptor{a->first.first, a->first.second, std::nullopt},
                           VariableDescriptor{b->first.first, b->first.second, std::nullopt}};
          out.insert(std::move(h));
        }
      }
    }
  }

  void examples(const HypothesisCore& h, const Unit& unit,
                const std::function<void(Example&&)>& sink) const override {
    const auto* step = std::get_if<StepUnit>(&unit);
    if (!step) return;
    const auto& d1 = var_at(h, 0);
    const auto& d2 = var_at(h, 1);
    auto g1 = step->vars.find({d1.var_type, d1.attr});
    auto g2 = step->vars.find({d2.var_type, d2.attr});
    if (g1 == step->vars.end() || g2 == step->vars.end()) return;
    const bool self = d1 == d2;

    for (const auto& [suffix, left] : g1->second) {
      auto rit = g2->second.find(suffix);
      if (rit == g2->second.end()) continue;
      const auto& right = rit->second;
      for (std::size_t i = 0; i < left.size(); ++i) {
        if (!accepts(d1, left[i])) continue;
        for (std::size_t j = self ? i + 1 : 0; j < right.size(); ++j) {
          if (!accepts(d2, right[j])) continue;
          if (left[i].pid == right[j].pid && left[i].var_id == right[j].var_id) continue;
          Example e;
          e.records = {left[i].view, right[j].view};
          e.values = {left[i].value, right[j].value};
          e.step = step->step;
          e.unit_key = suffix;
          e.pids = {left[i].pid, right[j].pid};
          e.verdict = evaluate(h, e);
          sink(std::move(e));
        }
      }
    }
  }

  Verdict evaluate(const HypothesisCore&, const Example& e) const override {
    if (e.values.size() != 2) throw ArityMismatch("Consistent examples compare exactly two values");
    return e.values[0] == e.values[1] ? Verdict::Passing : Verdict::Failing;
  }

  Blocklist blocklist(const HypothesisCore& h, std::span<const Example> passing,
                      std::span<const Example> failing) const override {
    Blocklist b;
    b.fields = {var_at(h, 0).attr, var_at(h, 1).attr};
    // Equal tensors drag their sibling tensors along (equal grads for equal
    // weights); such fields would mask the real scenario split.
    auto digests = [](const Example& e) {
      return std::any_of(e.values.begin(), e.values.end(), [](const Value& v) { return v.is_digest(); });
    };
    b.digest_fields = std::any_of(passing.begin(), passing.end(), digests) ||
                      std::any_of(failing.begin(), failing.end(), digests);
    return b;
  }

 private:
  // Some value is held by two different instances of the same variable.
  static bool value_match(const ValueIndex& a, const ValueIndex& b, bool self) {
    for (const auto& [suffix, values_a] : a) {
      auto bit = b.find(suffix);
      if (bit == b.end()) continue;
      for (const auto& [v, inst_a] : values_a) {
        auto it = bit->second.find(v);
        if (it == bit->second.end()) continue;
        if (inst_a.size() >= 2 || it->second.size() >= 2 || *inst_a.begin() != *it->second.begin()) {
          if (!self || inst_a.size() >= 2) return true;
        }
      }
    }
    return false;
  }
};

}  // namespace

std::unique_ptr<Relation> make_consistent_relation() { return std::make_unique<ConsistentRelation>(); }

}  // namespace tinv
