// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

// APIArg(A; i, distinct): within one step, the i-th argument of all calls
// to A across processes and threads is pairwise distinct, or all equal.

#include <algorithm>

#include "tinv/error.hpp"
#include "tinv/relation.hpp"

namespace tinv {

namespace {

bool all_distinct(std::vector<Value> v) {
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) == v.end();
}

bool all_equal(const std::vector<Value>& v) {
  return std::all_of(v.begin(), v.end(), [&](const Value& x) { return x == v.front(); });
}

class APIArgRelation final : public Relation {
 public:
  std::string_view name() const override { return "APIArg"; }

  void validate(const HypothesisCore& h) const override {
    if (h.descriptors.size() != 1 || !std::holds_alternative<APIDescriptor>(h.descriptors[0])) {
      throw ArityMismatch("APIArg takes one API descriptor");
    }
    if (!h.params.arg_index || !h.params.is_distinct) throw ArityMismatch("APIArg needs arg and is_distinct");
  }

  void generate(std::span<const Unit> units, const GenOptions& opts, std::set<HypothesisCore>& out) const override {
    for (const auto& u : units) {
      const auto* step = std::get_if<StepUnit>(&u);
      if (!step) continue;
      for (const auto& [func, calls] : step->calls) {
        if (opts.api_blocklist.count(func) || calls.empty()) continue;
        std::size_t arity = calls.front().args.size();
        for (const auto& c : calls) arity = std::min(arity, c.args.size());
        for (std::size_t i = 0; i < arity; ++i) {
          std::vector<Value> values;
          for (const auto& c : calls) values.push_back(c.args[i]);
          if (all_distinct(values)) out.insert(make(func, static_cast<int>(i), true));
          if (all_equal(values)) out.insert(make(func, static_cast<int>(i), false));
        }
      }
    }
  }

  void examples(const HypothesisCore& h, const Unit& unit,
                const std::function<void(Example&&)>& sink) const override {
    const auto* step = std::get_if<StepUnit>(&unit);
    if (!step) return;
    const auto& api = std::get<APIDescriptor>(h.descriptors[0]);
    auto it = step->calls.find(api.func);
    if (it == step->calls.end()) return;
    const auto i = static_cast<std::size_t>(*h.params.arg_index);
    Example e;
    for (const auto& c : it->second) {
      if (i >= c.args.size()) continue;
      e.values.push_back(c.args[i]);
      e.records.push_back(c.view);
      e.pids.push_back(c.pid);
    }
    if (e.values.empty()) return;
    e.step = step->step;
    e.verdict = evaluate(h, e);
    sink(std::move(e));
  }

  Verdict evaluate(const HypothesisCore& h, const Example& e) const override {
    if (!h.params.is_distinct) throw ArityMismatch("APIArg needs is_distinct");
    const bool ok = *h.params.is_distinct ? all_distinct(e.values) : all_equal(e.values);
    return ok ? Verdict::Passing : Verdict::Failing;
  }

  Blocklist blocklist(const HypothesisCore& h, std::span<const Example>,
                      std::span<const Example>) const override {
    Blocklist b;
    if (h.params.arg_index) b.fields = {"args." + std::to_string(*h.params.arg_index)};
    return b;
  }

  std::string describe(const HypothesisCore& h) const override {
    return "APIArg(" + descriptor_name(h.descriptors[0]) + " arg " + std::to_string(h.params.arg_index.value_or(-1)) +
           (h.params.is_distinct.value_or(false) ? " distinct)" : " identical)");
  }

 private:
  static HypothesisCore make(const std::string& func, int arg, bool distinct) {
    HypothesisCore h;
    h.relation = "APIArg";
    h.params.arg_index = arg;
    h.params.is_distinct = distinct;
    h.descriptors = {APIDescriptor{func, {}, std::nullopt}};
    return h;
  }
};

}  // namespace

std::unique_ptr<Relation> make_api_arg_relation() { return std::make_unique<APIArgRelation>(); }

}  // namespace tinv
