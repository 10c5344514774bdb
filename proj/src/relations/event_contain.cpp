// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

// EventContain(parent, child): every span of the parent API contains at
// least one event (nested call or variable change) matching the child.

#include "tinv/error.hpp"
#include "tinv/relation.hpp"

namespace tinv {

namespace {

class EventContainRelation final : public Relation {
 public:
  std::string_view name() const override { return "EventContain"; }

  void validate(const HypothesisCore& h) const override {
    if (h.descriptors.size() != 2 || !std::holds_alternative<APIDescriptor>(h.descriptors[0])) {
      throw ArityMismatch("EventContain takes an API descriptor and a child descriptor");
    }
  }

  void generate(std::span<const Unit> units, const GenOptions& opts, std::set<HypothesisCore>& out) const override {
    for (const auto& u : units) {
      const auto* span = std::get_if<SpanUnit>(&u);
      if (!span || opts.api_blocklist.count(span->func)) continue;
      for (const auto& child : span->descendants) {
        Descriptor d;
        if (child.is_call) {
          if (opts.api_blocklist.count(child.name)) continue;
          d = APIDescriptor{child.name, {}, std::nullopt};
        } else {
          d = VariableDescriptor{child.name, child.attr, std::nullopt};
        }
        HypothesisCore h;
        h.relation = "EventContain";
        h.descriptors = {APIDescriptor{span->func, {}, std::nullopt}, std::move(d)};
        out.insert(std::move(h));
      }
    }
  }

  void examples(const HypothesisCore& h, const Unit& unit,
                const std::function<void(Example&&)>& sink) const override {
    const auto* span = std::get_if<SpanUnit>(&unit);
    if (!span) return;
    const auto& parent = std::get<APIDescriptor>(h.descriptors[0]);
    if (span->func != parent.func) return;
    for (const auto& [pos, expected] : parent.arg_constraints) {
      std::size_t i = std::stoul(pos);
      if (i >= span->args.size() || span->args[i] != expected) return;
    }
    if (parent.return_constraint && (!span->ret || *span->ret != *parent.return_constraint)) return;
    Example e;
    e.records = {span->view};
    e.children = span->descendants;
    e.step = span->step;
    e.unit_key = std::to_string(span->pid) + ":" + std::to_string(span->tid);
    e.pids = {span->pid};
    e.verdict = evaluate(h, e);
    sink(std::move(e));
  }

  Verdict evaluate(const HypothesisCore& h, const Example& e) const override {
    for (const auto& c : e.children) {
      if (matches(h.descriptors[1], c)) return Verdict::Passing;
    }
    return Verdict::Failing;
  }

  std::string describe(const HypothesisCore& h) const override {
    return "EventContain(" + descriptor_name(h.descriptors[0]) + " contains " + descriptor_name(h.descriptors[1]) +
           ")";
  }
};

}  // namespace

std::unique_ptr<Relation> make_event_contain_relation() { return std::make_unique<EventContainRelation>(); }

}  // namespace tinv
