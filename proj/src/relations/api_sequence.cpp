// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

// APISequence(A1, ..., An): within one thread's step window, whenever any of
// the APIs is called, all of them are called and their first calls come in
// the listed order.

#include <algorithm>

#include "tinv/error.hpp"
#include "tinv/relation.hpp"

namespace tinv {

namespace {

class APISequenceRelation final : public Relation {
 public:
  std::string_view name() const override { return "APISequence"; }

  void validate(const HypothesisCore& h) const override {
    if (h.descriptors.size() < 2) throw ArityMismatch("APISequence needs at least two APIs");
    for (const auto& d : h.descriptors) {
      if (!std::holds_alternative<APIDescriptor>(d)) throw ArityMismatch("APISequence takes API descriptors only");
    }
  }

  void generate(std::span<const Unit> units, const GenOptions& opts, std::set<HypothesisCore>& out) const override {
    for (const auto& u : units) {
      const auto* w = std::get_if<WindowUnit>(&u);
      if (!w) continue;
      std::vector<std::string> calls;
      for (const auto& f : w->first_calls) {
        if (!opts.api_blocklist.count(f)) calls.push_back(f);
      }
      const std::size_t n = calls.size();
      const bool triples = n <= opts.max_sequence_window;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          out.insert(make({calls[i], calls[j]}));
          if (!triples) continue;
          for (std::size_t k = j + 1; k < n; ++k) out.insert(make({calls[i], calls[j], calls[k]}));
        }
      }
    }
  }

  void examples(const HypothesisCore& h, const Unit& unit,
                const std::function<void(Example&&)>& sink) const override {
    const auto* w = std::get_if<WindowUnit>(&unit);
    if (!w) return;
    std::vector<std::string> listed;
    for (const auto& d : h.descriptors) listed.push_back(std::get<APIDescriptor>(d).func);
    Example e;
    for (const auto& f : w->first_calls) {
      if (std::find(listed.begin(), listed.end(), f) != listed.end()) e.sequence.push_back(f);
    }
    if (e.sequence.empty()) return;
    e.records = {w->view};
    e.step = w->step;
    e.unit_key = std::to_string(w->pid) + ":" + std::to_string(w->tid);
    e.pids = {w->pid};
    e.verdict = evaluate(h, e);
    sink(std::move(e));
  }

  Verdict evaluate(const HypothesisCore& h, const Example& e) const override {
    if (e.sequence.size() != h.descriptors.size()) return Verdict::Failing;
    for (std::size_t i = 0; i < e.sequence.size(); ++i) {
      if (e.sequence[i] != std::get<APIDescriptor>(h.descriptors[i]).func) return Verdict::Failing;
    }
    return Verdict::Passing;
  }

  std::string describe(const HypothesisCore& h) const override {
    std::string out = "APISequence(";
    for (std::size_t i = 0; i < h.descriptors.size(); ++i) {
      if (i) out += " -> ";
      out += descriptor_name(h.descriptors[i]);
    }
    return out + ")";
  }

 private:
  static HypothesisCore make(std::vector<std::string> funcs) {
    HypothesisCore h;
    h.relation = "APISequence";
    for (auto& f : funcs) h.descriptors.push_back(APIDescriptor{std::move(f), {}, std::nullopt});
    return h;
  }
};

}  // namespace

std::unique_ptr<Relation> make_api_sequence_relation() { return std::make_unique<APISequenceRelation>(); }

}  // namespace tinv
