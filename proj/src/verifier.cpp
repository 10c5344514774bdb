// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include "tinv/verifier.hpp"

#include <algorithm>
#include <map>

#include "tinv/error.hpp"

namespace tinv {

namespace {

json view_to_json(const FieldView& v) {
  json j = json::object();
  for (const auto& [k, val] : v) j[k] = val.to_json();
  return j;
}

FieldView view_from_json(const json& j) {
  FieldView v;
  for (const auto& [k, val] : j.items()) v.emplace(k, Value::from_json(val));
  return v;
}

json child_to_json(const ChildKey& c) {
  if (c.is_call) return {{"api", c.name}};
  return {{"var_type", c.name}, {"attr", c.attr}, {"value", c.value.to_json()}};
}

ChildKey child_from_json(const json& j) {
  ChildKey c;
  if (j.contains("api")) {
    c.is_call = true;
    c.name = j.at("api").get<std::string>();
  } else {
    c.name = j.at("var_type").get<std::string>();
    c.attr = j.at("attr").get<std::string>();
    c.value = Value::from_json(j.at("value"));
  }
  return c;
}

MetaVars meta_of(const Example& e) {
  MetaVars m;
  if (e.records.empty()) return m;
  static constexpr std::string_view kPrefix = "meta_vars.";
  for (const auto& [k, v] : e.records.front()) {
    if (k.starts_with(kPrefix)) m.emplace(k.substr(kPrefix.size()), v);
  }
  return m;
}

std::string summarize(const ViolationReport& r, const Relation& rel, const HypothesisCore& h) {
  std::string out = rel.describe(h) + " violated at step " + std::to_string(r.step);
  if (!r.unit_key.empty()) out += " (" + r.unit_key + ")";
  if (!r.example.values.empty()) {
    out += ": values";
    for (const auto& v : r.example.values) out += " " + v.repr();
  } else if (!r.example.sequence.empty()) {
    out += ": saw";
    for (const auto& s : r.example.sequence) out += " " + s;
  } else if (h.relation == "EventContain") {
    out += ": no " + descriptor_name(h.descriptors[1]) + " inside the span";
  }
  return out;
}

bool report_before(const ViolationReport& a, const ViolationReport& b) {
  return std::tie(a.detection_step, a.step, a.invariant, a.unit_key) <
         std::tie(b.detection_step, b.step, b.invariant, b.unit_key);
}

}  // namespace

json report_to_json(const ViolationReport& r) {
  json descriptors = json::array();
  for (const auto& d : r.descriptors) descriptors.push_back(descriptor_to_json(d));
  json records = json::array();
  for (const auto& v : r.example.records) records.push_back(view_to_json(v));
  json payload = json::object();
  if (!r.example.values.empty()) {
    json values = json::array();
    for (const auto& v : r.example.values) values.push_back(v.to_json());
    payload["values"] = std::move(values);
  }
  if (!r.example.sequence.empty()) payload["sequence"] = r.example.sequence;
  if (r.relation == "EventContain") {
    json children = json::array();
    for (const auto& c : r.example.children) children.push_back(child_to_json(c));
    payload["children"] = std::move(children);
  }
  if (!r.example.pids.empty()) payload["pids"] = r.example.pids;
  json meta = json::object();
  for (const auto& [k, v] : r.meta) meta[k] = v.to_plain_json();
  return {{"invariant", r.invariant},
          {"relation", r.relation},
          {"descriptors", std::move(descriptors)},
          {"clause", r.clause},
          {"step", r.step},
          {"detection_step", r.detection_step},
          {"unit", r.unit_key},
          {"meta", std::move(meta)},
          {"example", {{"records", std::move(records)}, {"payload", std::move(payload)}}},
          {"summary", r.description}};
}

ViolationReport report_from_json(const json& j) {
  ViolationReport r;
  r.invariant = j.at("invariant").get<std::string>();
  r.relation = j.at("relation").get<std::string>();
  for (const auto& d : j.at("descriptors")) r.descriptors.push_back(descriptor_from_json(d));
  r.clause = j.value("clause", std::size_t{0});
  r.step = j.at("step").get<std::int64_t>();
  r.detection_step = j.at("detection_step").get<std::int64_t>();
  r.unit_key = j.value("unit", std::string());
  const json meta = j.value("meta", json::object());
  for (const auto& [k, v] : meta.items()) r.meta.emplace(k, Value::from_plain_json(v));
  r.description = j.value("summary", std::string());
  if (auto it = j.find("example"); it != j.end()) {
    for (const auto& rec : it->value("records", json::array())) r.example.records.push_back(view_from_json(rec));
    const json payload = it->value("payload", json::object());
    for (const auto& v : payload.value("values", json::array())) r.example.values.push_back(Value::from_json(v));
    r.example.sequence = payload.value("sequence", std::vector<std::string>{});
    for (const auto& c : payload.value("children", json::array())) r.example.children.push_back(child_from_json(c));
    r.example.pids = payload.value("pids", std::vector<std::int64_t>{});
  }
  r.example.step = r.step;
  r.example.unit_key = r.unit_key;
  r.example.verdict = Verdict::Failing;
  return r;
}

json summary_to_json(const CheckSummary& s) {
  json occ = json::object();
  for (const auto& [k, v] : s.occurrences) occ[k] = v;
  return {{"summary", {{"occurrences", std::move(occ)},
                       {"reports", s.reports},
                       {"records", s.records},
                       {"warnings", s.warnings}}}};
}

Verifier::Verifier(std::vector<Invariant> invariants, std::set<std::int64_t> expected_pids)
    : invariants_(std::move(invariants)), scanner_(std::move(expected_pids)) {
  auto& registry = RelationRegistry::builtin();
  for (std::size_t i = 0; i < invariants_.size(); ++i) {
    registry.get(invariants_[i].core.relation).validate(invariants_[i].core);
    by_relation_[invariants_[i].core.relation].push_back(i);
  }
}

void Verifier::check(const Unit& unit, const Sink& sink) {
  auto& registry = RelationRegistry::builtin();
  for (const auto& [name, idx] : by_relation_) {
    const Relation& rel = registry.get(name);
    for (auto i : idx) {
      const Invariant& inv = invariants_[i];
      rel.examples(inv.core, unit, [&](Example&& e) {
        auto clause = inv.precondition.satisfied_clause(e.records);
        if (!clause || e.verdict != Verdict::Failing) return;
        ++summary_.occurrences[inv.id];
        if (!reported_.emplace(inv.id, e.step, e.unit_key).second) return;
        ViolationReport r;
        r.invariant = inv.id;
        r.relation = inv.core.relation;
        r.descriptors = inv.core.descriptors;
        r.clause = *clause;
        r.step = e.step;
        r.detection_step = std::max(progress_, e.step);
        r.unit_key = e.unit_key;
        r.meta = meta_of(e);
        r.example = std::move(e);
        r.description = summarize(r, rel, inv.core);
        ++summary_.reports;
        sink(r);
      });
    }
  }
}

void Verifier::feed(const TraceRecord& rec, const Sink& sink) {
  if (finished_) throw Error("verifier already finished");
  ++summary_.records;
  scanner_.feed(rec, [&](Unit&& u) {
    progress_ = scanner_.progress();
    check(u, sink);
  });
}

void Verifier::finish(const Sink& sink) {
  if (finished_) return;
  finished_ = true;
  scanner_.finish([&](Unit&& u) {
    progress_ = scanner_.progress();
    check(u, sink);
  });
  for (const auto& span : scanner_.incomplete()) {
    summary_.warnings.push_back("IncompleteStreamWarning: span never closed: " + span);
  }
}

std::vector<ViolationReport> check_stream(std::span<const Invariant> invariants, std::span<const TraceRecord> records,
                                          CheckMode mode, CheckSummary* summary,
                                          std::set<std::int64_t> expected_pids) {
  // The whole stream is at hand in batch mode, so processes are re-aligned
  // by step whatever order they arrived in.
  std::vector<TraceRecord> merged;
  if (mode == CheckMode::Batch) {
    std::map<std::int64_t, ProcessTrace> by_pid;
    for (const auto& rec : records) {
      auto& p = by_pid[rec.pid];
      p.pid = rec.pid;
      p.records.push_back(rec);
    }
    Run run;
    for (auto& [pid, p] : by_pid) {
      expected_pids.insert(pid);
      run.processes.push_back(std::move(p));
    }
    merged = merge_by_step(run);
    records = merged;
  }
  Verifier v({invariants.begin(), invariants.end()}, std::move(expected_pids));
  std::vector<ViolationReport> out;
  auto sink = [&](const ViolationReport& r) { out.push_back(r); };
  for (const auto& rec : records) v.feed(rec, sink);
  v.finish(sink);
  // Batch mode hands back a canonical order; online keeps detection order.
  if (mode == CheckMode::Batch) std::stable_sort(out.begin(), out.end(), report_before);
  if (summary) *summary = v.summary();
  return out;
}

std::vector<ViolationReport> check_run(std::span<const Invariant> invariants, const Run& run,
                                       CheckSummary* summary) {
  std::set<std::int64_t> pids;
  for (const auto& p : run.processes) pids.insert(p.pid);
  const auto merged = merge_by_step(run);
  return check_stream(invariants, merged, CheckMode::Batch, summary, std::move(pids));
}

SelectionManifest required_descriptors(std::span<const Invariant> invariants) {
  SelectionManifest m;
  if (invariants.empty()) return m;
  m.meta_keys.insert("step");
  static constexpr std::string_view kMeta = "meta_vars.";
  for (const auto& inv : invariants) {
    for (const auto& d : inv.core.descriptors) {
      if (const auto* api = std::get_if<APIDescriptor>(&d)) {
        m.apis.insert(api->func);
      } else {
        const auto& var = std::get<VariableDescriptor>(d);
        m.vars.emplace(var.var_type, var.attr);
      }
    }
    for (const auto& clause : inv.precondition.clauses) {
      for (const auto& c : clause) {
        if (c.field.starts_with(kMeta)) {
          m.meta_keys.insert(c.field.substr(kMeta.size()));
        } else {
          m.fields.insert(c.field);
        }
      }
    }
  }
  return m;
}

json manifest_to_json(const SelectionManifest& m) {
  json vars = json::array();
  for (const auto& [t, a] : m.vars) vars.push_back({{"var_type", t}, {"attr", a}});
  return {{"schema", kSchemaVersion},
          {"apis", m.apis},
          {"vars", std::move(vars)},
          {"meta_keys", m.meta_keys},
          {"fields", m.fields}};
}

SelectionManifest manifest_from_json(const json& j) {
  const int schema = j.value("schema", -1);
  if (schema != kSchemaVersion) throw SchemaVersionMismatch(schema);
  SelectionManifest m;
  m.apis = j.value("apis", std::set<std::string>{});
  for (const auto& v : j.value("vars", json::array())) {
    m.vars.emplace(v.at("var_type").get<std::string>(), v.at("attr").get<std::string>());
  }
  m.meta_keys = j.value("meta_keys", std::set<std::string>{});
  m.fields = j.value("fields", std::set<std::string>{});
  return m;
}

}  // namespace tinv
