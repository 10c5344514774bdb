// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "helpers.hpp"
#include "tinv/error.hpp"
#include "tinv/verifier.hpp"

using namespace tinv;
using namespace tinv::testing;

namespace {

const Invariant& by_id(const std::string& id) {
  for (const auto& inv : trained_invariants().invariants) {
    if (inv.id == id) return inv;
  }
  throw Error("no invariant " + id);
}

std::multiset<std::string> keys(const std::vector<ViolationReport>& reports) {
  std::multiset<std::string> out;
  for (const auto& r : reports) out.insert(report_to_json(r).dump());
  return out;
}

std::vector<ViolationReport> online(const Run& run) {
  std::set<std::int64_t> pids;
  for (const auto& p : run.processes) pids.insert(p.pid);
  return check_stream(trained_invariants().invariants, merge_by_step(run), CheckMode::Online, nullptr, pids);
}

}  // namespace

TEST_CASE("clean held-out runs produce no reports") {
  for (std::uint64_t seed : {11, 12}) {
    CheckSummary summary;
    const auto reports = check_run(trained_invariants().invariants, generate(training_config(seed, 20, 9)), &summary);
    CHECK(reports.empty());
    CHECK(summary.reports == 0);
    CHECK(summary.records > 0);
  }
}

TEST_CASE("every report is a real violation of a satisfied precondition") {
  for (const auto& f : describe_faults()) {
    const auto reports = check_run(trained_invariants().invariants, faulty_run(f.kind, 3));
    CHECK_FALSE(reports.empty());
    for (const auto& r : reports) {
      const auto& inv = by_id(r.invariant);
      CHECK(r.relation == inv.core.relation);
      CHECK(relation_semantics(inv.core, r.example) == Verdict::Failing);
      const auto clause = inv.precondition.satisfied_clause(r.example.records);
      REQUIRE(clause);
      CHECK(*clause == r.clause);
      CHECK(r.detection_step >= r.step);
      CHECK(r.step >= 3);
    }
  }
}

TEST_CASE("each fault is reported within one step of injection by its expected catcher") {
  for (const auto& f : describe_faults()) {
    const auto reports = check_run(trained_invariants().invariants, faulty_run(f.kind, 3));
    REQUIRE_FALSE(reports.empty());
    CHECK(reports.front().detection_step <= 4);
    std::set<std::string> relations;
    for (const auto& r : reports) relations.insert(r.relation);
    CHECK(std::any_of(f.catchers.begin(), f.catchers.end(), [&](const std::string& c) { return relations.count(c) > 0; }));
  }
}

TEST_CASE("online and batch modes report the same violations") {
  for (auto kind : {FaultKind::TpDivergence, FaultKind::MissingZeroGrad, FaultKind::DuplicateSeed}) {
    const Run run = faulty_run(kind, 2);
    const auto batch = check_run(trained_invariants().invariants, run);
    const auto live = online(run);
    CHECK(keys(batch) == keys(live));
    // Batch order is by detection step, then step.
    CHECK(std::is_sorted(batch.begin(), batch.end(), [](const ViolationReport& a, const ViolationReport& b) {
      return std::tie(a.detection_step, a.step) < std::tie(b.detection_step, b.step);
    }));
  }
}

TEST_CASE("reports are deduplicated per invariant, step and unit while occurrences count everything") {
  CheckSummary summary;
  const auto reports = check_run(trained_invariants().invariants, faulty_run(FaultKind::TpDivergence, 2), &summary);
  std::set<std::tuple<std::string, std::int64_t, std::string>> seen;
  std::map<std::string, std::size_t> per_inv;
  for (const auto& r : reports) {
    CHECK(seen.emplace(r.invariant, r.step, r.unit_key).second);
    ++per_inv[r.invariant];
  }
  CHECK(summary.reports == reports.size());
  for (const auto& [id, n] : per_inv) CHECK(summary.occurrences.at(id) >= n);
  std::size_t total = 0;
  for (const auto& [id, n] : summary.occurrences) total += n;
  CHECK(total > reports.size());
}

TEST_CASE("report JSON round-trips") {
  const auto reports = check_run(trained_invariants().invariants, faulty_run(FaultKind::OutputTruncation, 3));
  REQUIRE_FALSE(reports.empty());
  for (const auto& r : reports) {
    const auto j = report_to_json(r);
    CHECK(report_to_json(report_from_json(j)) == j);
    for (const char* key : {"invariant", "relation", "descriptors", "clause", "step", "detection_step", "unit", "meta", "example"}) {
      CHECK(j.contains(key));
    }
  }
}

TEST_CASE("a stream ending inside a span reports an incomplete-stream warning") {
  const auto recs = stamped({entry(0, "torch.optim.Optimizer.step", {}, meta(1))});
  CheckSummary summary;
  check_stream(trained_invariants().invariants, recs, CheckMode::Batch, &summary);
  REQUIRE(summary.warnings.size() == 1);
  CHECK(summary.warnings[0].find("IncompleteStreamWarning") != std::string::npos);
}

TEST_CASE("feeding after finish is an error") {
  Verifier v(trained_invariants().invariants);
  v.finish([](const ViolationReport&) {});
  CHECK_THROWS_AS(v.feed(entry(0, "f"), [](const ViolationReport&) {}), Error);
}

TEST_CASE("the selection manifest is the union of per-invariant requirements") {
  const auto& invs = trained_invariants().invariants;
  SelectionManifest expected;
  for (const auto& inv : invs) {
    const auto one = required_descriptors(std::span<const Invariant>(&inv, 1));
    expected.apis.insert(one.apis.begin(), one.apis.end());
    expected.vars.insert(one.vars.begin(), one.vars.end());
    expected.meta_keys.insert(one.meta_keys.begin(), one.meta_keys.end());
    expected.fields.insert(one.fields.begin(), one.fields.end());
  }
  const auto m = required_descriptors(invs);
  CHECK(m == expected);
  CHECK(manifest_from_json(manifest_to_json(m)) == m);
  CHECK(required_descriptors(std::span<const Invariant>{}) == SelectionManifest{});
}

TEST_CASE("manifest for the replicated-weight invariant") {
  Invariant inv;
  inv.core.relation = "Consistent";
  inv.core.descriptors = {VariableDescriptor{"torch.nn.Parameter", "data", std::nullopt},
                          VariableDescriptor{"torch.nn.Parameter", "data", std::nullopt}};
  inv.precondition.clauses = {{{ConditionType::Constant, "tensor_model_parallel", Value::boolean(false)},
                               {ConditionType::Unequal, "meta_vars.TP_RANK", std::nullopt}}};
  const auto m = required_descriptors(std::span<const Invariant>(&inv, 1));
  CHECK(m.apis.empty());
  CHECK(m.vars == std::set<std::pair<std::string, std::string>>{{"torch.nn.Parameter", "data"}});
  CHECK(m.meta_keys == std::set<std::string>{"TP_RANK", "step"});
  CHECK(m.fields == std::set<std::string>{"tensor_model_parallel"});
  auto j = manifest_to_json(m);
  j["schema"] = 2;
  CHECK_THROWS_AS(manifest_from_json(j), SchemaVersionMismatch);
}
