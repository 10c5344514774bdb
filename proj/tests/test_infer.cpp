// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "helpers.hpp"
#include "tinv/error.hpp"
#include "tinv/infer.hpp"

using namespace tinv;
using namespace tinv::testing;

namespace {

const Invariant* find_consistent(const InvariantSet& set, const std::string& attr) {
  for (const auto& inv : set.invariants) {
    if (inv.core.relation != "Consistent") continue;
    const auto& d0 = std::get<VariableDescriptor>(inv.core.descriptors[0]);
    const auto& d1 = std::get<VariableDescriptor>(inv.core.descriptors[1]);
    if (d0.attr == attr && d1.attr == attr) return &inv;
  }
  return nullptr;
}

Run api_only_run() {
  Run run;
  run.id = "api";
  ProcessTrace p;
  for (std::int64_t s = 0; s < 3; ++s) {
    for (const char* f : {"f", "g"}) {
      p.records.push_back(entry(0, f, {Value::integer(s)}, meta(s)));
      p.records.push_back(exit_rec(0, f, Value::none(), meta(s)));
    }
  }
  p.records = stamped(p.records);
  run.processes.push_back(std::move(p));
  return run;
}

}  // namespace

TEST_CASE("hypothesis ids are stable content hashes") {
  HypothesisCore h;
  h.relation = "APISequence";
  h.descriptors = {APIDescriptor{"f", {}, std::nullopt}, APIDescriptor{"g", {}, std::nullopt}};
  const auto id = hypothesis_id(h);
  CHECK(id.size() == 16);
  CHECK(id == hypothesis_id(h));
  h.descriptors.push_back(APIDescriptor{"h", {}, std::nullopt});
  CHECK(id != hypothesis_id(h));
}

TEST_CASE("a trace without variable states yields no Consistent invariants") {
  const std::vector<Run> runs = {api_only_run()};
  const auto set = infer(runs);
  CHECK_FALSE(set.invariants.empty());
  for (const auto& inv : set.invariants) CHECK(inv.core.relation != "Consistent");
}

TEST_CASE("invariants carry hypothesis ids, counts and source runs") {
  const auto& set = trained_invariants();
  REQUIRE_FALSE(set.invariants.empty());
  std::set<std::string> ids;
  for (const auto& inv : set.invariants) {
    CHECK(inv.id == hypothesis_id(inv.core));
    CHECK(inv.passing > 0);
    CHECK(inv.engine == kEngineVersion);
    CHECK_FALSE(inv.runs.empty());
    ids.insert(inv.id);
    if (inv.failing == 0) CHECK(inv.precondition.trivially_true());
  }
  CHECK(ids.size() == set.invariants.size());
  auto sorted = set.invariants;
  sort_invariants(sorted);
  CHECK(dump_invariants(InvariantSet{sorted, {}, false}) == dump_invariants(InvariantSet{set.invariants, {}, false}));
}

TEST_CASE("a 1:38 passing to failing ratio keeps the replicated-parameter invariant") {
  RunConfig cfg;
  cfg.tp_ranks = 4;
  cfg.dp_ranks = 1;
  cfg.n_params = 39;
  cfg.replicated_fraction = 1.0 / 39.0;
  cfg.n_steps = 3;
  cfg.seed = 4;
  const std::vector<Run> runs = {generate(cfg)};
  const auto set = infer(runs);
  const auto* inv = find_consistent(set, "data");
  REQUIRE(inv);
  // Each step: 6 rank pairs of the single replicated weight pass and
  // 6 pairs of each of the 38 partitioned weights fail.
  const std::size_t steps = static_cast<std::size_t>(cfg.n_steps) + 1;
  CHECK(inv->passing == 6 * steps);
  CHECK(inv->failing == 228 * steps);
  CHECK_FALSE(inv->precondition.trivially_true());
}

TEST_CASE("inference output does not depend on the number of jobs") {
  InferOptions one;
  one.jobs = 1;
  InferOptions four;
  four.jobs = 4;
  CHECK(dump_invariants(infer(training_runs(), one)) == dump_invariants(infer(training_runs(), four)));
}

TEST_CASE("reservoirs keep at most max_examples and exact counts") {
  InferOptions opts;
  opts.relations = {"Consistent"};
  opts.max_examples = 10;
  const auto small = infer(training_runs(), opts);
  opts.max_examples = 10000;
  const auto full = infer(training_runs(), opts);
  REQUIRE(small.invariants.size() <= full.invariants.size());
  for (const auto& inv : small.invariants) {
    const auto it = std::find_if(full.invariants.begin(), full.invariants.end(),
                                 [&](const Invariant& x) { return x.id == inv.id; });
    if (it == full.invariants.end()) continue;
    CHECK(it->passing == inv.passing);
    CHECK(it->failing == inv.failing);
  }
}

TEST_CASE("hypothesis overflow marks the set partial") {
  InferOptions opts;
  opts.max_hypotheses = 2;
  const auto set = infer(training_runs(), opts);
  CHECK(set.partial);
  CHECK_FALSE(set.warnings.empty());
  CHECK_FALSE(trained_invariants().partial);
}

TEST_CASE("unknown relation names are rejected") {
  InferOptions opts;
  opts.relations = {"Bogus"};
  CHECK_THROWS_AS(infer(training_runs(), opts), Error);
}

TEST_CASE("capping keeps a stable, nested selection") {
  const auto& set = trained_invariants();
  CHECK(cap_invariants(set, 0).invariants.empty());
  const auto five = cap_invariants(set, 5);
  const auto ten = cap_invariants(set, 10);
  CHECK(five.invariants.size() == std::min<std::size_t>(5, set.invariants.size()));
  CHECK(dump_invariants(five) == dump_invariants(cap_invariants(set, 5)));
  for (const auto& inv : five.invariants) {
    CHECK(std::any_of(ten.invariants.begin(), ten.invariants.end(), [&](const Invariant& x) { return x.id == inv.id; }));
  }
  CHECK(cap_invariants(set, set.invariants.size() + 10).invariants.size() == set.invariants.size());
}

TEST_CASE("invariant files round-trip") {
  TempDir dir;
  const auto& set = trained_invariants();
  write_invariants(set, dir / "inv.json");
  const auto back = read_invariants(dir / "inv.json");
  CHECK(dump_invariants(back) == dump_invariants(set));
  CHECK(back.invariants.size() == set.invariants.size());

  auto j = json::parse(dump_invariants(set));
  j["schema"] = 2;
  CHECK_THROWS_AS(parse_invariants(j.dump()), SchemaVersionMismatch);
  CHECK_THROWS_AS(read_invariants(dir / "missing.json"), Error);
}
