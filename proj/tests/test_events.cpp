// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "tinv/error.hpp"
#include "tinv/events.hpp"
#include "tinv/scan.hpp"

using namespace tinv;
using namespace tinv::testing;

TEST_CASE("entries and exits pair up under stack discipline") {
  const auto recs = stamped({entry(0, "outer"), entry(0, "inner"), var(0, "w", "data", dig("a")),
                             exit_rec(0, "inner"), exit_rec(0, "outer")});
  const EventLog log = reconstruct_events(recs);
  REQUIRE(log.calls.size() == 2);
  CHECK(log.calls[0].func == "outer");
  CHECK(log.calls[0].children.size() == 1);
  CHECK(log.calls[1].children.size() == 1);
  CHECK(log.calls[1].children[0].kind == EventRef::Kind::Change);
  CHECK(log.descendants(0).size() == 2);
  CHECK(log.roots.size() == 1);
  CHECK(log.calls[0].duration == 40);
}

TEST_CASE("an exit with no matching entry is an error") {
  CHECK_THROWS_AS(reconstruct_events(stamped({exit_rec(0, "f")})), ExitWithoutEntry);
  CHECK_THROWS_AS(reconstruct_events(stamped({entry(0, "f"), exit_rec(0, "g")})), ExitWithoutEntry);
}

TEST_CASE("threads keep separate stacks") {
  const auto recs = stamped({entry(0, "a", {}, meta(0), 1), entry(0, "b", {}, meta(0), 2),
                             exit_rec(0, "a", Value::none(), meta(0), 1), exit_rec(0, "b", Value::none(), meta(0), 2)});
  const EventLog log = reconstruct_events(recs);
  CHECK(log.calls.size() == 2);
  CHECK(log.roots.size() == 2);
}

TEST_CASE("variable changes fire only when the value changes") {
  const auto recs = stamped({var(0, "w", "data", dig("a")), var(0, "w", "data", dig("a")),
                             var(0, "w", "data", dig("b")), var(1, "w", "data", dig("b"))});
  const EventLog log = reconstruct_events(recs);
  REQUIRE(log.changes.size() == 3);
  CHECK_FALSE(log.changes[0].old_value.has_value());
  CHECK(*log.changes[1].old_value == dig("a"));
  CHECK(log.changes[2].pid == 1);
}

TEST_CASE("spans still open at the end are marked incomplete") {
  EventBuilder b;
  for (const auto& r : stamped({entry(0, "f"), entry(0, "g"), exit_rec(0, "g")})) b.feed(r);
  b.finish();
  CHECK(b.log().calls[0].incomplete);
  CHECK_FALSE(b.log().calls[1].incomplete);
}

TEST_CASE("random well-nested streams reconstruct as a bijection of entries and exits") {
  // Oracle: an independent stack walk records which exit index closes each entry index.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TraceRecord> recs;
    std::map<std::int64_t, std::vector<std::pair<std::string, std::size_t>>> open;
    std::map<std::size_t, std::size_t> expected;  // entry record -> exit record
    int counter = 0;
    for (int i = 0; i < 60; ++i) {
      const std::int64_t tid = static_cast<std::int64_t>(rng() % 3);
      auto& stack = open[tid];
      if (!stack.empty() && rng() % 2) {
        expected[stack.back().second] = recs.size();
        recs.push_back(exit_rec(0, stack.back().first, Value::none(), meta(0), tid));
        stack.pop_back();
      } else {
        const std::string f = "f" + std::to_string(counter++ % 5);
        stack.emplace_back(f, recs.size());
        recs.push_back(entry(0, f, {}, meta(0), tid));
      }
    }
    recs = stamped(recs);
    EventBuilder b;
    std::map<std::size_t, std::size_t> closed_at;  // call index -> exit record
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (auto c = b.feed(recs[i])) closed_at[*c] = i;
    }
    const auto& log = b.log();
    std::size_t complete = 0;
    for (std::size_t c = 0; c < log.calls.size(); ++c) {
      if (!closed_at.count(c)) continue;
      ++complete;
      CHECK(log.calls[c].exit->ts == recs[closed_at[c]].ts);
      // The call's entry is the record the oracle paired with this exit.
      bool found = false;
      for (const auto& [e, x] : expected) {
        if (x == closed_at[c]) {
          CHECK(recs[e].ts == log.calls[c].entry.ts);
          found = true;
        }
      }
      CHECK(found);
    }
    CHECK(complete == expected.size());
  }
}

TEST_CASE("the scanner closes a step once every process has moved past it") {
  UnitScanner scanner({0, 1});
  std::vector<Unit> units;
  auto sink = [&](Unit&& u) { units.push_back(std::move(u)); };
  scanner.feed(var(0, "w", "data", dig("a"), meta(1)), sink);
  scanner.feed(var(1, "w", "data", dig("a"), meta(1)), sink);
  scanner.feed(var(0, "w", "data", dig("b"), meta(2)), sink);
  CHECK(units.empty());
  scanner.feed(var(1, "w", "data", dig("b"), meta(2)), sink);
  REQUIRE(units.size() == 1);
  const auto& step = std::get<StepUnit>(units[0]);
  CHECK(step.step == 1);
  CHECK(step.vars.at({"torch.nn.Parameter", "data"}).at("w").size() == 2);
  CHECK(scanner.progress() == 2);
}

TEST_CASE("a straggler does not hold back checking for more than one step") {
  UnitScanner scanner({0, 1});
  std::vector<std::int64_t> closed;
  auto sink = [&](Unit&& u) {
    if (auto* s = std::get_if<StepUnit>(&u)) closed.push_back(s->step);
  };
  scanner.feed(var(1, "w", "data", dig("a"), meta(1)), sink);
  scanner.feed(var(0, "w", "data", dig("a"), meta(1)), sink);
  scanner.feed(var(0, "w", "data", dig("a"), meta(2)), sink);
  CHECK(closed.empty());
  scanner.feed(var(0, "w", "data", dig("a"), meta(3)), sink);
  CHECK(closed == std::vector<std::int64_t>{1});
}

TEST_CASE("spans become units with entry fields and descendants") {
  const auto recs = stamped({entry(0, "opt.step", {Value::integer(3)}, meta(1)), entry(0, "adamw", {}, meta(1)),
                             var(0, "w", "data", dig("x"), meta(1)), exit_rec(0, "adamw", Value::none(), meta(1)),
                             exit_rec(0, "opt.step", Value::none(), meta(1))});
  const auto units = scan_records(recs, {0});
  const SpanUnit* outer = nullptr;
  for (const auto& u : units) {
    if (auto* s = std::get_if<SpanUnit>(&u); s && s->func == "opt.step") outer = s;
  }
  REQUIRE(outer != nullptr);
  CHECK(outer->descendants.size() == 2);
  CHECK(outer->view.at("args.0") == Value::integer(3));
  CHECK(outer->view.at("meta_vars.step") == Value::integer(1));
}
