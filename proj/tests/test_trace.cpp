// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "tinv/digest.hpp"
#include "tinv/error.hpp"
#include "tinv/trace.hpp"

using namespace tinv;
using namespace tinv::testing;

namespace {

Value random_value(std::mt19937_64& rng, int depth = 0) {
  std::uniform_int_distribution<int> kind(0, depth > 1 ? 5 : 6);
  switch (kind(rng)) {
    case 0: return Value::none();
    case 1: return Value::boolean(rng() & 1);
    case 2: return Value::integer(static_cast<std::int64_t>(rng() % 2001) - 1000);
    case 3: return Value::real(std::uniform_real_distribution<double>(-1e6, 1e6)(rng));
    case 4: return Value::string("s" + std::to_string(rng() % 97) + "\"\\\n\t\xc3\xa9");
    case 5: {
      std::vector<std::int64_t> shape;
      for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) shape.push_back(static_cast<std::int64_t>(rng() % 9));
      return Value::digest(sha256_hex(std::to_string(rng())).substr(0, 32), shape, rng() & 1 ? "float32" : "int64");
    }
    default: {
      Value::Fields f;
      for (int i = 0, n = static_cast<int>(rng() % 3); i < n; ++i) f["f" + std::to_string(i)] = random_value(rng, depth + 1);
      return Value::structure(std::move(f));
    }
  }
}

Value random_plain(std::mt19937_64& rng) {
  switch (rng() % 4) {
    case 0: return Value::boolean(rng() & 1);
    case 1: return Value::integer(static_cast<std::int64_t>(rng() % 50));
    case 2: return Value::real(0.25 * static_cast<double>(rng() % 40));
    default: return Value::string("stage" + std::to_string(rng() % 3));
  }
}

TraceRecord random_record(std::mt19937_64& rng) {
  TraceRecord r;
  r.kind = static_cast<RecordKind>(rng() % 3);
  r.ts = static_cast<std::int64_t>(rng() % 1000000);
  r.pid = static_cast<std::int64_t>(rng() % 8);
  r.tid = static_cast<std::int64_t>(rng() % 3);
  if (r.kind == RecordKind::VarState) {
    r.var_type = "torch.nn.Parameter";
    r.var_id = "rank" + std::to_string(r.pid) + "/w" + std::to_string(rng() % 5);
    r.attr = rng() & 1 ? "data" : "grad";
    r.value = random_value(rng);
  } else {
    r.func = "api." + std::to_string(rng() % 4);
    if (r.kind == RecordKind::FuncEntry) {
      for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) r.args.push_back(random_value(rng));
    } else {
      r.ret = random_value(rng);
      if (rng() % 5 == 0) r.exc = "RuntimeError";
    }
  }
  for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) r.meta["k" + std::to_string(i)] = random_plain(rng);
  return r;
}

}  // namespace

TEST_CASE("records survive a serialize/parse round trip byte for byte") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 2000; ++i) {
    const TraceRecord r = random_record(rng);
    const std::string line = serialize_record(r);
    const TraceRecord back = parse_record(line, 1);
    CHECK(serialize_record(back) == line);
    CHECK(back.kind == r.kind);
    CHECK(back.args == r.args);
    CHECK(back.value == r.value);
    CHECK(back.meta == r.meta);
  }
}

TEST_CASE("a whole trace round-trips with its header") {
  std::mt19937_64 rng(7);
  std::vector<TraceRecord> recs;
  for (int i = 0; i < 50; ++i) recs.push_back(random_record(rng));
  const std::string text = serialize_trace(recs);
  CHECK(text.rfind(header_line(), 0) == 0);
  CHECK(serialize_trace(parse_trace(text)) == text);
}

TEST_CASE("value snapshots use the documented wire shape") {
  CHECK(Value::none().to_json().dump() == R"({"k":"none"})");
  CHECK(Value::boolean(true).to_json().dump() == R"({"k":"bool","v":true})");
  CHECK(Value::integer(3).to_json().dump() == R"({"k":"scalar","v":3})");
  CHECK(Value::string("a").to_json().dump() == R"({"k":"str","v":"a"})");
  CHECK(dig("ab", {2, 3}).to_json().dump() == R"({"d":"ab","dtype":"float32","k":"digest","shape":[2,3]})");
  CHECK(Value::structure({{"x", Value::integer(1)}}).to_json().dump() ==
        R"({"fields":{"x":{"k":"scalar","v":1}},"k":"struct"})");
}

TEST_CASE("digest values compare by digest string and expose shape and dtype") {
  CHECK(dig("aa", {2}) == dig("aa", {2}));
  CHECK(dig("aa") != dig("bb"));
  CHECK(dig("aa", {8, 128}, "int64").attribute("shape")->as_string() == "[8,128]");
  CHECK(dig("aa", {8, 128}, "int64").attribute("dtype")->as_string() == "int64");
  CHECK_FALSE(dig("aa").is_plain());
  CHECK(Value::integer(1).is_plain());
}

TEST_CASE("malformed lines report their line number") {
  const std::string text = header_line() + "\n" +
                           R"({"kind":"func_entry","ts":1,"pid":0,"tid":0,"func":"f","args":[]})" + "\n" +
                           "{not json\n";
  try {
    parse_trace(text);
    FAIL("expected MalformedRecord");
  } catch (const MalformedRecord& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_record(R"({"kind":"bogus","ts":1,"pid":0,"tid":0})", 1), MalformedRecord);
  CHECK_THROWS_AS(parse_record(R"({"kind":"var_state","ts":1,"pid":0,"tid":0,"var_type":"T","var_id":"a","attr":"x"})", 1),
                  MalformedRecord);
}

TEST_CASE("schema versions other than 1 are refused") {
  CHECK_THROWS_AS(parse_trace(std::string(R"({"kind":"header","schema":2})") + "\n"), SchemaVersionMismatch);
  // A stream without a header is read as the current schema.
  CHECK(parse_trace(std::string(R"({"kind":"func_entry","ts":1,"pid":0,"tid":0,"func":"f","args":[]})")).size() == 1);
}

TEST_CASE("var id suffix aligns variables across ranks") {
  CHECK(var_id_suffix("rank3/layers.0.weight") == "layers.0.weight");
  CHECK(var_id_suffix("plain") == "plain");
}

TEST_CASE("merge_by_step interleaves processes one step at a time") {
  Run run;
  for (std::int64_t pid = 0; pid < 3; ++pid) {
    ProcessTrace p;
    p.pid = pid;
    for (std::int64_t s = 0; s < 4; ++s) {
      p.records.push_back(entry(pid, "f", {}, meta(s)));
      p.records.push_back(exit_rec(pid, "f", Value::none(), meta(s)));
    }
    run.processes.push_back(p);
  }
  const auto merged = merge_by_step(run);
  REQUIRE(merged.size() == 24);
  std::int64_t last = 0;
  for (const auto& r : merged) {
    CHECK(*r.step() >= last);
    last = *r.step();
  }
  // Per-process order is preserved.
  for (std::int64_t pid = 0; pid < 3; ++pid) {
    std::vector<TraceRecord> mine;
    for (const auto& r : merged) {
      if (r.pid == pid) mine.push_back(r);
    }
    for (std::size_t i = 0; i < mine.size(); ++i) {
      CHECK(serialize_record(mine[i]) == serialize_record(run.processes[static_cast<std::size_t>(pid)].records[i]));
    }
  }
}

TEST_CASE("runs are written and loaded per process") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "tinv_trace_test_run";
  fs::remove_all(dir);
  Run run;
  run.id = "x";
  for (std::int64_t pid = 0; pid < 2; ++pid) {
    ProcessTrace p;
    p.pid = pid;
    p.records = stamped({entry(pid, "f"), exit_rec(pid, "f")});
    run.processes.push_back(p);
  }
  write_run(run, dir);
  const Run back = load_run(dir);
  CHECK(back.id == "tinv_trace_test_run");
  REQUIRE(back.processes.size() == 2);
  CHECK(back.processes[1].pid == 1);
  CHECK(back.record_count() == 4);
  fs::remove_all(dir);
}

TEST_CASE("tensor digest matches an independent SHA-256 implementation") {
  // Expected values computed with Python hashlib over the documented layout.
  const float f[] = {1, 2, 3, 4};
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(f);
  const std::int64_t s22[] = {2, 2};
  const std::int64_t s4[] = {4};
  CHECK(tensor_digest("float32", s22, {bytes, 16}) == "eb0b2220ce4dd697a9144f5b3ed90080");
  CHECK(tensor_digest("float32", s4, {bytes, 16}) == "e7d537529a115d47db110cdc4d310c9f");
  const std::int64_t seven = 7;
  CHECK(tensor_digest("int64", {}, {reinterpret_cast<const std::uint8_t*>(&seven), 8}) ==
        "8b26fe54bd90d78f92f1c12efe70eea8");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const Value v = digest_value("float32", s22, {bytes, 16});
  CHECK(v.shape() == std::vector<std::int64_t>{2, 2});
  CHECK(v.as_string().size() == kDigestHexLength);
}
