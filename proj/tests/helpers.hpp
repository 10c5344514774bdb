// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

// Record builders shared by the unit tests.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tinv/trace.hpp"

namespace tinv::testing {

inline MetaVars meta(std::int64_t step, std::int64_t tp = 0, std::int64_t dp = 0) {
  return {{"step", Value::integer(step)}, {"TP_RANK", Value::integer(tp)}, {"DP_RANK", Value::integer(dp)}};
}

inline TraceRecord entry(std::int64_t pid, const std::string& func, std::vector<Value> args = {},
                         MetaVars m = meta(0), std::int64_t tid = 0) {
  TraceRecord r;
  r.kind = RecordKind::FuncEntry;
  r.pid = pid;
  r.tid = tid;
  r.func = func;
  r.args = std::move(args);
  r.meta = std::move(m);
  return r;
}

inline TraceRecord exit_rec(std::int64_t pid, const std::string& func, Value ret = Value::none(),
                            MetaVars m = meta(0), std::int64_t tid = 0) {
  TraceRecord r;
  r.kind = RecordKind::FuncExit;
  r.pid = pid;
  r.tid = tid;
  r.func = func;
  r.ret = std::move(ret);
  r.meta = std::move(m);
  return r;
}

inline TraceRecord var(std::int64_t pid, const std::string& name, const std::string& attr, Value v,
                       MetaVars m = meta(0), const std::string& type = "torch.nn.Parameter") {
  TraceRecord r;
  r.kind = RecordKind::VarState;
  r.pid = pid;
  r.var_type = type;
  r.var_id = "rank" + std::to_string(pid) + "/" + name;
  r.attr = attr;
  r.value = std::move(v);
  r.meta = std::move(m);
  return r;
}

inline Value dig(const std::string& hex, std::vector<std::int64_t> shape = {4}, const std::string& dtype = "float32") {
  return Value::digest(hex, std::move(shape), dtype);
}

// Assigns increasing timestamps in stream order.
inline std::vector<TraceRecord> stamped(std::vector<TraceRecord> recs) {
  std::int64_t ts = 0;
  for (auto& r : recs) r.ts = (ts += 10);
  return recs;
}

}  // namespace tinv::testing
