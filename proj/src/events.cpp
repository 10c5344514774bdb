// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include "tinv/events.hpp"

#include "tinv/error.hpp"

namespace tinv {

std::vector<EventRef> EventLog::descendants(std::size_t index) const {
  std::vector<EventRef> out;
  std::vector<std::size_t> pending{index};
  while (!pending.empty()) {
    std::size_t cur = pending.back();
    pending.pop_back();
    const auto& kids = calls[cur].children;
    // Reverse push keeps pre-order output when popping.
    std::vector<std::size_t> nested;
    for (const auto& c : kids) {
      out.push_back(c);
      if (c.kind == EventRef::Kind::Call) nested.push_back(c.index);
    }
    for (auto it = nested.rbegin(); it != nested.rend(); ++it) pending.push_back(*it);
  }
  return out;
}

void EventBuilder::attach(std::int64_t pid, std::int64_t tid, EventRef ref) {
  auto it = stacks_.find({pid, tid});
  if (it == stacks_.end() || it->second.empty()) {
    log_.roots.push_back(ref);
  } else {
    log_.calls[it->second.back()].children.push_back(ref);
  }
}

std::optional<std::size_t> EventBuilder::feed(const TraceRecord& rec) {
  switch (rec.kind) {
    case RecordKind::FuncEntry: {
      APICallEvent call;
      call.func = rec.func;
      call.pid = rec.pid;
      call.tid = rec.tid;
      call.entry = rec;
      std::size_t idx = log_.calls.size();
      log_.calls.push_back(std::move(call));
      attach(rec.pid, rec.tid, {EventRef::Kind::Call, idx});
      stacks_[{rec.pid, rec.tid}].push_back(idx);
      return std::nullopt;
    }
    case RecordKind::FuncExit: {
      auto& stack = stacks_[{rec.pid, rec.tid}];
      if (stack.empty() || log_.calls[stack.back()].func != rec.func) {
        throw ExitWithoutEntry("exit of \"" + rec.func + "\" at ts " + std::to_string(rec.ts) +
                               " (pid " + std::to_string(rec.pid) + ", tid " +
                               std::to_string(rec.tid) + ") has no matching entry");
      }
      std::size_t idx = stack.back();
      stack.pop_back();
      auto& call = log_.calls[idx];
      call.exit = rec;
      call.duration = rec.ts - call.entry.ts;
      return idx;
    }
    case RecordKind::VarState: {
      auto key = std::make_tuple(rec.pid, rec.var_id, rec.attr);
      auto it = last_.find(key);
      if (it != last_.end() && it->second == rec.value) return std::nullopt;
      VarChangeEvent ch;
      ch.var_type = rec.var_type;
      ch.var_id = rec.var_id;
      ch.attr = rec.attr;
      if (it != last_.end()) ch.old_value = it->second;
      ch.new_value = rec.value;
      ch.ts = rec.ts;
      ch.pid = rec.pid;
      ch.tid = rec.tid;
      ch.meta = rec.meta;
      last_[key] = rec.value;
      std::size_t idx = log_.changes.size();
      log_.changes.push_back(std::move(ch));
      attach(rec.pid, rec.tid, {EventRef::Kind::Change, idx});
      return std::nullopt;
    }
  }
  return std::nullopt;
}

void EventBuilder::finish() {
  for (auto& [key, stack] : stacks_) {
    for (std::size_t idx : stack) log_.calls[idx].incomplete = true;
    stack.clear();
  }
}

EventLog reconstruct_events(std::span<const TraceRecord> records) {
  EventBuilder builder;
  for (const auto& r : records) builder.feed(r);
  builder.finish();
  return builder.take();
}

}  // namespace tinv
