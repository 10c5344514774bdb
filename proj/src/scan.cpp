// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include "tinv/scan.hpp"

#include <algorithm>

namespace tinv {

namespace {

void add_meta(FieldView& view, const MetaVars& meta) {
  for (const auto& [k, v] : meta) view.emplace("meta_vars." + k, v);
}

ChildKey child_key(const EventLog& log, const EventRef& ref) {
  ChildKey key;
  if (ref.kind == EventRef::Kind::Call) {
    key.is_call = true;
    key.name = log.calls[ref.index].func;
  } else {
    const auto& ch = log.changes[ref.index];
    key.name = ch.var_type;
    key.attr = ch.attr;
    key.value = ch.new_value;
  }
  return key;
}

}  // namespace

FieldView entry_view(const TraceRecord& entry) {
  FieldView view;
  add_meta(view, entry.meta);
  for (std::size_t i = 0; i < entry.args.size(); ++i) {
    const std::string base = "args." + std::to_string(i);
    const Value& a = entry.args[i];
    view.emplace(base, a);
    if (a.is_digest()) {
      view.emplace(base + ".shape", *a.attribute("shape"));
      view.emplace(base + ".dtype", *a.attribute("dtype"));
    } else if (a.kind() == Value::Kind::Struct) {
      for (const auto& [name, f] : a.fields()) {
        if (f.is_plain()) view.emplace(base + "." + name, f);
      }
    }
  }
  return view;
}

std::int64_t unit_step(const Unit& u) {
  return std::visit([](const auto& x) { return x.step; }, u);
}

UnitScanner::UnitScanner(std::set<std::int64_t> expected_pids) : pids_(std::move(expected_pids)) {}

std::int64_t UnitScanner::window_of(const TraceRecord& rec) {
  auto& cur = process_step_[rec.pid];
  if (auto s = rec.step()) cur = std::max(cur, *s);
  max_step_ = std::max(max_step_, cur);
  return cur;
}

StepUnit& UnitScanner::step_unit(std::int64_t step) {
  auto [it, inserted] = pending_.try_emplace(step);
  if (inserted) it->second.step = step;
  return it->second;
}

void UnitScanner::close_window(std::pair<std::int64_t, std::int64_t> key, const Sink& emit) {
  auto it = windows_.find(key);
  if (it == windows_.end()) return;
  ThreadWindow& w = it->second;
  if (!w.first_calls.empty()) {
    WindowUnit unit;
    unit.step = w.step;
    unit.pid = key.first;
    unit.tid = key.second;
    unit.first_calls = std::move(w.first_calls);
    unit.view = std::move(w.view);
    unit.meta = std::move(w.meta);
    emit(std::move(unit));
  }
  windows_.erase(it);
}

void UnitScanner::close_ready_steps(const Sink& emit, bool all) {
  while (!pending_.empty()) {
    auto it = pending_.begin();
    const std::int64_t s = it->first;
    bool ready = all || max_step_ >= s + 2;
    if (!ready) {
      ready = std::all_of(pids_.begin(), pids_.end(), [&](std::int64_t pid) {
        auto p = process_step_.find(pid);
        return p != process_step_.end() && p->second > s;
      });
    }
    if (!ready) break;
    StepUnit unit = std::move(it->second);
    pending_.erase(it);
    emit(std::move(unit));
  }
}

void UnitScanner::feed(const TraceRecord& rec, const Sink& emit) {
  pids_.insert(rec.pid);
  const std::int64_t step = window_of(rec);
  const auto thread = std::make_pair(rec.pid, rec.tid);
  if (auto it = windows_.find(thread); it != windows_.end() && it->second.step != step) {
    close_window(thread, emit);
  }
  ThreadWindow& window = windows_[thread];
  window.step = step;

  switch (rec.kind) {
    case RecordKind::FuncEntry: {
      events_.feed(rec);
      FieldView view = entry_view(rec);
      if (window.seen.insert(rec.func).second) {
        if (window.first_calls.empty()) {
          window.view = view;
          window.meta = rec.meta;
        }
        window.first_calls.push_back(rec.func);
      }
      step_unit(step).calls[rec.func].push_back({rec.pid, rec.tid, rec.args, std::move(view), rec.meta});
      break;
    }
    case RecordKind::FuncExit: {
      auto closed = events_.feed(rec);
      const auto& log = events_.log();
      const APICallEvent& call = log.calls[*closed];
      SpanUnit unit;
      unit.step = call.entry.step().value_or(step);
      unit.pid = rec.pid;
      unit.tid = rec.tid;
      unit.func = call.func;
      unit.args = call.entry.args;
      unit.ret = rec.ret;
      unit.view = entry_view(call.entry);
      unit.meta = call.entry.meta;
      for (const auto& ref : log.descendants(*closed)) unit.descendants.push_back(child_key(log, ref));
      emit(std::move(unit));
      break;
    }
    case RecordKind::VarState: {
      events_.feed(rec);
      const auto var_key = std::make_pair(rec.pid, rec.var_id);
      auto& state = var_state_[var_key];
      state[rec.attr] = rec.value;
      FieldView view(state.begin(), state.end());
      add_meta(view, rec.meta);
      auto& group = step_unit(step).vars[{rec.var_type, rec.attr}][std::string(var_id_suffix(rec.var_id))];
      auto same = std::find_if(group.begin(), group.end(),
                               [&](const VarObservation& o) { return o.var_id == rec.var_id && o.pid == rec.pid; });
      VarObservation obs{rec.var_id, rec.pid, rec.value, std::move(view), rec.meta};
      if (same != group.end()) {
        *same = std::move(obs);
      } else {
        group.push_back(std::move(obs));
      }
      break;
    }
  }
  close_ready_steps(emit, false);
}

void UnitScanner::finish(const Sink& emit) {
  std::vector<std::pair<std::int64_t, std::int64_t>> keys;
  for (const auto& [k, _] : windows_) keys.push_back(k);
  for (const auto& k : keys) close_window(k, emit);
  events_.finish();
  for (const auto& call : events_.log().calls) {
    if (call.incomplete) {
      incomplete_.push_back(call.func + " (pid " + std::to_string(call.pid) + ", tid " +
                            std::to_string(call.tid) + ")");
    }
  }
  close_ready_steps(emit, true);
}

std::vector<Unit> scan_records(std::span<const TraceRecord> records, std::set<std::int64_t> expected_pids) {
  std::vector<Unit> units;
  UnitScanner scanner(std::move(expected_pids));
  auto sink = [&](Unit&& u) { units.push_back(std::move(u)); };
  for (const auto& r : records) scanner.feed(r, sink);
  scanner.finish(sink);
  return units;
}

std::vector<Unit> scan_run(const Run& run) {
  std::set<std::int64_t> pids;
  for (const auto& p : run.processes) pids.insert(p.pid);
  auto merged = merge_by_step(run);
  return scan_records(merged, std::move(pids));
}

}  // namespace tinv
