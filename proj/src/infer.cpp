// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include "tinv/infer.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "tinv/digest.hpp"
#include "tinv/error.hpp"

namespace tinv {

namespace {

json descriptors_json(const HypothesisCore& h) {
  json arr = json::array();
  for (const auto& d : h.descriptors) arr.push_back(descriptor_to_json(d));
  return arr;
}

std::string sort_key(const Invariant& inv) {
  return inv.core.relation + "\n" + descriptors_json(inv.core).dump() + "\n" + params_to_json(inv.core.params).dump();
}

std::size_t specificity(const HypothesisCore& h) {
  std::size_t n = 0;
  for (const auto& d : h.descriptors) {
    if (const auto* api = std::get_if<APIDescriptor>(&d)) {
      n += api->arg_constraints.size() + (api->return_constraint ? 1 : 0);
    } else {
      n += std::get<VariableDescriptor>(d).value_constraint ? 1 : 0;
    }
  }
  return n;
}

// Reservoir sampling with a per-hypothesis generator so results do not
// depend on scheduling.
class Reservoir {
 public:
  Reservoir(std::vector<Example>& store, std::size_t& count, std::size_t cap, std::uint64_t seed)
      : store_(store), count_(count), cap_(cap), rng_(seed) {}

  void add(Example&& e) {
    ++count_;
    if (store_.size() < cap_) {
      store_.push_back(std::move(e));
      return;
    }
    std::uniform_int_distribution<std::size_t> pick(0, count_ - 1);
    const std::size_t j = pick(rng_);
    if (j < cap_) store_[j] = std::move(e);
  }

 private:
  std::vector<Example>& store_;
  std::size_t& count_;
  std::size_t cap_;
  std::mt19937_64 rng_;
};

std::uint64_t seed_of(const std::string& id, const std::string& run_id) {
  return std::stoull(sha256_hex(id + "\n" + run_id).substr(0, 16), nullptr, 16);
}

std::optional<Invariant> validate(Hypothesis& h, const std::vector<std::vector<Unit>>& units,
                                  const std::vector<std::string>& run_ids, const InferOptions& opts) {
  const Relation& rel = RelationRegistry::builtin().get(h.core.relation);
  for (std::size_t r = 0; r < units.size(); ++r) collect_examples(h, units[r], run_ids[r], opts.max_examples);
  if (h.passing.empty()) return std::nullopt;
  const Blocklist blocked = rel.blocklist(h.core, h.passing, h.failing);
  auto pre = deduce(h.passing, h.failing, blocked, opts.deduce);
  if (!pre) return std::nullopt;  // superficial
  Invariant inv;
  inv.id = hypothesis_id(h.core);
  inv.core = h.core;
  inv.precondition = std::move(*pre);
  inv.passing = h.passing_count;
  inv.failing = h.failing_count;
  inv.runs = run_ids;
  return inv;
}

template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& body) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < n; i = next++) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::string hypothesis_id(const HypothesisCore& h) {
  json doc = {{"relation", h.relation}, {"params", params_to_json(h.params)}, {"descriptors", descriptors_json(h)}};
  return sha256_hex(doc.dump()).substr(0, 16);
}

json invariant_to_json(const Invariant& inv) {
  return {{"id", inv.id},
          {"relation", inv.core.relation},
          {"params", params_to_json(inv.core.params)},
          {"descriptors", descriptors_json(inv.core)},
          {"precondition", precondition_to_json(inv.precondition)},
          {"stats", {{"passing", inv.passing}, {"failing", inv.failing}}},
          {"provenance", {{"runs", inv.runs}, {"engine", inv.engine}}}};
}

Invariant invariant_from_json(const json& j) {
  Invariant inv;
  inv.core.relation = j.at("relation").get<std::string>();
  inv.core.params = params_from_json(j.value("params", json::object()));
  for (const auto& d : j.at("descriptors")) inv.core.descriptors.push_back(descriptor_from_json(d));
  RelationRegistry::builtin().get(inv.core.relation).validate(inv.core);
  inv.id = j.contains("id") ? j.at("id").get<std::string>() : hypothesis_id(inv.core);
  inv.precondition = j.contains("precondition") ? precondition_from_json(j.at("precondition")) : Precondition::always();
  if (auto it = j.find("stats"); it != j.end()) {
    inv.passing = it->value("passing", std::size_t{0});
    inv.failing = it->value("failing", std::size_t{0});
  }
  if (auto it = j.find("provenance"); it != j.end()) {
    inv.runs = it->value("runs", std::vector<std::string>{});
    inv.engine = it->value("engine", std::string(kEngineVersion));
  }
  return inv;
}

json invariant_set_to_json(const InvariantSet& set) {
  json invs = json::array();
  for (const auto& inv : set.invariants) invs.push_back(invariant_to_json(inv));
  return {{"schema", kSchemaVersion},
          {"engine", std::string(kEngineVersion)},
          {"invariants", std::move(invs)},
          {"warnings", set.warnings},
          {"partial", set.partial}};
}

InvariantSet invariant_set_from_json(const json& j) {
  const int schema = j.value("schema", -1);
  if (schema != kSchemaVersion) throw SchemaVersionMismatch(schema);
  InvariantSet set;
  for (const auto& inv : j.at("invariants")) set.invariants.push_back(invariant_from_json(inv));
  set.warnings = j.value("warnings", std::vector<std::string>{});
  set.partial = j.value("partial", false);
  return set;
}

std::string dump_invariants(const InvariantSet& set) { return invariant_set_to_json(set).dump(2) + "\n"; }

InvariantSet parse_invariants(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("invariant file is not valid JSON: ") + e.what());
  }
  return invariant_set_from_json(j);
}

void write_invariants(const InvariantSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << dump_invariants(set);
}

InvariantSet read_invariants(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_invariants(ss.str());
}

std::set<std::string> default_api_blocklist() {
  return {"torch.cuda.is_available", "torch.jit.is_scripting", "torch.get_default_dtype", "torch.is_grad_enabled"};
}

void collect_examples(Hypothesis& h, std::span<const Unit> units, const std::string& run_id,
                      std::size_t max_examples) {
  const Relation& rel = RelationRegistry::builtin().get(h.core.relation);
  const std::string id = hypothesis_id(h.core);
  const std::size_t pass_cap = max_examples / 2 + max_examples % 2;
  const std::size_t fail_cap = max_examples / 2;
  Reservoir pass(h.passing, h.passing_count, pass_cap, seed_of(id, run_id + "/pass"));
  Reservoir fail(h.failing, h.failing_count, fail_cap, seed_of(id, run_id + "/fail"));
  bool any = false;
  for (const auto& u : units) {
    rel.examples(h.core, u, [&](Example&& e) {
      any = true;
      if (e.verdict == Verdict::Passing) {
        pass.add(std::move(e));
      } else {
        fail.add(std::move(e));
      }
    });
  }
  if (any && std::find(h.source_traces.begin(), h.source_traces.end(), run_id) == h.source_traces.end()) {
    h.source_traces.push_back(run_id);
  }
}

InvariantSet infer(std::span<const Run> runs, const InferOptions& opts) {
  if (runs.empty()) throw Error("inference needs at least one run");
  InvariantSet result;
  std::vector<std::vector<Unit>> units(runs.size());
  std::vector<std::string> run_ids;
  for (const auto& r : runs) run_ids.push_back(r.id);
  parallel_for(runs.size(), opts.jobs, [&](std::size_t i) { units[i] = scan_run(runs[i]); });
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].record_count() == 0) result.warnings.push_back("empty trace: " + runs[i].id);
  }

  auto& registry = RelationRegistry::builtin();
  const auto names = opts.relations.empty() ? registry.names() : opts.relations;
  for (const auto& name : names) {
    const Relation& rel = registry.get(name);
    std::set<HypothesisCore> cores;
    for (const auto& u : units) rel.generate(u, opts.gen, cores);
    if (cores.size() > opts.max_hypotheses) {
      result.partial = true;
      result.warnings.push_back(name + ": " + std::to_string(cores.size()) + " hypotheses, kept the first " +
                                std::to_string(opts.max_hypotheses));
      cores.erase(std::next(cores.begin(), static_cast<std::ptrdiff_t>(opts.max_hypotheses)), cores.end());
    }
    std::vector<Hypothesis> hypos;
    for (const auto& c : cores) hypos.push_back(Hypothesis{c, {}, {}, 0, 0, {}});
    std::vector<std::optional<Invariant>> found(hypos.size());
    parallel_for(hypos.size(), opts.jobs, [&](std::size_t i) {
      found[i] = validate(hypos[i], units, run_ids, opts);
      hypos[i] = Hypothesis{};  // release examples early
    });
    for (auto& f : found) {
      if (f) result.invariants.push_back(std::move(*f));
    }
  }
  sort_invariants(result.invariants);
  return result;
}

void sort_invariants(std::vector<Invariant>& invs) {
  std::vector<std::pair<std::string, std::size_t>> keys;
  for (std::size_t i = 0; i < invs.size(); ++i) keys.emplace_back(sort_key(invs[i]), i);
  std::sort(keys.begin(), keys.end());
  std::vector<Invariant> out;
  out.reserve(invs.size());
  for (const auto& [_, i] : keys) out.push_back(std::move(invs[i]));
  invs = std::move(out);
}

InvariantSet cap_invariants(InvariantSet set, std::size_t cap) {
  if (set.invariants.size() <= cap) return set;
  const auto names = RelationRegistry::builtin().names();
  auto rank = [&](const std::string& rel) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), rel) - names.begin());
  };
  std::stable_sort(set.invariants.begin(), set.invariants.end(), [&](const Invariant& a, const Invariant& b) {
    const auto ra = rank(a.core.relation), rb = rank(b.core.relation);
    if (ra != rb) return ra < rb;
    const auto sa = specificity(a.core), sb = specificity(b.core);
    if (sa != sb) return sa > sb;
    if (a.passing != b.passing) return a.passing > b.passing;
    return a.id < b.id;
  });
  set.invariants.resize(cap);
  sort_invariants(set.invariants);
  return set;
}

}  // namespace tinv
