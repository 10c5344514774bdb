// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include "tinv/precondition.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>

#include "tinv/error.hpp"

namespace tinv {

std::string_view to_string(ConditionType t) {
  switch (t) {
    case ConditionType::Constant: return "CONSTANT";
    case ConditionType::Consistent: return "CONSISTENT";
    case ConditionType::Unequal: return "UNEQUAL";
    case ConditionType::Exist: return "EXIST";
  }
  return "?";
}

ConditionType condition_type_from_string(std::string_view s) {
  if (s == "CONSTANT") return ConditionType::Constant;
  if (s == "CONSISTENT") return ConditionType::Consistent;
  if (s == "UNEQUAL") return ConditionType::Unequal;
  if (s == "EXIST") return ConditionType::Exist;
  throw Error("unknown condition type " + std::string(s));
}

bool holds(const Condition& c, std::span<const FieldView> records) {
  if (records.empty()) return false;
  const Value* first = nullptr;
  bool all_present = true;
  bool all_same = true;
  bool distinct = false;
  for (const auto& r : records) {
    auto it = r.find(c.field);
    if (it == r.end()) {
      all_present = false;
      continue;
    }
    if (!first) {
      first = &it->second;
    } else if (it->second != *first) {
      all_same = false;
      distinct = true;
    }
  }
  switch (c.type) {
    case ConditionType::Constant: return all_present && all_same && c.value && *first == *c.value;
    case ConditionType::Consistent: return all_present && all_same;
    case ConditionType::Unequal: return distinct;
    case ConditionType::Exist: return all_present;
  }
  return false;
}

bool holds(const Clause& c, std::span<const FieldView> records) {
  return std::all_of(c.begin(), c.end(), [&](const Condition& x) { return holds(x, records); });
}

std::vector<Condition> conditions_of(std::span<const FieldView> records, const Blocklist& blocked) {
  if (records.empty()) throw EmptyExample();
  std::vector<Condition> out;
  std::map<std::string, std::vector<const Value*>> fields;
  for (const auto& r : records) {
    for (const auto& [k, v] : r) fields[k].push_back(&v);
  }
  for (const auto& [field, values] : fields) {
    if (blocked.blocks(field, *values.front())) continue;
    const bool all_present = values.size() == records.size();
    const bool all_same =
        std::all_of(values.begin(), values.end(), [&](const Value* v) { return *v == *values.front(); });
    if (all_present && all_same) {
      if (values.front()->is_plain()) out.push_back({ConditionType::Constant, field, *values.front()});
      out.push_back({ConditionType::Consistent, field, std::nullopt});
    }
    if (!all_same) out.push_back({ConditionType::Unequal, field, std::nullopt});
    if (all_present) out.push_back({ConditionType::Exist, field, std::nullopt});
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Precondition::trivially_true() const {
  return std::any_of(clauses.begin(), clauses.end(), [](const Clause& c) { return c.empty(); });
}

std::optional<std::size_t> Precondition::satisfied_clause(std::span<const FieldView> records) const {
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (tinv::holds(clauses[i], records)) return i;
  }
  return std::nullopt;
}

std::string Precondition::describe() const {
  if (trivially_true()) return "true";
  std::string out;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (i) out += " OR ";
    out += "[";
    for (std::size_t j = 0; j < clauses[i].size(); ++j) {
      const auto& c = clauses[i][j];
      if (j) out += " AND ";
      out += std::string(to_string(c.type)) + "(" + c.field;
      if (c.value) out += "=" + c.value->repr();
      out += ")";
    }
    out += "]";
  }
  return out;
}

json precondition_to_json(const Precondition& p) {
  json any = json::array();
  for (const auto& clause : p.clauses) {
    json all = json::array();
    for (const auto& c : clause) {
      json j = {{"t", std::string(to_string(c.type))}, {"f", c.field}};
      if (c.value) j["v"] = c.value->to_plain_json();
      all.push_back(std::move(j));
    }
    any.push_back({{"all", std::move(all)}});
  }
  return {{"any", std::move(any)}};
}

Precondition precondition_from_json(const json& j) {
  Precondition p;
  for (const auto& clause : j.at("any")) {
    Clause c;
    for (const auto& cj : clause.at("all")) {
      Condition cond;
      cond.type = condition_type_from_string(cj.at("t").get<std::string>());
      cond.field = cj.at("f").get<std::string>();
      if (auto it = cj.find("v"); it != cj.end()) cond.value = Value::from_plain_json(*it);
      if (cond.type == ConditionType::Constant && !cond.value) throw Error("CONSTANT condition without value");
      c.push_back(std::move(cond));
    }
    p.clauses.push_back(std::move(c));
  }
  return p;
}

namespace {

class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t n, bool fill = false) : n_(n), w_((n + 63) / 64, fill ? ~0ULL : 0ULL) { trim(); }

  void set(std::size_t i) { w_[i / 64] |= 1ULL << (i % 64); }
  bool test(std::size_t i) const { return (w_[i / 64] >> (i % 64)) & 1ULL; }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : w_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool none() const {
    return std::all_of(w_.begin(), w_.end(), [](std::uint64_t w) { return w == 0; });
  }
  bool all() const { return count() == n_; }
  Bits& operator&=(const Bits& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
  }
  Bits& minus(const Bits& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= ~o.w_[i];
    return *this;
  }
  friend Bits operator&(Bits a, const Bits& b) { return a &= b; }
  bool intersects(const Bits& o) const {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (w_[i] & o.w_[i]) return true;
    }
    return false;
  }

 private:
  void trim() {
    if (n_ % 64 && !w_.empty()) w_.back() &= (1ULL << (n_ % 64)) - 1;
  }
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

struct Candidate {
  Condition cond;
  Bits pass;  // passing examples satisfying the condition
  Bits fail;
};

class Deducer {
 public:
  Deducer(std::span<const Example> passing, std::span<const Example> failing, const Blocklist& blocked,
          const DeduceOptions& opts)
      : passing_(passing), failing_(failing), opts_(opts) {
    std::set<Condition> universe;
    for (const auto& p : passing) {
      for (auto& c : conditions_of(p.records, blocked)) universe.insert(std::move(c));
    }
    for (const auto& c : universe) {
      Candidate cand{c, Bits(passing.size()), Bits(failing.size())};
      for (std::size_t i = 0; i < passing.size(); ++i) {
        if (holds(c, passing[i].records)) cand.pass.set(i);
      }
      for (std::size_t i = 0; i < failing.size(); ++i) {
        if (holds(c, failing[i].records)) cand.fail.set(i);
      }
      cands_.push_back(std::move(cand));
    }
  }

  std::optional<Precondition> run() {
    Bits everyone(passing_.size(), true);
    std::optional<std::vector<Clause>> clauses =
        opts_.strategy == DeduceStrategy::Split ? split(everyone, 0) : augment(everyone);
    if (!clauses || over_budget()) return std::nullopt;
    return prune(Precondition{std::move(*clauses)}, failing_);
  }

 private:
  // Conditions true on every example in `group`.
  std::vector<std::size_t> base_of(const Bits& group) const {
    std::vector<std::size_t> base;
    for (std::size_t i = 0; i < cands_.size(); ++i) {
      if ((cands_[i].pass & group).count() == group.count()) base.push_back(i);
    }
    return base;
  }

  Bits failing_under(const std::vector<std::size_t>& clause) {
    ++checks_;
    Bits f(failing_.size(), true);
    for (auto i : clause) f &= cands_[i].fail;
    return f;
  }

  Clause to_clause(const std::vector<std::size_t>& idx) const {
    Clause c;
    for (auto i : idx) c.push_back(cands_[i].cond);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
  }

  // Candidates not in `base` that hold on part of `group`, strongest first.
  std::vector<std::size_t> ranked(const Bits& group, const std::vector<std::size_t>& base) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cands_.size(); ++i) {
      if (std::find(base.begin(), base.end(), i) != base.end()) continue;
      if (cands_[i].pass.intersects(group)) out.push_back(i);
    }
    std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
      auto ca = (cands_[a].pass & group).count();
      auto cb = (cands_[b].pass & group).count();
      if (ca != cb) return ca > cb;
      return cands_[a].cond < cands_[b].cond;
    });
    return out;
  }

  bool over_budget() const { return checks_ > opts_.budget; }

  std::optional<std::vector<Clause>> augment(const Bits& group) {
    const auto base = base_of(group);
    const Bits fb = failing_under(base);
    if (fb.none()) return std::vector<Clause>{to_clause(base)};

    std::vector<Clause> clauses;
    Bits uncovered = group;
    const auto order = ranked(group, base);
    for (auto c : order) {
      if (uncovered.none() || over_budget()) break;
      if (!cands_[c].pass.intersects(uncovered)) continue;
      ++checks_;
      if (cands_[c].fail.intersects(fb)) continue;
      auto idx = base;
      idx.push_back(c);
      clauses.push_back(to_clause(idx));
      uncovered.minus(cands_[c].pass);
    }
    if (over_budget()) return std::nullopt;
    // Whatever is left gets the strongest clause it supports.
    for (std::size_t p = 0; p < passing_.size(); ++p) {
      if (!uncovered.test(p)) continue;
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < cands_.size(); ++i) {
        if (cands_[i].pass.test(p)) idx.push_back(i);
      }
      if (!failing_under(idx).none() || over_budget()) return std::nullopt;
      Bits covered(passing_.size(), true);
      for (auto i : idx) covered &= cands_[i].pass;
      clauses.push_back(to_clause(idx));
      uncovered.minus(covered);
    }
    return clauses;
  }

  std::optional<std::vector<Clause>> split(const Bits& group, std::size_t depth) {
    if (over_budget() || depth > cands_.size()) return std::nullopt;
    const auto base = base_of(group);
    if (failing_under(base).none()) return std::vector<Clause>{to_clause(base)};
    const auto order = ranked(group, base);
    if (order.empty()) return std::nullopt;
    const Bits with = cands_[order.front()].pass & group;
    Bits without = group;
    without.minus(with);
    auto left = split(with, depth + 1);
    if (!left) return std::nullopt;
    if (without.none()) return left;
    auto right = split(without, depth + 1);
    if (!right) return std::nullopt;
    left->insert(left->end(), right->begin(), right->end());
    return left;
  }

  std::span<const Example> passing_;
  std::span<const Example> failing_;
  DeduceOptions opts_;
  std::vector<Candidate> cands_;
  std::size_t checks_ = 0;
};

}  // namespace

Precondition prune(Precondition p, std::span<const Example> failing) {
  if (!failing.empty()) {
    for (auto& clause : p.clauses) {
      std::erase_if(clause, [&](const Condition& c) {
        return std::all_of(failing.begin(), failing.end(),
                           [&](const Example& f) { return holds(c, f.records); });
      });
    }
  }
  for (auto& clause : p.clauses) std::sort(clause.begin(), clause.end());
  std::sort(p.clauses.begin(), p.clauses.end());
  p.clauses.erase(std::unique(p.clauses.begin(), p.clauses.end()), p.clauses.end());
  if (p.trivially_true()) return Precondition::always();
  return p;
}

std::optional<Precondition> deduce(std::span<const Example> passing, std::span<const Example> failing,
                                   const Blocklist& blocked, const DeduceOptions& opts) {
  if (failing.empty()) return Precondition::always();
  if (passing.empty()) return std::nullopt;
  return Deducer(passing, failing, blocked, opts).run();
}

bool is_superficial(std::span<const Example> passing, std::span<const Example> failing, const Blocklist& blocked,
                    const DeduceOptions& opts) {
  return !failing.empty() && !deduce(passing, failing, blocked, opts).has_value();
}

}  // namespace tinv
