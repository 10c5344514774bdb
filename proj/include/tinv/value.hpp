// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tinv {

using json = nlohmann::json;

/// Snapshot of an observed value: a scalar, a string, a flag, nothing, a
/// tensor digest, or a nested structure. Tensor contents are never stored;
/// two digests compare equal iff their digest strings match.
class Value {
 public:
  enum class Kind { None, Bool, Int, Float, String, Digest, Struct };
  using Fields = std::map<std::string, Value>;

  Value() = default;

  static Value none() { return Value(); }
  static Value boolean(bool b);
  static Value integer(std::int64_t i);
  static Value real(double d);
  static Value string(std::string s);
  static Value digest(std::string hex, std::vector<std::int64_t> shape, std::string dtype);
  static Value structure(Fields fields);

  Kind kind() const { return kind_; }
  bool is_none() const { return kind_ == Kind::None; }
  bool is_digest() const { return kind_ == Kind::Digest; }
  /// Values that may appear as the required value of a CONSTANT condition.
  bool is_plain() const { return kind_ != Kind::Digest && kind_ != Kind::Struct; }

  bool as_bool() const { return b_; }
  std::int64_t as_int() const { return i_; }
  double as_double() const { return d_; }
  /// String payload, or the hex digest for Kind::Digest.
  const std::string& as_string() const { return s_; }
  const std::vector<std::int64_t>& shape() const { return shape_; }
  const std::string& dtype() const { return dtype_; }
  const Fields& fields() const;

  /// Derived attribute: `shape` and `dtype` of a digest, or a struct field.
  std::optional<Value> attribute(std::string_view name) const;

  /// Short human-readable rendering used in reports.
  std::string repr() const;

  /// Wire form of a snapshot, e.g. {"k":"digest","d":"..","shape":[2],"dtype":"f32"}.
  json to_json() const;
  static Value from_json(const json& j);

  /// Bare JSON scalar form used for meta variables and CONSTANT values.
  json to_plain_json() const;
  static Value from_plain_json(const json& j);

  friend bool operator==(const Value& a, const Value& b) { return compare(a, b) == 0; }
  friend std::strong_ordering operator<=>(const Value& a, const Value& b) {
    int c = compare(a, b);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  static int compare(const Value& a, const Value& b);

  Kind kind_ = Kind::None;
  bool b_ = false;
  std::int64_t i_ = 0;
  double d_ = 0.0;
  std::string s_;
  std::vector<std::int64_t> shape_;
  std::string dtype_;
  std::shared_ptr<const Fields> fields_;
};

std::string shape_string(const std::vector<std::int64_t>& shape);

}  // namespace tinv
