// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include "tinv/value.hpp"

#include <sstream>

#include "tinv/error.hpp"

namespace tinv {

namespace {

const Value::Fields& empty_fields() {
  static const Value::Fields kEmpty;
  return kEmpty;
}

template <typename T>
int three_way(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

}  // namespace

Value Value::boolean(bool b) {
  Value v;
  v.kind_ = Kind::Bool;
  v.b_ = b;
  return v;
}

Value Value::integer(std::int64_t i) {
  Value v;
  v.kind_ = Kind::Int;
  v.i_ = i;
  return v;
}

Value Value::real(double d) {
  Value v;
  v.kind_ = Kind::Float;
  v.d_ = d;
  return v;
}

Value Value::string(std::string s) {
  Value v;
  v.kind_ = Kind::String;
  v.s_ = std::move(s);
  return v;
}

Value Value::digest(std::string hex, std::vector<std::int64_t> shape, std::string dtype) {
  Value v;
  v.kind_ = Kind::Digest;
  v.s_ = std::move(hex);
  v.shape_ = std::move(shape);
  v.dtype_ = std::move(dtype);
  return v;
}

Value Value::structure(Fields fields) {
  Value v;
  v.kind_ = Kind::Struct;
  v.fields_ = std::make_shared<const Fields>(std::move(fields));
  return v;
}

const Value::Fields& Value::fields() const { return fields_ ? *fields_ : empty_fields(); }

std::optional<Value> Value::attribute(std::string_view name) const {
  if (kind_ == Kind::Digest) {
    if (name == "shape") return Value::string(shape_string(shape_));
    if (name == "dtype") return Value::string(dtype_);
    return std::nullopt;
  }
  if (kind_ == Kind::Struct) {
    auto it = fields().find(std::string(name));
    if (it != fields().end()) return it->second;
  }
  return std::nullopt;
}

int Value::compare(const Value& a, const Value& b) {
  if (a.kind_ != b.kind_) return three_way(static_cast<int>(a.kind_), static_cast<int>(b.kind_));
  switch (a.kind_) {
    case Kind::None:
      return 0;
    case Kind::Bool:
      return three_way(a.b_, b.b_);
    case Kind::Int:
      return three_way(a.i_, b.i_);
    case Kind::Float:
      return three_way(a.d_, b.d_);
    case Kind::String:
    case Kind::Digest:
      return a.s_.compare(b.s_) < 0 ? -1 : (a.s_ == b.s_ ? 0 : 1);
    case Kind::Struct: {
      const auto& fa = a.fields();
      const auto& fb = b.fields();
      auto ia = fa.begin();
      auto ib = fb.begin();
      for (; ia != fa.end() && ib != fb.end(); ++ia, ++ib) {
        if (int c = three_way(ia->first, ib->first)) return c;
        if (int c = compare(ia->second, ib->second)) return c;
      }
      return three_way(fa.size(), fb.size());
    }
  }
  return 0;
}

std::string shape_string(const std::vector<std::int64_t>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::string Value::repr() const {
  switch (kind_) {
    case Kind::None:
      return "None";
    case Kind::Bool:
      return b_ ? "True" : "False";
    case Kind::Int:
      return std::to_string(i_);
    case Kind::Float: {
      std::ostringstream os;
      os << d_;
      return os.str();
    }
    case Kind::String:
      return "'" + s_ + "'";
    case Kind::Digest:
      return "digest:" + s_.substr(0, 12) + shape_string(shape_) + dtype_;
    case Kind::Struct: {
      std::string out = "{";
      bool first = true;
      for (const auto& [k, v] : fields()) {
        if (!first) out += ", ";
        first = false;
        out += k + ": " + v.repr();
      }
      return out + "}";
    }
  }
  return "?";
}

json Value::to_json() const {
  switch (kind_) {
    case Kind::None:
      return json{{"k", "none"}};
    case Kind::Bool:
      return json{{"k", "bool"}, {"v", b_}};
    case Kind::Int:
      return json{{"k", "scalar"}, {"v", i_}};
    case Kind::Float:
      return json{{"k", "scalar"}, {"v", d_}};
    case Kind::String:
      return json{{"k", "str"}, {"v", s_}};
    case Kind::Digest:
      return json{{"k", "digest"}, {"d", s_}, {"shape", shape_}, {"dtype", dtype_}};
    case Kind::Struct: {
      json f = json::object();
      for (const auto& [k, v] : fields()) f[k] = v.to_json();
      return json{{"k", "struct"}, {"fields", std::move(f)}};
    }
  }
  return json{{"k", "none"}};
}

Value Value::from_json(const json& j) {
  if (!j.is_object() || !j.contains("k") || !j["k"].is_string())
    throw Error("value snapshot must be an object with a string \"k\"");
  const auto& k = j["k"].get_ref<const std::string&>();
  if (k == "none") return Value::none();
  if (k == "bool") return Value::boolean(j.at("v").get<bool>());
  if (k == "scalar") {
    const auto& v = j.at("v");
    if (v.is_number_integer()) return Value::integer(v.get<std::int64_t>());
    if (v.is_number()) return Value::real(v.get<double>());
    throw Error("scalar snapshot needs a numeric \"v\"");
  }
  if (k == "str") return Value::string(j.at("v").get<std::string>());
  if (k == "digest") {
    return Value::digest(j.at("d").get<std::string>(),
                         j.value("shape", std::vector<std::int64_t>{}),
                         j.value("dtype", std::string{}));
  }
  if (k == "struct") {
    Fields f;
    for (const auto& [name, sub] : j.at("fields").items()) f.emplace(name, from_json(sub));
    return Value::structure(std::move(f));
  }
  throw Error("unknown snapshot kind \"" + k + "\"");
}

json Value::to_plain_json() const {
  switch (kind_) {
    case Kind::None:
      return nullptr;
    case Kind::Bool:
      return b_;
    case Kind::Int:
      return i_;
    case Kind::Float:
      return d_;
    case Kind::String:
      return s_;
    default:
      return to_json();
  }
}

Value Value::from_plain_json(const json& j) {
  if (j.is_null()) return Value::none();
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
  if (j.is_number()) return Value::real(j.get<double>());
  if (j.is_string()) return Value::string(j.get<std::string>());
  if (j.is_object()) return from_json(j);
  throw Error("unsupported plain value: " + j.dump());
}

}  // namespace tinv
