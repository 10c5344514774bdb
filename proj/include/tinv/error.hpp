// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tinv {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trace line could not be decoded. `line()` is 1-based.
class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SchemaVersionMismatch : public Error {
 public:
  explicit SchemaVersionMismatch(int found)
      : Error("unsupported schema version " + std::to_string(found)), found_(found) {}
  int found() const { return found_; }

 private:
  int found_;
};

/// A FUNC_EXIT record had no open FUNC_ENTRY of the same name on its thread.
class ExitWithoutEntry : public Error {
 public:
  using Error::Error;
};

class ArityMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class EmptyExample : public Error {
 public:
  EmptyExample() : Error("example has no records") {}
};

}  // namespace tinv
