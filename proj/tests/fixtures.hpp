// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

// Shared synthetic runs and the invariants inferred from them. Built once
// per test binary.

#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

#include "tinv/infer.hpp"
#include "tinv/synth.hpp"

namespace tinv::testing {

inline RunConfig training_config(std::uint64_t seed, int params = 16, int steps = 6) {
  RunConfig cfg;
  cfg.tp_ranks = 4;
  cfg.dp_ranks = 2;
  cfg.n_params = params;
  cfg.n_steps = steps;
  cfg.seed = seed;
  return cfg;
}

inline const std::vector<Run>& training_runs() {
  static const std::vector<Run> runs = {generate(training_config(1)), generate(training_config(2))};
  return runs;
}

inline const InvariantSet& trained_invariants() {
  static const InvariantSet set = infer(training_runs());
  return set;
}

inline Run faulty_run(FaultKind kind, std::int64_t step, std::uint64_t seed = 7) {
  RunConfig cfg = training_config(seed, 20, 8);
  cfg.fault = FaultSpec{kind, step};
  return generate(cfg);
}

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tinv-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace tinv::testing
