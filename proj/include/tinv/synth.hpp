// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tinv/trace.hpp"

namespace tinv {

enum class FaultKind {
  TpDivergence,     // replicated params drift on TP ranks > 0
  MissingZeroGrad,  // zero_grad skipped, gradients accumulate
  FrozenOptimizer,  // optimizer step updates nothing
  DuplicateSeed,    // every worker seeded identically
  OutputTruncation, // processor returns a batch of one
  DdpDesync,        // params drift on DP ranks > 0
};

std::string_view to_string(FaultKind k);
FaultKind fault_kind_from_string(std::string_view s);

struct FaultSpec {
  FaultKind kind = FaultKind::TpDivergence;
  std::int64_t inject_step = 1;
};

/// Parses "KIND@STEP", e.g. "TP_DIVERGENCE@2".
FaultSpec parse_fault(std::string_view text);

struct RunConfig {
  int dp_ranks = 2;
  int tp_ranks = 2;
  int n_params = 8;
  double replicated_fraction = 0.25;
  int n_steps = 5;  // training steps 1..n_steps; step 0 is initialization
  std::vector<std::string> api_script{"zero_grad", "forward", "backward", "step"};
  std::uint64_t seed = 0;
  std::optional<FaultSpec> fault;
  int batch = 8;
  int seq_len = 128;
  int hidden = 64;
  int steps_per_epoch = 10;
  std::string run_id;  // defaults to "run-<seed>"

  /// Throws InvalidConfig.
  void validate() const;
  json to_json() const;
};

inline constexpr std::string_view kParameterType = "torch.nn.Parameter";

/// Names the replicated (tensor_model_parallel = false) parameters of a config.
std::vector<bool> replicated_layout(const RunConfig& cfg);

/// Deterministic in the config: the same config gives byte-identical traces.
Run generate(const RunConfig& cfg);

/// Writes one trace file per process and manifest.json (the config echo).
void write_generated(const Run& run, const RunConfig& cfg, const std::filesystem::path& dir);

struct FaultInfo {
  FaultKind kind;
  std::string description;
  std::vector<std::string> affects;   // record fields the fault alters
  std::vector<std::string> catchers;  // relations expected to flag it
};

std::vector<FaultInfo> describe_faults();
json faults_to_json(const std::vector<FaultInfo>& faults);

}  // namespace tinv
