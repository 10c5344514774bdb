// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tinv/verifier.hpp"

namespace tinv {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolations = 1;
inline constexpr int kExitError = 2;

/// Entry point of the `tinv` command. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Grouped text summary of violation reports.
std::string render_report(const std::vector<ViolationReport>& reports);

/// Reads an ndjson report file, skipping summary lines.
std::vector<ViolationReport> parse_reports(std::istream& in);

}  // namespace tinv
