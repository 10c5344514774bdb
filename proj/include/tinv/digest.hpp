// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tinv/value.hpp"

namespace tinv {

/// Hex characters kept from the SHA-256 of a tensor.
inline constexpr std::size_t kDigestHexLength = 32;

/// Content digest of a tensor, shared with the tracing shim so that digests
/// taken in different processes compare equal exactly when the bytes do.
/// Hashes "tinv-digest-v1\0", dtype, "\0", the rank and each dimension as
/// little-endian int64, then the raw element bytes.
std::string tensor_digest(std::string_view dtype, std::span<const std::int64_t> shape,
                          std::span<const std::uint8_t> bytes);

/// Digest snapshot value for a tensor.
Value digest_value(std::string_view dtype, std::span<const std::int64_t> shape,
                   std::span<const std::uint8_t> bytes);

/// Full hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view data);

/// Deterministic 64-bit mix of a label and integer parts, for synthetic data.
std::uint64_t mix_hash(std::string_view label, std::span<const std::int64_t> parts);

}  // namespace tinv
