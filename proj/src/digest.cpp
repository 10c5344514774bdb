// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include "tinv/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "tinv/error.hpp"

namespace tinv {

namespace {

std::string to_hex(const unsigned char* data, std::size_t n) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(n * 2, '0');
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = kHex[data[i] >> 4];
    out[2 * i + 1] = kHex[data[i] & 0xf];
  }
  return out;
}

using MdCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

MdCtx new_sha256() {
  MdCtx ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
  return ctx;
}

void update(EVP_MD_CTX* ctx, const void* data, std::size_t n) { EVP_DigestUpdate(ctx, data, n); }

std::string final_hex(EVP_MD_CTX* ctx) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int n = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &n);
  return to_hex(md.data(), n);
}

void put_i64(EVP_MD_CTX* ctx, std::int64_t v) {
  std::array<unsigned char, 8> le{};
  auto u = static_cast<std::uint64_t>(v);
  for (auto& b : le) {
    b = static_cast<unsigned char>(u & 0xff);
    u >>= 8;
  }
  update(ctx, le.data(), le.size());
}

}  // namespace

std::string tensor_digest(std::string_view dtype, std::span<const std::int64_t> shape,
                          std::span<const std::uint8_t> bytes) {
  auto ctx = new_sha256();
  static constexpr char kTag[] = "tinv-digest-v1";
  update(ctx.get(), kTag, sizeof(kTag));  // includes the NUL
  update(ctx.get(), dtype.data(), dtype.size());
  const char nul = '\0';
  update(ctx.get(), &nul, 1);
  put_i64(ctx.get(), static_cast<std::int64_t>(shape.size()));
  for (auto d : shape) put_i64(ctx.get(), d);
  update(ctx.get(), bytes.data(), bytes.size());
  return final_hex(ctx.get()).substr(0, kDigestHexLength);
}

Value digest_value(std::string_view dtype, std::span<const std::int64_t> shape,
                   std::span<const std::uint8_t> bytes) {
  return Value::digest(tensor_digest(dtype, shape, bytes), {shape.begin(), shape.end()}, std::string(dtype));
}

std::string sha256_hex(std::string_view data) {
  auto ctx = new_sha256();
  update(ctx.get(), data.data(), data.size());
  return final_hex(ctx.get());
}

std::uint64_t mix_hash(std::string_view label, std::span<const std::int64_t> parts) {
  // FNV-1a over the label, then splitmix64 per part.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  for (auto p : parts) {
    h ^= static_cast<std::uint64_t>(p) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    h ^= h >> 31;
  }
  return h;
}

}  // namespace tinv
