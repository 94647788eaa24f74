//------------------------------------------------------------------------------
//
//   Copyright 2026 The Prunechain Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prunechain {

using bytes = std::vector<std::uint8_t>;

inline bytes to_bytes(std::string_view s) {
  return bytes(s.begin(), s.end());
}

inline std::string to_string(const bytes &b) {
  return std::string(b.begin(), b.end());
}

// Big-endian packing: all integers on the wire are fixed-width big-endian
// so that serialized forms are identical across platforms.
inline void append_u16_be(bytes &out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void append_u32_be(bytes &out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

inline void append_u64_be(bytes &out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

inline bytes u64_be(std::uint64_t v) {
  bytes out;
  append_u64_be(out, v);
  return out;
}

inline std::uint64_t read_u64_be(const std::uint8_t *p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v = (v << 8) | p[i];
  }
  return v;
}

inline char hex_digit(unsigned nibble) {
  return "0123456789abcdef"[nibble & 0xf];
}

inline std::string to_hex(const std::uint8_t *data, std::size_t n) {
  std::string out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(hex_digit(data[i] >> 4));
    out.push_back(hex_digit(data[i]));
  }
  return out;
}

inline std::string to_hex(const bytes &b) {
  return to_hex(b.data(), b.size());
}

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N> &a) {
  return to_hex(a.data(), N);
}

inline int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw std::invalid_argument("from_hex: odd-length input");
  }
  bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_value(hex[i]);
    int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) {
      throw std::invalid_argument("from_hex: invalid digit");
    }
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

}  // namespace prunechain
