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

#include <cstdint>
#include <limits>
#include <string_view>

#include "prunechain/bytes.hpp"
#include "prunechain/crypto.hpp"
#include "prunechain/types.hpp"

namespace prunechain {

// Canonical, self-describing binary form shared by hashing and signing:
//
//   [tag: 1 byte][field count: u16 BE]
//   per field: [name length: u16 BE][name][value length: u32 BE][value]
//
// Fields appear in a fixed order and optional fields are written only when
// present, so two objects serialize identically iff they are equal.  All
// integers inside values are fixed-width big-endian.
namespace detail {

inline constexpr std::uint8_t tag_entry = 0x45;
inline constexpr std::uint8_t tag_summary_entry = 0x53;
inline constexpr std::uint8_t tag_block = 0x42;

class canonical_writer {
 public:
  explicit canonical_writer(std::uint8_t tag) {
    out_.push_back(tag);
    count_pos_ = out_.size();
    append_u16_be(out_, 0);
  }

  void field(std::string_view name, const bytes &value) {
    if (value.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw error(errc::validation, "canonical field too large");
    }
    append_u16_be(out_, static_cast<std::uint16_t>(name.size()));
    out_.insert(out_.end(), name.begin(), name.end());
    append_u32_be(out_, static_cast<std::uint32_t>(value.size()));
    out_.insert(out_.end(), value.begin(), value.end());
    ++count_;
  }

  bytes finish() {
    out_[count_pos_] = static_cast<std::uint8_t>(count_ >> 8);
    out_[count_pos_ + 1] = static_cast<std::uint8_t>(count_);
    return std::move(out_);
  }

 private:
  bytes out_;
  std::size_t count_pos_ = 0;
  std::uint16_t count_ = 0;
};

inline bytes byte_value(std::uint8_t v) { return bytes{v}; }

inline bytes ref_value(const entry_ref &r) {
  bytes out;
  append_u64_be(out, r.block_number);
  append_u64_be(out, r.entry_number);
  return out;
}

inline bytes expiry_value(const expiry &e) {
  bytes out{static_cast<std::uint8_t>(e.kind)};
  append_u64_be(out, e.bound);
  return out;
}

inline bytes ref_list_value(const std::vector<entry_ref> &refs) {
  bytes out;
  append_u32_be(out, static_cast<std::uint32_t>(refs.size()));
  for (const auto &r : refs) {
    append_u64_be(out, r.block_number);
    append_u64_be(out, r.entry_number);
  }
  return out;
}

template <typename Item, typename Fn>
bytes nested_list_value(const std::vector<Item> &items, Fn &&serialize_item) {
  bytes out;
  append_u32_be(out, static_cast<std::uint32_t>(items.size()));
  for (const auto &item : items) {
    bytes encoded = serialize_item(item);
    append_u32_be(out, static_cast<std::uint32_t>(encoded.size()));
    out.insert(out.end(), encoded.begin(), encoded.end());
  }
  return out;
}

inline bytes serialize_entry_impl(const entry &e, bool include_signature) {
  canonical_writer w(tag_entry);
  w.field("kind", byte_value(static_cast<std::uint8_t>(e.kind)));
  w.field("user", to_bytes(e.user));
  if (e.kind == entry_kind::data) {
    w.field("payload", e.payload);
    if (e.expires) {
      w.field("expiry", expiry_value(*e.expires));
    }
    if (!e.depends_on.empty()) {
      w.field("depends_on", ref_list_value(e.depends_on));
    }
  } else {
    if (!e.target) {
      throw error(errc::validation, "delete request without target");
    }
    w.field("target", ref_value(*e.target));
  }
  if (include_signature) {
    w.field("signature", bytes(e.sig.begin(), e.sig.end()));
  }
  return w.finish();
}

}  // namespace detail

// Bytes covered by the entry signature: everything except the signature.
inline bytes entry_signing_bytes(const entry &e) {
  return detail::serialize_entry_impl(e, false);
}

inline bytes canonical_serialize(const entry &e) {
  return detail::serialize_entry_impl(e, true);
}

inline bytes canonical_serialize(const summary_entry &se) {
  detail::canonical_writer w(detail::tag_summary_entry);
  w.field("origin_block", u64_be(se.origin_block));
  w.field("origin_timestamp", u64_be(se.origin_timestamp));
  w.field("origin_entry", u64_be(se.origin_entry));
  w.field("inner", canonical_serialize(se.inner));
  return w.finish();
}

// Serializes everything except own_hash; hash_block() hashes exactly this.
inline bytes canonical_serialize(const block &b) {
  detail::canonical_writer w(detail::tag_block);
  w.field("kind", detail::byte_value(static_cast<std::uint8_t>(b.kind)));
  w.field("number", u64_be(b.number));
  w.field("timestamp", u64_be(b.timestamp));
  w.field("previous_hash", bytes(b.previous_hash.begin(), b.previous_hash.end()));
  if (b.kind == block_kind::normal) {
    w.field("nonce", b.nonce);
    if (!b.entries.empty()) {
      w.field("entries", detail::nested_list_value(b.entries, [](const entry &e) {
                return canonical_serialize(e);
              }));
    }
  } else if (b.kind == block_kind::summary) {
    if (!b.summaries.empty()) {
      w.field("summaries",
              detail::nested_list_value(b.summaries, [](const summary_entry &se) {
                return canonical_serialize(se);
              }));
    }
    if (b.redundancy) {
      bytes value;
      append_u64_be(value, b.redundancy->sequence_index);
      value.insert(value.end(), b.redundancy->merkle_root.begin(),
                   b.redundancy->merkle_root.end());
      w.field("redundancy", value);
    }
  }
  return w.finish();
}

inline digest hash_block(const block &b) {
  return sha256(canonical_serialize(b));
}

inline void seal_block(block &b) { b.own_hash = hash_block(b); }

inline void sign_entry(entry &e, const secret_key &sk) {
  e.sig = sign(sk, entry_signing_bytes(e));
}

inline bool verify_entry_signature(const entry &e, const public_key &pk) {
  return verify(pk, entry_signing_bytes(e), e.sig);
}

// The chain starts from a well-known marker value rather than a real
// predecessor hash; its first five hex digits spell "deadb".
inline digest genesis_previous_hash() {
  digest d{};
  d[0] = 0xde;
  d[1] = 0xad;
  d[2] = 0xb0;
  return d;
}

inline bytes default_nonce() { return bytes(8, 0); }

inline block make_genesis(std::uint64_t timestamp) {
  block b;
  b.kind = block_kind::normal;
  b.number = 0;
  b.timestamp = timestamp;
  b.previous_hash = genesis_previous_hash();
  b.nonce = default_nonce();
  seal_block(b);
  return b;
}

}  // namespace prunechain
