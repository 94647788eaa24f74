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
#include <optional>
#include <string>

#include "prunechain/sequences.hpp"
#include "prunechain/serialize.hpp"
#include "prunechain/types.hpp"

namespace prunechain {

inline chain make_chain(const chain_config &config, std::uint64_t timestamp) {
  validate_config(config);
  chain c;
  c.config = config;
  c.blocks.push_back(make_genesis(timestamp));
  return c;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct verify_verdict {
  bool valid = true;
  std::uint64_t at = 0;      // number of the first offending block
  std::string reason;        // machine-readable code, empty when valid

  static verify_verdict ok() { return {}; }
  static verify_verdict broken(std::uint64_t at, std::string reason) {
    return {false, at, std::move(reason)};
  }
};

// Full structural and cryptographic audit of the live chain:
//   - every block hashes to its own_hash
//   - previous_hash links match; numbering is contiguous from the marker
//   - the marker sits at a sequence start
//   - summary blocks sit exactly at summary positions and repeat the
//     timestamp of their predecessor; timestamps never decrease
//   - each kind carries only the pieces it is allowed to carry
//   - with a registry: every entry signature (including entries carried
//     inside summary blocks) verifies against the key of its user
inline verify_verdict verify_chain(const chain &c,
                                   const key_registry *registry = nullptr) {
  if (c.blocks.empty()) {
    return verify_verdict::broken(0, "empty-chain");
  }
  if (!is_sequence_start(c.marker, c.config.delta_l)) {
    return verify_verdict::broken(c.marker, "marker-mismatch");
  }
  if (c.blocks.front().number != c.marker) {
    return verify_verdict::broken(c.blocks.front().number, "marker-mismatch");
  }
  for (std::size_t i = 0; i < c.blocks.size(); ++i) {
    const block &b = c.blocks[i];
    if (b.number != c.marker + i) {
      return verify_verdict::broken(b.number, "number-gap");
    }
    if (hash_block(b) != b.own_hash) {
      return verify_verdict::broken(b.number, "hash-mismatch");
    }
    if (i > 0) {
      const block &prev = c.blocks[i - 1];
      if (b.previous_hash != prev.own_hash) {
        return verify_verdict::broken(b.number, "link-mismatch");
      }
      if (b.timestamp < prev.timestamp) {
        return verify_verdict::broken(b.number, "timestamp-rule");
      }
      if (b.kind == block_kind::summary && b.timestamp != prev.timestamp) {
        return verify_verdict::broken(b.number, "timestamp-rule");
      }
    } else if (c.marker == 0 && b.previous_hash != genesis_previous_hash()) {
      return verify_verdict::broken(b.number, "link-mismatch");
    }
    bool at_summary_position = is_summary_position(b.number, c.config.delta_l);
    if (at_summary_position != (b.kind == block_kind::summary)) {
      return verify_verdict::broken(b.number, "summary-position");
    }
    switch (b.kind) {
      case block_kind::normal:
        if (!b.summaries.empty() || b.redundancy || b.nonce.size() != 8) {
          return verify_verdict::broken(b.number, "kind-shape");
        }
        break;
      case block_kind::summary:
        if (!b.entries.empty() || !b.nonce.empty()) {
          return verify_verdict::broken(b.number, "kind-shape");
        }
        break;
      case block_kind::empty:
        if (!b.entries.empty() || !b.summaries.empty() || b.redundancy ||
            !b.nonce.empty()) {
          return verify_verdict::broken(b.number, "kind-shape");
        }
        break;
    }
    if (registry != nullptr) {
      for (const entry &e : b.entries) {
        const public_key *pk = registry->find_user(e.user);
        if (pk == nullptr) {
          return verify_verdict::broken(b.number, "unknown-user");
        }
        if (!verify_entry_signature(e, *pk)) {
          return verify_verdict::broken(b.number, "bad-signature");
        }
      }
      for (const summary_entry &se : b.summaries) {
        const public_key *pk = registry->find_user(se.inner.user);
        if (pk == nullptr) {
          return verify_verdict::broken(b.number, "unknown-user");
        }
        if (!verify_entry_signature(se.inner, *pk)) {
          return verify_verdict::broken(b.number, "bad-signature");
        }
      }
    }
  }
  return verify_verdict::ok();
}

// ---------------------------------------------------------------------------
// Lookup
// ---------------------------------------------------------------------------

struct lookup_result {
  bool in_summary = false;     // found inside a summary block
  entry value;                 // the entry as stored
  std::uint64_t origin_timestamp = 0;
  std::uint64_t at_block = 0;  // block that physically holds it now
};

// Resolves an entry by its stable origin coordinates, whether it still sits
// in its original block or has been carried into a summary block.
inline std::optional<lookup_result> lookup_entry(const chain &c,
                                                 const entry_ref &ref) {
  if (const block *b = block_by_number(c, ref.block_number)) {
    if (b->kind == block_kind::normal && ref.entry_number < b->entries.size()) {
      lookup_result r;
      r.in_summary = false;
      r.value = b->entries[ref.entry_number];
      r.origin_timestamp = b->timestamp;
      r.at_block = b->number;
      return r;
    }
  }
  for (const block &b : c.blocks) {
    if (b.kind != block_kind::summary) continue;
    for (const summary_entry &se : b.summaries) {
      if (se.origin_block == ref.block_number &&
          se.origin_entry == ref.entry_number) {
        lookup_result r;
        r.in_summary = true;
        r.value = se.inner;
        r.origin_timestamp = se.origin_timestamp;
        r.at_block = b.number;
        return r;
      }
    }
  }
  return std::nullopt;
}

// Fingerprint of the whole live state: marker plus every block hash.
inline digest chain_digest(const chain &c) {
  bytes buf;
  append_u64_be(buf, c.marker);
  for (const block &b : c.blocks) {
    buf.insert(buf.end(), b.own_hash.begin(), b.own_hash.end());
  }
  return sha256(buf);
}

}  // namespace prunechain
