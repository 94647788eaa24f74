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

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "prunechain/bytes.hpp"
#include "prunechain/crypto.hpp"

namespace prunechain {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class errc {
  invalid_chain,
  guard_violation,
  vote_rejected,
  invalid_marker,
  not_enough_sequences,
  not_proposer,
  script_error,
  schema_violation,
  bad_signature,
  validation,
  io_error,
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string &what)
      : std::runtime_error(what), code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

// ---------------------------------------------------------------------------
// Entries
// ---------------------------------------------------------------------------

// Stable coordinates of an entry: the number of the block that first carried
// it and its zero-based position inside that block.  The pair survives
// summarization unchanged, so references held by other entries stay valid.
struct entry_ref {
  std::uint64_t block_number = 0;
  std::uint64_t entry_number = 0;

  auto operator<=>(const entry_ref &) const = default;
};

enum class entry_kind : std::uint8_t {
  data = 1,
  delete_request = 2,
};

enum class expiry_kind : std::uint8_t {
  by_time = 1,   // drop once the head timestamp exceeds the bound
  by_block = 2,  // drop once the head block number exceeds the bound
};

struct expiry {
  expiry_kind kind = expiry_kind::by_time;
  std::uint64_t bound = 0;

  auto operator<=>(const expiry &) const = default;
};

// A signed transaction.  Exactly one of the two shapes is populated:
//  - data:            payload (+ optional expiry, optional depends_on)
//  - delete_request:  target
// The signature always covers the canonical serialization of everything else.
struct entry {
  entry_kind kind = entry_kind::data;
  std::string user;
  bytes payload;
  std::optional<expiry> expires;
  std::vector<entry_ref> depends_on;
  std::optional<entry_ref> target;
  signature sig{};

  bool operator==(const entry &) const = default;
};

// An entry carried forward into a summary block, tagged with its origin so
// that lookups by the original coordinates keep working after merging.
struct summary_entry {
  std::uint64_t origin_block = 0;
  std::uint64_t origin_timestamp = 0;
  std::uint64_t origin_entry = 0;
  entry inner;

  bool operator==(const summary_entry &) const = default;
};

// ---------------------------------------------------------------------------
// Blocks
// ---------------------------------------------------------------------------

enum class block_kind : std::uint8_t {
  normal = 1,   // carries entries
  summary = 2,  // carries summary entries; closes a sequence
  empty = 3,    // heartbeat, no entries
};

struct redundancy_ref {
  std::uint64_t sequence_index = 0;  // absolute 1-based sequence ordinal
  digest merkle_root{};

  bool operator==(const redundancy_ref &) const = default;
};

// Invariants (checked by verify_chain):
//  - own_hash equals the hash of the canonical serialization (own_hash and
//    any cached state excluded from the hashed bytes)
//  - previous_hash equals the predecessor's own_hash
//  - a summary block repeats the timestamp of the block before it
//  - entries is empty unless kind == normal, summaries is empty unless
//    kind == summary
struct block {
  block_kind kind = block_kind::normal;
  std::uint64_t number = 0;
  std::uint64_t timestamp = 0;
  digest previous_hash{};
  bytes nonce;  // normal blocks only; fixed placeholder, no proof-of-work
  std::vector<entry> entries;
  std::vector<summary_entry> summaries;
  std::optional<redundancy_ref> redundancy;
  digest own_hash{};

  bool operator==(const block &) const = default;
};

// ---------------------------------------------------------------------------
// Chain
// ---------------------------------------------------------------------------

// Tuning parameters; all lengths are counted in blocks.
// Invariants: l_min >= delta_l, l_max >= l_min + delta_l, delta_l >= 2.
struct chain_config {
  std::uint64_t delta_l = 10;            // sequence length, summaries included
  std::uint64_t l_max = 40;              // shrink once length exceeds this
  std::uint64_t l_min = 10;              // never shrink below this
  std::uint64_t min_summary_blocks = 1;  // keep at least this many summaries
  std::uint64_t min_time_coverage = 0;   // keep at least this much history
  std::uint64_t heartbeat_interval = 1;  // ticks between empty blocks
  bool redundancy_enabled = false;

  bool operator==(const chain_config &) const = default;
};

inline void validate_config(const chain_config &c) {
  if (c.delta_l < 2) {
    throw error(errc::validation, "config: delta_l must be at least 2");
  }
  if (c.l_min < c.delta_l) {
    throw error(errc::validation, "config: l_min must be at least delta_l");
  }
  if (c.l_max < c.l_min + c.delta_l) {
    throw error(errc::validation,
                "config: l_max must be at least l_min + delta_l");
  }
  if (c.heartbeat_interval < 1) {
    throw error(errc::validation, "config: heartbeat_interval must be >= 1");
  }
}

// The live portion of the ledger.
// Invariants:
//  - blocks are contiguous: blocks[i].number == marker + i
//  - marker is the number of the oldest retained block and always sits at a
//    sequence boundary (marker % delta_l == 0)
//  - pending_deletions holds origin coordinates of entries approved for
//    deletion but not yet physically dropped; such entries are never copied
//    into a summary block
struct chain {
  chain_config config;
  std::uint64_t marker = 0;
  std::vector<block> blocks;
  std::set<entry_ref> pending_deletions;
};

inline std::uint64_t chain_length(const chain &c) { return c.blocks.size(); }

inline const block &head(const chain &c) {
  if (c.blocks.empty()) {
    throw error(errc::invalid_chain, "chain has no blocks");
  }
  return c.blocks.back();
}

inline const block *block_by_number(const chain &c, std::uint64_t number) {
  if (number < c.marker) return nullptr;
  std::uint64_t index = number - c.marker;
  if (index >= c.blocks.size()) return nullptr;
  return &c.blocks[index];
}

// ---------------------------------------------------------------------------
// Key registry
// ---------------------------------------------------------------------------

// Known signers.  Each user owns exactly one key; admin keys may authorize
// deletions of foreign entries and are disjoint from user keys.
struct key_registry {
  std::map<std::string, public_key> users;
  std::vector<public_key> admins;

  const public_key *find_user(const std::string &name) const {
    auto it = users.find(name);
    return it == users.end() ? nullptr : &it->second;
  }
};

inline void register_user(key_registry &reg, const std::string &name,
                          const public_key &pk) {
  for (const auto &[existing, key] : reg.users) {
    if (key == pk && existing != name) {
      throw error(errc::validation,
                  "registry: key already registered to " + existing);
    }
  }
  for (const auto &admin : reg.admins) {
    if (admin == pk) {
      throw error(errc::validation, "registry: key already registered as admin");
    }
  }
  auto [it, inserted] = reg.users.emplace(name, pk);
  if (!inserted && it->second != pk) {
    throw error(errc::validation, "registry: user already has a different key");
  }
}

inline void register_admin(key_registry &reg, const public_key &pk) {
  for (const auto &[name, key] : reg.users) {
    if (key == pk) {
      throw error(errc::validation,
                  "registry: key already registered to " + name);
    }
  }
  for (const auto &admin : reg.admins) {
    if (admin == pk) return;
  }
  reg.admins.push_back(pk);
}

// ---------------------------------------------------------------------------
// Ballots
// ---------------------------------------------------------------------------

enum class ballot_subject : std::uint8_t {
  marker_shift = 1,
  approve_deletion = 2,
};

// Outcome of a vote among nodes.  Relevant payload depends on the subject:
// marker for shifts, target for deletions.  Approval requires a strict
// majority of yes votes.
struct ballot {
  ballot_subject subject = ballot_subject::marker_shift;
  std::uint64_t marker = 0;
  entry_ref target;
  std::map<int, bool> votes;
  bool approved = false;
};

inline ballot local_ballot(ballot_subject subject) {
  // single-node operation: the local node is the whole electorate
  ballot b;
  b.subject = subject;
  b.votes[0] = true;
  b.approved = true;
  return b;
}

// ---------------------------------------------------------------------------
// Machine-readable reason codes
// ---------------------------------------------------------------------------

namespace reason {
// drop reasons recorded when entries leave the chain
inline constexpr const char *deleted_on_request = "deleted-on-request";
inline constexpr const char *expired_by_time = "expired-by-time";
inline constexpr const char *expired_by_block = "expired-by-block";
inline constexpr const char *request_never_copied =
    "deletion-request-never-copied";
// deletion decision outcomes
inline constexpr const char *foreign_entry = "foreign-entry";
inline constexpr const char *not_found = "not-found";
inline constexpr const char *needs_cosign = "needs-cosign";
inline constexpr const char *depends_on_marked = "depends-on-marked";
// transaction admission outcomes
inline constexpr const char *depends_on_missing = "depends-on-missing";
inline constexpr const char *bad_signature = "bad-signature";
}  // namespace reason

}  // namespace prunechain
