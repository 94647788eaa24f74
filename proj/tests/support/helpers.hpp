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
#include <string>
#include <vector>

#include "prunechain/chain.hpp"
#include "prunechain/crypto.hpp"
#include "prunechain/deletion.hpp"
#include "prunechain/serialize.hpp"
#include "prunechain/types.hpp"

namespace pc_test {

using namespace prunechain;

// Deterministic identities shared by all fixtures.
inline const keypair &key_of(const std::string &user) {
  static std::map<std::string, keypair> cache;
  auto it = cache.find(user);
  if (it == cache.end()) {
    it = cache.emplace(user, derive_keypair(1, user)).first;
  }
  return it->second;
}

inline key_registry make_registry(
    const std::vector<std::string> &users = {"alice", "bob", "carol"},
    bool with_admin = true) {
  key_registry reg;
  for (const auto &u : users) {
    register_user(reg, u, key_of(u).pk);
  }
  if (with_admin) {
    register_admin(reg, key_of("admin").pk);
  }
  return reg;
}

inline entry make_data_entry(const std::string &user, const std::string &payload,
                             std::optional<expiry> expires = std::nullopt,
                             std::vector<entry_ref> deps = {}) {
  entry e;
  e.kind = entry_kind::data;
  e.user = user;
  e.payload = to_bytes(payload);
  e.expires = expires;
  e.depends_on = std::move(deps);
  sign_entry(e, key_of(user).sk);
  return e;
}

inline entry make_delete_entry(const std::string &user, entry_ref target) {
  entry e;
  e.kind = entry_kind::delete_request;
  e.user = user;
  e.target = target;
  sign_entry(e, key_of(user).sk);
  return e;
}

// Manual block builders: link, number and seal relative to the current head.
// These bypass the production engine on purpose so that model-level tests do
// not depend on higher layers.
inline block make_normal_block(const chain &c, std::vector<entry> entries,
                               std::uint64_t timestamp) {
  block b;
  b.kind = block_kind::normal;
  b.number = head(c).number + 1;
  b.timestamp = timestamp;
  b.previous_hash = head(c).own_hash;
  b.nonce = default_nonce();
  b.entries = std::move(entries);
  seal_block(b);
  return b;
}

inline block make_empty_block(const chain &c, std::uint64_t timestamp) {
  block b;
  b.kind = block_kind::empty;
  b.number = head(c).number + 1;
  b.timestamp = timestamp;
  b.previous_hash = head(c).own_hash;
  seal_block(b);
  return b;
}

inline block make_summary_block_raw(const chain &c,
                                    std::vector<summary_entry> summaries) {
  block b;
  b.kind = block_kind::summary;
  b.number = head(c).number + 1;
  b.timestamp = head(c).timestamp;
  b.previous_hash = head(c).own_hash;
  b.summaries = std::move(summaries);
  seal_block(b);
  return b;
}

inline summary_entry carry_of(const chain &c, entry_ref ref) {
  const block *b = block_by_number(c, ref.block_number);
  summary_entry se;
  se.origin_block = ref.block_number;
  se.origin_timestamp = b->timestamp;
  se.origin_entry = ref.entry_number;
  se.inner = b->entries[ref.entry_number];
  return se;
}

// Recomputes links and hashes from a given index onwards; used after a test
// deliberately mutates a block in the middle of a chain.
inline void rebuild_links(chain &c, std::size_t from) {
  for (std::size_t i = from; i < c.blocks.size(); ++i) {
    if (i > 0) {
      c.blocks[i].previous_hash = c.blocks[i - 1].own_hash;
    }
    seal_block(c.blocks[i]);
  }
}

inline chain_config tiny_config() {
  chain_config cfg;
  cfg.delta_l = 3;
  cfg.l_max = 8;
  cfg.l_min = 3;
  cfg.min_summary_blocks = 1;
  cfg.min_time_coverage = 0;
  cfg.heartbeat_interval = 1;
  cfg.redundancy_enabled = false;
  return cfg;
}

// Eight blocks, delta_l = 3: summaries at 2 and 5, a data entry in blocks
// 1, 3 and 4, one more at 6, heartbeat at 7.
inline chain build_fixture_chain() {
  chain c = make_chain(tiny_config(), 0);
  c.blocks.push_back(make_normal_block(c, {make_data_entry("alice", "ALPHA")}, 1));
  c.blocks.push_back(make_summary_block_raw(c, {}));
  c.blocks.push_back(make_normal_block(c, {make_data_entry("bob", "BRAVO")}, 2));
  c.blocks.push_back(make_normal_block(c, {make_data_entry("carol", "CHARLIE")}, 3));
  c.blocks.push_back(make_summary_block_raw(c, {}));
  c.blocks.push_back(make_normal_block(c, {make_data_entry("alice", "DELTA")}, 4));
  c.blocks.push_back(make_empty_block(c, 5));
  return c;
}

// Reference scenario, first stage: ALPHA, BRAVO, CHARLIE appended, then bob
// requests deletion of BRAVO at (3,0); the mark is set, nothing dropped yet.
// Blocks 0..7 with summaries at 2 and 5, the request in block 6.
inline chain build_scenario_stage1() {
  chain c = make_chain(tiny_config(), 0);
  c.blocks.push_back(make_normal_block(c, {make_data_entry("alice", "ALPHA")}, 1));
  c.blocks.push_back(make_summary_block_raw(c, {}));
  c.blocks.push_back(make_normal_block(c, {make_data_entry("bob", "BRAVO")}, 2));
  c.blocks.push_back(make_normal_block(c, {make_data_entry("carol", "CHARLIE")}, 3));
  c.blocks.push_back(make_summary_block_raw(c, {}));
  c.blocks.push_back(make_normal_block(c, {make_delete_entry("bob", {3, 0})}, 4));
  c.blocks.push_back(make_empty_block(c, 5));
  key_registry reg = make_registry();
  auto [marked, decision] = process_delete_request(c, {6, 0}, reg);
  return marked;
}

// Second stage: heartbeats until the chain is one block short of the next
// summary slot (blocks 0..10); the summary at 11 will have to merge two
// sequences to satisfy l_max = 8.
inline chain build_scenario_stage2() {
  chain c = build_scenario_stage1();
  c.blocks.push_back(make_summary_block_raw(c, {}));  // 8
  c.blocks.push_back(make_empty_block(c, 7));         // 9
  c.blocks.push_back(make_empty_block(c, 8));         // 10
  return c;
}

}  // namespace pc_test
