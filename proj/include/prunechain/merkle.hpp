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

#include <vector>

#include "prunechain/bytes.hpp"
#include "prunechain/crypto.hpp"

namespace prunechain {

// Domain-separated hashing: leaves and interior nodes use distinct prefixes
// so a leaf can never be confused with a node of another tree shape.
inline digest merkle_leaf_hash(const bytes &data) {
  bytes buf;
  buf.reserve(data.size() + 1);
  buf.push_back(0x00);
  buf.insert(buf.end(), data.begin(), data.end());
  return sha256(buf);
}

inline digest merkle_node_hash(const digest &left, const digest &right) {
  bytes buf;
  buf.reserve(65);
  buf.push_back(0x01);
  buf.insert(buf.end(), left.begin(), left.end());
  buf.insert(buf.end(), right.begin(), right.end());
  return sha256(buf);
}

// Root of the tree over the given leaves.  A level with an odd number of
// nodes duplicates its last node; a single leaf is combined with itself once;
// no leaves at all hash the empty string.
inline digest compute_merkle_root(const std::vector<bytes> &leaves) {
  if (leaves.empty()) {
    return sha256(bytes{});
  }
  std::vector<digest> level;
  level.reserve(leaves.size());
  for (const auto &leaf : leaves) {
    level.push_back(merkle_leaf_hash(leaf));
  }
  if (level.size() == 1) {
    return merkle_node_hash(level[0], level[0]);
  }
  while (level.size() > 1) {
    std::vector<digest> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
      const digest &left = level[i];
      const digest &right = (i + 1 < level.size()) ? level[i + 1] : level[i];
      next.push_back(merkle_node_hash(left, right));
    }
    level = std::move(next);
  }
  return level[0];
}

}  // namespace prunechain
