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
#include <vector>

#include "prunechain/types.hpp"

namespace prunechain {

// A run of delta_l consecutive blocks ending in a summary block.  Indices are
// 1-based counted from the current marker; ordinal is the absolute 1-based
// position counted from block 0 and is stable across marker shifts.
struct sequence {
  std::uint64_t index = 0;
  std::uint64_t ordinal = 0;
  std::uint64_t first_block = 0;
  std::uint64_t last_block = 0;
  bool complete = false;

  std::uint64_t length() const { return last_block - first_block + 1; }

  bool operator==(const sequence &) const = default;
};

// Block numbers divide into fixed windows of delta_l, independent of the
// marker: a window starts at a multiple of delta_l and its last position
// carries the summary block.
inline bool is_sequence_start(std::uint64_t number, std::uint64_t delta_l) {
  return number % delta_l == 0;
}

inline bool is_summary_position(std::uint64_t number, std::uint64_t delta_l) {
  return (number + 1) % delta_l == 0;
}

// True when the next block to append must be a summary block.
inline bool needs_summary(const chain &c) {
  return is_summary_position(head(c).number + 1, c.config.delta_l);
}

inline std::uint64_t sequence_ordinal(std::uint64_t first_block,
                                      std::uint64_t delta_l) {
  return first_block / delta_l + 1;
}

// Partitions the live blocks into sequences.  A trailing run without its
// closing summary block yet is reported with complete == false.
// @pre the chain is structurally sound (marker at a sequence start,
//      contiguous numbering, summaries exactly at summary positions)
inline std::vector<sequence> sequence_boundaries(const chain &c) {
  std::vector<sequence> out;
  if (c.blocks.empty()) return out;
  const std::uint64_t delta_l = c.config.delta_l;
  const std::uint64_t head_number = head(c).number;
  std::uint64_t index = 1;
  for (std::uint64_t first = c.marker; first <= head_number;
       first += delta_l, ++index) {
    sequence s;
    s.index = index;
    s.ordinal = sequence_ordinal(first, delta_l);
    s.first_block = first;
    std::uint64_t full_last = first + delta_l - 1;
    s.last_block = full_last < head_number ? full_last : head_number;
    s.complete = s.last_block == full_last;
    out.push_back(s);
  }
  return out;
}

inline std::vector<sequence> complete_sequences(const chain &c) {
  std::vector<sequence> out;
  for (const auto &s : sequence_boundaries(c)) {
    if (s.complete) out.push_back(s);
  }
  return out;
}

}  // namespace prunechain
