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

#include <string>

#include "prunechain/types.hpp"

namespace prunechain {

// Console rendering.  One line per block:
//
//   0; 0; deadb; aa4dd
//   1; 1; aa4dd; 7b1fe; [D:ALPHA K:alice S:89abc]
//   S2; 1; 7b1fe; 55e01; []
//   6; 4; 1c3a9; e07d2; [DEL:(3,0) K:bob S:4f112]
//   S11; 8; 77aa0; 3c9d4; [@(1,0,t1) D:ALPHA K:alice S:89abc | ...] R(w2,9f801)
//
// Hashes and signatures are abbreviated to their first five hex digits;
// summary blocks carry an S prefix and repeat their origin tags.

namespace detail {

inline std::string short_hex(const std::uint8_t *data, std::size_t n,
                             std::size_t digits = 5) {
  std::string hex = to_hex(data, n);
  return hex.substr(0, digits);
}

inline std::string printable_payload(const bytes &payload) {
  bool printable = true;
  for (std::uint8_t b : payload) {
    if (b < 0x20 || b > 0x7e) {
      printable = false;
      break;
    }
  }
  if (printable) return to_string(payload);
  return "0x" + to_hex(payload);
}

}  // namespace detail

inline std::string render_entry(const entry &e) {
  std::string out;
  if (e.kind == entry_kind::delete_request) {
    out += "DEL:(" + std::to_string(e.target->block_number) + "," +
           std::to_string(e.target->entry_number) + ")";
  } else {
    out += "D:" + detail::printable_payload(e.payload);
  }
  out += " K:" + e.user;
  out += " S:" + detail::short_hex(e.sig.data(), e.sig.size());
  return out;
}

inline std::string render_summary_entry(const summary_entry &se) {
  return "@(" + std::to_string(se.origin_block) + "," +
         std::to_string(se.origin_entry) + ",t" +
         std::to_string(se.origin_timestamp) + ") " + render_entry(se.inner);
}

inline std::string render_block(const block &b) {
  std::string out;
  if (b.kind == block_kind::summary) out += "S";
  out += std::to_string(b.number);
  out += "; " + std::to_string(b.timestamp);
  out += "; " + detail::short_hex(b.previous_hash.data(), b.previous_hash.size());
  out += "; " + detail::short_hex(b.own_hash.data(), b.own_hash.size());
  if (b.kind == block_kind::normal && !b.entries.empty()) {
    out += "; [";
    for (std::size_t i = 0; i < b.entries.size(); ++i) {
      if (i > 0) out += " | ";
      out += render_entry(b.entries[i]);
    }
    out += "]";
  } else if (b.kind == block_kind::summary) {
    out += "; [";
    for (std::size_t i = 0; i < b.summaries.size(); ++i) {
      if (i > 0) out += " | ";
      out += render_summary_entry(b.summaries[i]);
    }
    out += "]";
    if (b.redundancy) {
      out += " R(w" + std::to_string(b.redundancy->sequence_index) + "," +
             detail::short_hex(b.redundancy->merkle_root.data(),
                               b.redundancy->merkle_root.size()) +
             ")";
    }
  }
  return out;
}

// Plain rendering of the whole live chain, one block per line, LF endings.
// This is the byte-exact format the golden files freeze.
inline std::string golden_render(const chain &c) {
  std::string out;
  for (const block &b : c.blocks) {
    out += render_block(b);
    out += "\n";
  }
  return out;
}

// Interactive variant: summary lines in blue when color is on.
inline std::string render_chain(const chain &c, bool color) {
  if (!color) return golden_render(c);
  std::string out;
  for (const block &b : c.blocks) {
    if (b.kind == block_kind::summary) {
      out += "\x1b[34m" + render_block(b) + "\x1b[0m\n";
    } else {
      out += render_block(b) + "\n";
    }
  }
  return out;
}

}  // namespace prunechain
