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
#include <catch2/catch_amalgamated.hpp>

#include "prunechain/sequences.hpp"
#include "support/helpers.hpp"

using namespace prunechain;
using namespace pc_test;

TEST_CASE("summary positions fall on the last slot of each window") {
  CHECK_FALSE(is_summary_position(0, 3));
  CHECK_FALSE(is_summary_position(1, 3));
  CHECK(is_summary_position(2, 3));
  CHECK_FALSE(is_summary_position(3, 3));
  CHECK(is_summary_position(5, 3));
  CHECK(is_summary_position(8, 3));

  CHECK(is_summary_position(9, 10));
  CHECK_FALSE(is_summary_position(10, 10));
  CHECK(is_summary_position(19, 10));

  CHECK(is_sequence_start(0, 3));
  CHECK(is_sequence_start(6, 3));
  CHECK_FALSE(is_sequence_start(7, 3));
}

TEST_CASE("boundaries partition the fixture into two full sequences and a tail") {
  chain c = build_fixture_chain();  // blocks 0..7, delta_l 3
  auto seqs = sequence_boundaries(c);
  REQUIRE(seqs.size() == 3);

  CHECK(seqs[0] == sequence{1, 1, 0, 2, true});
  CHECK(seqs[1] == sequence{2, 2, 3, 5, true});
  CHECK(seqs[2] == sequence{3, 3, 6, 7, false});
  CHECK(seqs[2].length() == 2);

  auto complete = complete_sequences(c);
  REQUIRE(complete.size() == 2);
  CHECK(complete[0].first_block == 0);
  CHECK(complete[1].first_block == 3);
}

TEST_CASE("a genesis-only chain is a single partial sequence") {
  chain c = make_chain(tiny_config(), 0);
  auto seqs = sequence_boundaries(c);
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].first_block == 0);
  CHECK(seqs[0].last_block == 0);
  CHECK_FALSE(seqs[0].complete);
}

TEST_CASE("a chain ending exactly on a summary has no partial tail") {
  chain c = make_chain(tiny_config(), 0);
  c.blocks.push_back(make_normal_block(c, {}, 1));
  c.blocks.push_back(make_summary_block_raw(c, {}));
  auto seqs = sequence_boundaries(c);
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].complete);
  CHECK(seqs[0].last_block == 2);
}

TEST_CASE("indices restart at the marker but ordinals stay absolute") {
  // live window 6..11 after a shift, delta_l 3
  chain c;
  c.config = tiny_config();
  c.marker = 6;

  block first;
  first.kind = block_kind::normal;
  first.number = 6;
  first.timestamp = 4;
  first.previous_hash = sha256(to_bytes("elsewhere"));
  first.nonce = default_nonce();
  seal_block(first);
  c.blocks.push_back(first);

  c.blocks.push_back(make_empty_block(c, 5));
  c.blocks.push_back(make_summary_block_raw(c, {}));
  c.blocks.push_back(make_empty_block(c, 6));
  c.blocks.push_back(make_empty_block(c, 7));
  c.blocks.push_back(make_summary_block_raw(c, {}));

  auto seqs = sequence_boundaries(c);
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[0] == sequence{1, 3, 6, 8, true});
  CHECK(seqs[1] == sequence{2, 4, 9, 11, true});
}

TEST_CASE("sequence ordinals are stable across shifts") {
  CHECK(sequence_ordinal(0, 3) == 1);
  CHECK(sequence_ordinal(3, 3) == 2);
  CHECK(sequence_ordinal(6, 3) == 3);
  CHECK(sequence_ordinal(30, 10) == 4);
}
