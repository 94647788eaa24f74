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

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prunechain/chain.hpp"
#include "prunechain/merkle.hpp"
#include "prunechain/sequences.hpp"
#include "prunechain/serialize.hpp"
#include "prunechain/types.hpp"

namespace prunechain {

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct dropped_entry {
  entry_ref ref;
  std::string reason;

  bool operator==(const dropped_entry &) const = default;
};

// What a shrink did: which sequences were folded into the new summary block,
// which entries fell out and why, and how the live window moved.
// When it shrank: new_length == old length + 1 - sum of merged lengths.
struct prune_report {
  std::vector<sequence> merged_sequences;
  std::vector<dropped_entry> dropped_entries;
  std::uint64_t old_marker = 0;
  std::uint64_t new_marker = 0;
  std::uint64_t new_length = 0;

  bool pruned() const { return !merged_sequences.empty(); }
};

// ---------------------------------------------------------------------------
// Expiry
// ---------------------------------------------------------------------------

// Verdict for one entry at summarization time: nullopt keeps it, otherwise
// the returned code says why it must not be carried forward.  Bounds are
// inclusive: an entry expiring at time 8888 survives while now <= 8888.
inline std::optional<std::string> apply_expiry(const entry &e,
                                               std::uint64_t now,
                                               std::uint64_t head_number) {
  if (e.kind != entry_kind::data || !e.expires) {
    return std::nullopt;
  }
  switch (e.expires->kind) {
    case expiry_kind::by_time:
      if (e.expires->bound < now) return std::string(reason::expired_by_time);
      break;
    case expiry_kind::by_block:
      if (e.expires->bound < head_number)
        return std::string(reason::expired_by_block);
      break;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Guards
// ---------------------------------------------------------------------------

struct guard_verdict {
  bool pass = true;
  std::string reason;

  static guard_verdict ok() { return {}; }
  static guard_verdict fail(std::string r) { return {false, std::move(r)}; }
};

// Checks whether folding the oldest k sequences keeps the chain above its
// floors.  Deliberately conservative: the new summary block is not counted
// toward length or summary minimums.
inline guard_verdict guards_allow(const chain &c, std::uint64_t k) {
  const std::uint64_t len = chain_length(c);
  const std::uint64_t removed = k * c.config.delta_l;
  if (len < removed || len - removed < c.config.l_min) {
    return guard_verdict::fail("length");
  }
  std::uint64_t summary_count = 0;
  for (const block &b : c.blocks) {
    if (b.kind == block_kind::summary) ++summary_count;
  }
  if (summary_count < k || summary_count - k < c.config.min_summary_blocks) {
    return guard_verdict::fail("summary-count");
  }
  if (c.config.min_time_coverage > 0) {
    const block *first_kept = block_by_number(c, c.marker + removed);
    if (first_kept == nullptr) {
      return guard_verdict::fail("length");
    }
    if (head(c).timestamp - first_kept->timestamp < c.config.min_time_coverage) {
      return guard_verdict::fail("time-coverage");
    }
  }
  return guard_verdict::ok();
}

inline guard_verdict prune_guards(const chain &c) { return guards_allow(c, 1); }

// ---------------------------------------------------------------------------
// Merging
// ---------------------------------------------------------------------------

struct merge_result {
  std::vector<summary_entry> carry;
  std::vector<sequence> merged;
  std::vector<dropped_entry> dropped;
};

namespace detail {

// Smallest k with old_length + 1 - k * delta_l <= l_max.
inline std::uint64_t sequences_needed(const chain &c) {
  const std::uint64_t len = chain_length(c);
  if (len <= c.config.l_max) return 0;
  const std::uint64_t excess = len + 1 - c.config.l_max;
  return (excess + c.config.delta_l - 1) / c.config.delta_l;
}

// Applies the drop rules to everything stored in the given blocks and
// collects the survivors as origin-tagged summary entries.
inline void collect_block(const chain &c, const block &b, std::uint64_t now,
                          std::uint64_t head_number, merge_result &out) {
  switch (b.kind) {
    case block_kind::normal:
      for (std::size_t i = 0; i < b.entries.size(); ++i) {
        const entry &e = b.entries[i];
        entry_ref ref{b.number, i};
        if (e.kind == entry_kind::delete_request) {
          out.dropped.push_back({ref, reason::request_never_copied});
          continue;
        }
        if (c.pending_deletions.count(ref) != 0) {
          out.dropped.push_back({ref, reason::deleted_on_request});
          continue;
        }
        if (auto expired = apply_expiry(e, now, head_number)) {
          out.dropped.push_back({ref, *expired});
          continue;
        }
        summary_entry se;
        se.origin_block = b.number;
        se.origin_timestamp = b.timestamp;
        se.origin_entry = i;
        se.inner = e;
        out.carry.push_back(std::move(se));
      }
      break;
    case block_kind::summary:
      for (const summary_entry &se : b.summaries) {
        entry_ref ref{se.origin_block, se.origin_entry};
        if (c.pending_deletions.count(ref) != 0) {
          out.dropped.push_back({ref, reason::deleted_on_request});
          continue;
        }
        if (auto expired = apply_expiry(se.inner, now, head_number)) {
          out.dropped.push_back({ref, *expired});
          continue;
        }
        out.carry.push_back(se);  // origin tags travel unchanged
      }
      break;
    case block_kind::empty:
      break;
  }
}

}  // namespace detail

// Folds the oldest complete sequences into a carry set.  Merges as many
// sequences as the length target demands, capped by what the guards and the
// number of complete sequences allow.
// @pre chain_length(c) > c.config.l_max and guards_allow(c, 1) passes
inline merge_result merge_oldest(const chain &c) {
  merge_result out;
  std::vector<sequence> complete = complete_sequences(c);
  std::uint64_t k = std::min<std::uint64_t>(detail::sequences_needed(c),
                                            complete.size());
  while (k > 0 && !guards_allow(c, k).pass) {
    --k;
  }
  if (k == 0) {
    throw error(errc::guard_violation, "merge_oldest: guards forbid any merge");
  }
  const std::uint64_t now = head(c).timestamp;
  const std::uint64_t head_number = head(c).number;
  for (std::uint64_t s = 0; s < k; ++s) {
    const sequence &seq = complete[s];
    out.merged.push_back(seq);
    for (std::uint64_t n = seq.first_block; n <= seq.last_block; ++n) {
      detail::collect_block(c, *block_by_number(c, n), now, head_number, out);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Redundancy
// ---------------------------------------------------------------------------

// Leaves for the anti-tamper tree of one sequence: every data entry the
// sequence physically holds, in block order, in carried form.
inline std::vector<bytes> sequence_merkle_leaves(const chain &c,
                                                 const sequence &seq) {
  std::vector<bytes> leaves;
  for (std::uint64_t n = seq.first_block; n <= seq.last_block; ++n) {
    const block *b = block_by_number(c, n);
    if (b == nullptr) continue;
    if (b->kind == block_kind::normal) {
      for (std::size_t i = 0; i < b->entries.size(); ++i) {
        if (b->entries[i].kind != entry_kind::data) continue;
        summary_entry se;
        se.origin_block = b->number;
        se.origin_timestamp = b->timestamp;
        se.origin_entry = i;
        se.inner = b->entries[i];
        leaves.push_back(canonical_serialize(se));
      }
    } else if (b->kind == block_kind::summary) {
      for (const summary_entry &se : b->summaries) {
        leaves.push_back(canonical_serialize(se));
      }
    }
  }
  return leaves;
}

// Anchors the middle live sequence into the given summary block so that a
// majority rewriting recent history still contradicts an honest copy of the
// middle of the chain.  The middle is the ceiling midpoint of the complete
// sequences; the stored index is the absolute ordinal.
inline block embed_redundancy(const chain &c, block summary) {
  std::vector<sequence> complete = complete_sequences(c);
  if (complete.size() < 2) {
    throw error(errc::not_enough_sequences,
                "redundancy needs at least two complete sequences");
  }
  const sequence &mid = complete[(complete.size() + 1) / 2 - 1];
  redundancy_ref ref;
  ref.sequence_index = mid.ordinal;
  ref.merkle_root = compute_merkle_root(sequence_merkle_leaves(c, mid));
  summary.redundancy = ref;
  seal_block(summary);
  return summary;
}

// ---------------------------------------------------------------------------
// Summary construction
// ---------------------------------------------------------------------------

// Builds the summary block that closes the current sequence.  It repeats the
// head timestamp and carries exactly the given survivors.
// @pre needs_summary(c)
inline block build_summary_block(const chain &c,
                                 std::vector<summary_entry> carry) {
  if (!needs_summary(c)) {
    throw error(errc::invalid_chain,
                "summary block built outside a summary position");
  }
  block b;
  b.kind = block_kind::summary;
  b.number = head(c).number + 1;
  b.timestamp = head(c).timestamp;
  b.previous_hash = head(c).own_hash;
  b.summaries = std::move(carry);
  seal_block(b);
  if (c.config.redundancy_enabled && complete_sequences(c).size() >= 2) {
    b = embed_redundancy(c, std::move(b));
  }
  return b;
}

// A fully determined next summary block plus the shrink it implies, computed
// without touching the chain.  Identical chains yield identical plans, which
// is what keeps independently planning nodes in lockstep.
struct summary_plan {
  block summary;
  merge_result merge;
  std::uint64_t new_marker = 0;
  prune_report report;

  bool prunes() const { return !merge.merged.empty(); }
};

// @pre needs_summary(c)
// @post plan.summary.timestamp == head(c).timestamp
inline summary_plan plan_summary(const chain &c, bool allow_merge = true) {
  summary_plan plan;
  plan.new_marker = c.marker;
  plan.report.old_marker = c.marker;
  plan.report.new_marker = c.marker;
  if (allow_merge && chain_length(c) > c.config.l_max &&
      guards_allow(c, 1).pass) {
    plan.merge = merge_oldest(c);
    plan.new_marker = plan.merge.merged.back().last_block + 1;
    std::uint64_t removed = 0;
    for (const sequence &s : plan.merge.merged) {
      removed += s.length();
    }
    plan.report.merged_sequences = plan.merge.merged;
    plan.report.dropped_entries = plan.merge.dropped;
    plan.report.new_marker = plan.new_marker;
    plan.report.new_length = chain_length(c) + 1 - removed;
  } else {
    plan.report.new_length = chain_length(c) + 1;
  }
  plan.summary = build_summary_block(c, plan.merge.carry);
  return plan;
}

// Appends the planned summary and, when the plan shrinks, moves the marker.
// A shrinking plan must carry an approving ballot; appending a plain summary
// block needs none.
inline chain apply_summary_plan(const chain &c, const summary_plan &plan,
                                const ballot &vote = local_ballot(
                                    ballot_subject::marker_shift)) {
  if (plan.summary.previous_hash != head(c).own_hash) {
    throw error(errc::invalid_chain, "summary plan is stale");
  }
  if (plan.prunes() && !vote.approved) {
    throw error(errc::vote_rejected, "marker shift was voted down");
  }
  chain out = c;
  out.blocks.push_back(plan.summary);
  if (plan.prunes()) {
    if (!is_sequence_start(plan.new_marker, out.config.delta_l)) {
      throw error(errc::invalid_marker, "new marker off a sequence start");
    }
    out.blocks.erase(out.blocks.begin(),
                     out.blocks.begin() + (plan.new_marker - out.marker));
    out.marker = plan.new_marker;
    std::erase_if(out.pending_deletions, [&out](const entry_ref &ref) {
      return !lookup_entry(out, ref).has_value();
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Top-level shrink
// ---------------------------------------------------------------------------

// Shrinks the chain if it is due: too long, at a summary position, guards
// satisfied.  Returns the unchanged chain with an empty report when the
// length is fine or the position does not allow a summary block yet; throws
// when shrinking is overdue but a guard forbids it.
inline std::pair<chain, prune_report> prune(const chain &c,
                                            [[maybe_unused]] std::uint64_t now) {
  prune_report noop;
  noop.old_marker = c.marker;
  noop.new_marker = c.marker;
  noop.new_length = chain_length(c);
  if (chain_length(c) <= c.config.l_max) {
    return {c, noop};
  }
  if (guard_verdict g = prune_guards(c); !g.pass) {
    throw error(errc::guard_violation, "prune guard: " + g.reason);
  }
  if (!needs_summary(c)) {
    return {c, noop};  // deferred until the window closes
  }
  summary_plan plan = plan_summary(c);
  chain out = apply_summary_plan(c, plan);
  return {out, plan.report};
}

// Governance-driven shift: drops all blocks below the new marker without
// summarizing them.  Requires an approving ballot and a marker that is a
// live sequence start.
inline chain shift_marker(const chain &c, std::uint64_t new_marker,
                          const ballot &vote) {
  if (!vote.approved) {
    throw error(errc::vote_rejected, "marker shift was voted down");
  }
  if (new_marker < c.marker || new_marker > head(c).number ||
      !is_sequence_start(new_marker, c.config.delta_l)) {
    throw error(errc::invalid_marker, "marker must be a live sequence start");
  }
  chain out = c;
  out.blocks.erase(out.blocks.begin(),
                   out.blocks.begin() + (new_marker - out.marker));
  out.marker = new_marker;
  std::erase_if(out.pending_deletions, [&out](const entry_ref &ref) {
    return !lookup_entry(out, ref).has_value();
  });
  return out;
}

}  // namespace prunechain
