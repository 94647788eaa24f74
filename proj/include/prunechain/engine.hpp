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

#include <optional>
#include <utility>
#include <vector>

#include "prunechain/chain.hpp"
#include "prunechain/deletion.hpp"
#include "prunechain/summarize.hpp"
#include "prunechain/types.hpp"

namespace prunechain {

struct submit_outcome {
  std::vector<block> appended;
  std::optional<deletion_decision> decision;  // set for delete requests
};

// Single-node block production.  Every command advances the logical clock by
// one step; when the next block number is a summary slot, the due summary
// block is appended first (possibly shrinking the chain), then the command's
// own block.  Marker shifts are self-approved: a lone node is its own
// electorate.
class chain_engine {
 public:
  chain_engine(chain c, key_registry registry, std::uint64_t clock)
      : chain_(std::move(c)),
        registry_(std::move(registry)),
        clock_(clock) {}

  static chain_engine create(const chain_config &config, key_registry registry,
                             std::uint64_t genesis_time = 0) {
    return chain_engine(make_chain(config, genesis_time), std::move(registry),
                        genesis_time);
  }

  const chain &state() const { return chain_; }
  const key_registry &registry() const { return registry_; }
  key_registry &registry() { return registry_; }
  std::uint64_t clock() const { return clock_; }
  const std::vector<prune_report> &reports() const { return reports_; }

  // Validates and appends one signed entry.  Data entries pass the admission
  // gate; delete requests are stored regardless of their merit (a denied
  // request simply stays on record with no effect) but must carry a genuine
  // signature of a known key.
  submit_outcome submit(const entry &e,
                        const std::vector<signature> &cosignatures = {}) {
    if (e.kind == entry_kind::data) {
      admit_verdict verdict = admit_transaction(chain_, e, registry_);
      if (!verdict.admitted) {
        throw error(verdict.reason == reason::bad_signature
                        ? errc::bad_signature
                        : errc::validation,
                    "entry rejected: " + verdict.reason);
      }
    } else {
      if (!request_signature_ok(e)) {
        throw error(errc::bad_signature,
                    "entry rejected: " + std::string(reason::bad_signature));
      }
    }
    ++clock_;
    submit_outcome outcome;
    roll_summary_if_due(outcome.appended);

    block b;
    b.kind = block_kind::normal;
    b.number = head(chain_).number + 1;
    b.timestamp = clock_;
    b.previous_hash = head(chain_).own_hash;
    b.nonce = default_nonce();
    b.entries = {e};
    seal_block(b);
    chain_.blocks.push_back(b);
    outcome.appended.push_back(b);

    if (e.kind == entry_kind::delete_request) {
      auto [next, decision] = process_delete_request(
          chain_, {b.number, 0}, registry_, cosignatures);
      chain_.pending_deletions = std::move(next.pending_deletions);
      outcome.decision = decision;
    }
    return outcome;
  }

  // One idle step: the due summary block if the position demands one,
  // otherwise a heartbeat once the configured interval has passed.
  std::vector<block> tick() {
    ++clock_;
    std::vector<block> appended;
    if (needs_summary(chain_)) {
      roll_summary_if_due(appended);
      return appended;
    }
    if (clock_ - head(chain_).timestamp >= chain_.config.heartbeat_interval) {
      block b;
      b.kind = block_kind::empty;
      b.number = head(chain_).number + 1;
      b.timestamp = clock_;
      b.previous_hash = head(chain_).own_hash;
      seal_block(b);
      chain_.blocks.push_back(b);
      appended.push_back(b);
    }
    return appended;
  }

 private:
  bool request_signature_ok(const entry &e) const {
    const bytes message = entry_signing_bytes(e);
    if (const public_key *pk = registry_.find_user(e.user)) {
      if (verify(*pk, message, e.sig)) return true;
    }
    for (const public_key &admin : registry_.admins) {
      if (verify(admin, message, e.sig)) return true;
    }
    return false;
  }

  void roll_summary_if_due(std::vector<block> &appended) {
    if (!needs_summary(chain_)) return;
    summary_plan plan = plan_summary(chain_);
    chain_ = apply_summary_plan(chain_, plan);
    appended.push_back(head(chain_));
    if (plan.prunes()) {
      reports_.push_back(plan.report);
    }
  }

  chain chain_;
  key_registry registry_;
  std::uint64_t clock_ = 0;
  std::vector<prune_report> reports_;
};

}  // namespace prunechain
