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
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "prunechain/chain.hpp"
#include "prunechain/serialize.hpp"
#include "prunechain/types.hpp"

namespace prunechain {

// ---------------------------------------------------------------------------
// Requests
// ---------------------------------------------------------------------------

inline entry make_delete_request(const std::string &user, entry_ref target,
                                 const secret_key &sk) {
  entry e;
  e.kind = entry_kind::delete_request;
  e.user = user;
  e.target = target;
  sign_entry(e, sk);
  return e;
}

// ---------------------------------------------------------------------------
// Authorization
// ---------------------------------------------------------------------------

struct auth_verdict {
  bool authorized = false;
  std::string reason;
};

// A deletion is legitimate when the request is signed with the same key that
// owns the targeted entry, or with an admin key.  Ownership is proven by the
// signature alone; the user label on the request carries no authority.
inline auth_verdict authorize(const chain &c, const entry &request,
                              const key_registry &registry) {
  if (request.kind != entry_kind::delete_request || !request.target) {
    throw error(errc::validation, "authorize: not a delete request");
  }
  const bytes message = entry_signing_bytes(request);
  for (const public_key &admin : registry.admins) {
    if (verify(admin, message, request.sig)) {
      return {true, ""};
    }
  }
  auto found = lookup_entry(c, *request.target);
  if (!found) {
    return {false, reason::not_found};
  }
  const public_key *owner = registry.find_user(found->value.user);
  if (owner != nullptr && verify(*owner, message, request.sig)) {
    return {true, ""};
  }
  return {false, reason::foreign_entry};
}

// ---------------------------------------------------------------------------
// Semantic cohesion
// ---------------------------------------------------------------------------

// What the owner of a dependent entry signs to consent to a deletion.
inline bytes cosign_message(entry_ref target) {
  bytes msg = to_bytes("prunechain-cosign");
  append_u64_be(msg, target.block_number);
  append_u64_be(msg, target.entry_number);
  return msg;
}

inline signature make_cosignature(entry_ref target, const secret_key &sk) {
  return sign(sk, cosign_message(target));
}

enum class cohesion_state {
  coherent,      // no uncovered dependents
  needs_cosign,  // dependents exist whose owners have not consented
  blocked,       // a dependent's owner is unknown, consent cannot be checked
};

struct cohesion_verdict {
  cohesion_state state = cohesion_state::coherent;
  std::vector<std::string> missing_parties;  // owners who still must consent
  std::vector<entry_ref> dependents;         // transitive closure over depends_on
};

namespace detail {

// Everything physically stored right now, keyed by origin coordinates:
// entries still in their original blocks plus entries carried in summaries.
inline std::map<entry_ref, entry> live_entries(const chain &c) {
  std::map<entry_ref, entry> out;
  for (const block &b : c.blocks) {
    if (b.kind == block_kind::normal) {
      for (std::size_t i = 0; i < b.entries.size(); ++i) {
        out[{b.number, i}] = b.entries[i];
      }
    } else if (b.kind == block_kind::summary) {
      for (const summary_entry &se : b.summaries) {
        out[{se.origin_block, se.origin_entry}] = se.inner;
      }
    }
  }
  return out;
}

}  // namespace detail

// Finds every live entry that transitively depends on the target.  Entries
// already marked for deletion do not require fresh consent.  A request with
// cosignatures from all owners involved passes; signatures by the requester
// over the request itself cover the requester's own dependents.
inline cohesion_verdict check_cohesion(const chain &c, entry_ref target,
                                       const entry &request,
                                       const std::vector<signature> &cosignatures,
                                       const key_registry &registry) {
  const std::map<entry_ref, entry> live = detail::live_entries(c);

  std::set<entry_ref> closure{target};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto &[ref, e] : live) {
      if (closure.count(ref) != 0) continue;
      for (const entry_ref &dep : e.depends_on) {
        if (closure.count(dep) != 0) {
          closure.insert(ref);
          grew = true;
          break;
        }
      }
    }
  }
  closure.erase(target);

  cohesion_verdict verdict;
  const bytes request_message = entry_signing_bytes(request);
  const bytes consent_message = cosign_message(target);
  std::set<std::string> missing;
  bool blocked = false;
  for (const entry_ref &ref : closure) {
    if (c.pending_deletions.count(ref) != 0) continue;
    verdict.dependents.push_back(ref);
    const std::string &owner = live.at(ref).user;
    const public_key *key = registry.find_user(owner);
    if (key == nullptr) {
      blocked = true;
      missing.insert(owner);
      continue;
    }
    if (verify(*key, request_message, request.sig)) {
      continue;  // the requester owns this dependent
    }
    bool consented = false;
    for (const signature &sig : cosignatures) {
      if (verify(*key, consent_message, sig)) {
        consented = true;
        break;
      }
    }
    if (!consented) {
      missing.insert(owner);
    }
  }
  verdict.missing_parties.assign(missing.begin(), missing.end());
  if (blocked) {
    verdict.state = cohesion_state::blocked;
  } else if (!missing.empty()) {
    verdict.state = cohesion_state::needs_cosign;
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Processing
// ---------------------------------------------------------------------------

// Outcome of handling one delete request.  A denied request stays in the
// chain but has no further effect; reason says why.
struct deletion_decision {
  entry_ref request;
  entry_ref target;
  bool approved = false;
  std::string reason;
  std::vector<std::string> required_cosigners;
  std::vector<entry_ref> marked;
};

// Evaluates the delete request stored at request_ref and, when it is
// legitimate and coherent, marks the target and its dependents for delayed
// deletion.  No block is touched: physical removal happens at the next
// summarization that folds the marked entries away.
inline std::pair<chain, deletion_decision> process_delete_request(
    const chain &c, entry_ref request_ref, const key_registry &registry,
    const std::vector<signature> &cosignatures = {}) {
  auto found_request = lookup_entry(c, request_ref);
  if (!found_request || found_request->value.kind != entry_kind::delete_request) {
    throw error(errc::validation, "no delete request at the given position");
  }
  const entry request = found_request->value;

  deletion_decision decision;
  decision.request = request_ref;
  decision.target = *request.target;

  if (!lookup_entry(c, decision.target)) {
    decision.reason = reason::not_found;
    return {c, decision};
  }
  auth_verdict auth = authorize(c, request, registry);
  if (!auth.authorized) {
    decision.reason = auth.reason;
    return {c, decision};
  }
  cohesion_verdict cohesion =
      check_cohesion(c, decision.target, request, cosignatures, registry);
  if (cohesion.state != cohesion_state::coherent) {
    decision.reason = reason::needs_cosign;
    decision.required_cosigners = cohesion.missing_parties;
    return {c, decision};
  }

  chain out = c;
  out.pending_deletions.insert(decision.target);
  decision.marked.push_back(decision.target);
  for (const entry_ref &ref : cohesion.dependents) {
    out.pending_deletions.insert(ref);
    decision.marked.push_back(ref);
  }
  std::sort(decision.marked.begin(), decision.marked.end());
  decision.approved = true;
  return {out, decision};
}

// Rebuilds the delayed-deletion marks implied by the requests still stored
// in the chain; used after importing a chain file.  Requests that needed
// cosignatures in their original session are re-evaluated without them.
inline void replay_delete_requests(chain &c, const key_registry &registry) {
  c.pending_deletions.clear();
  for (std::size_t i = 0; i < c.blocks.size(); ++i) {
    const block &b = c.blocks[i];
    if (b.kind != block_kind::normal) continue;
    for (std::size_t j = 0; j < b.entries.size(); ++j) {
      if (b.entries[j].kind != entry_kind::delete_request) continue;
      auto [next, decision] =
          process_delete_request(c, {b.number, j}, registry);
      c.pending_deletions = std::move(next.pending_deletions);
    }
  }
}

// ---------------------------------------------------------------------------
// Admission
// ---------------------------------------------------------------------------

struct admit_verdict {
  bool admitted = false;
  std::string reason;
};

// Gate for new data entries: the signature must verify against the signer's
// registered key and every dependency must resolve to an entry that is both
// present and not marked for deletion.
inline admit_verdict admit_transaction(const chain &c, const entry &e,
                                       const key_registry &registry) {
  if (e.kind != entry_kind::data) {
    throw error(errc::validation, "admit_transaction expects a data entry");
  }
  const public_key *key = registry.find_user(e.user);
  if (key == nullptr || !verify_entry_signature(e, *key)) {
    return {false, reason::bad_signature};
  }
  for (const entry_ref &dep : e.depends_on) {
    if (c.pending_deletions.count(dep) != 0) {
      return {false, reason::depends_on_marked};
    }
    if (!lookup_entry(c, dep)) {
      return {false, reason::depends_on_missing};
    }
  }
  return {true, ""};
}

}  // namespace prunechain
