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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prunechain/chain.hpp"
#include "prunechain/chain_io.hpp"
#include "prunechain/deletion.hpp"
#include "prunechain/summarize.hpp"
#include "prunechain/types.hpp"

namespace prunechain {

// Deterministic discrete-event simulation of a quorum of anchor nodes.
// Consensus is a stand-in: a round-robin proposer per height plus follower
// validation.  Summary blocks are never propagated — every node builds its
// own — and the quorum stays in lockstep exactly because summary planning is
// a pure function of the chain.

// ---------------------------------------------------------------------------
// Seeded randomness
// ---------------------------------------------------------------------------

// SplitMix64: tiny, well-mixed, and stable across platforms, which is what a
// reproducible trace needs.
class splitmix64 {
 public:
  explicit splitmix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Nodes and messages
// ---------------------------------------------------------------------------

struct anchor_node {
  int node_id = 0;
  chain c;
  std::vector<entry> mempool;

  // fault injection hooks
  bool corrupt_summaries = false;  // perturbs its own summary carries
  bool contrarian_votes = false;   // votes against its own local check
  bool unfiltered_once = false;    // next proposal skips the admission filter

  // plumbing
  std::uint64_t partitioned_until = 0;  // cut off while now < this
  std::uint64_t proposed_height = 0;    // highest height proposed so far
  bool syncing = false;                 // waiting for a catch-up response
  std::map<std::uint64_t, block> stash;  // proposals that arrived early

  bool faulty() const { return corrupt_summaries || contrarian_votes; }
  bool partitioned(std::uint64_t now) const { return now < partitioned_until; }
};

enum class message_kind : std::uint8_t {
  submit_entry = 1,
  propose_block = 2,
  summary_hash_announce = 3,
  ballot_request = 4,
  ballot_vote = 5,
  sync_request = 6,
  sync_response = 7,
};

inline const char *message_kind_name(message_kind k) {
  switch (k) {
    case message_kind::submit_entry: return "submit_entry";
    case message_kind::propose_block: return "propose_block";
    case message_kind::summary_hash_announce: return "summary_hash_announce";
    case message_kind::ballot_request: return "ballot_request";
    case message_kind::ballot_vote: return "ballot_vote";
    case message_kind::sync_request: return "sync_request";
    case message_kind::sync_response: return "sync_response";
  }
  return "unknown";
}

// One queued network message.  The whole queue is processed in strict
// (deliver_at, sender, arrival) order, which makes delivery — and therefore
// the entire simulation — a pure function of the configuration.
struct message {
  message_kind kind = message_kind::submit_entry;
  int sender = -1;  // -1: an external client
  int recipient = 0;
  std::uint64_t deliver_at = 0;
  std::uint64_t arrival = 0;  // global enqueue counter, the final tie-break

  entry e;                     // submit_entry
  block b;                     // propose_block
  std::uint64_t height = 0;    // summary_hash_announce, sync_request
  digest hash{};               // summary_hash_announce
  std::optional<chain> snapshot;  // sync_response
};

// ---------------------------------------------------------------------------
// Quorum operations
// ---------------------------------------------------------------------------

inline int proposer_for(std::uint64_t height, int n_nodes) {
  return static_cast<int>(height % static_cast<std::uint64_t>(n_nodes));
}

namespace detail {

inline bool request_signature_ok(const entry &e, const key_registry &registry) {
  const bytes message = entry_signing_bytes(e);
  if (const public_key *pk = registry.find_user(e.user)) {
    if (verify(*pk, message, e.sig)) return true;
  }
  for (const public_key &admin : registry.admins) {
    if (verify(admin, message, e.sig)) return true;
  }
  return false;
}

inline bool entry_admissible(const chain &c, const entry &e,
                             const key_registry &registry) {
  if (e.kind == entry_kind::data) {
    return admit_transaction(c, e, registry).admitted;
  }
  return e.target.has_value() && request_signature_ok(e, registry);
}

}  // namespace detail

// Builds the next normal block from the admissible subset of the pending
// entries.  Only the deterministic round-robin proposer may do this.
inline block produce_block(const anchor_node &node, int n_nodes,
                           const std::vector<entry> &pending,
                           const key_registry &registry, std::uint64_t now) {
  const std::uint64_t height = head(node.c).number + 1;
  if (proposer_for(height, n_nodes) != node.node_id) {
    throw error(errc::not_proposer,
                "node " + std::to_string(node.node_id) +
                    " is not the proposer for height " + std::to_string(height));
  }
  block b;
  b.kind = block_kind::normal;
  b.number = height;
  b.timestamp = now;
  b.previous_hash = head(node.c).own_hash;
  b.nonce = default_nonce();
  for (const entry &e : pending) {
    if (detail::entry_admissible(node.c, e, registry)) b.entries.push_back(e);
  }
  seal_block(b);
  return b;
}

// Emits an empty block when the node has been idle for the heartbeat
// interval; this is what keeps deletion latency bounded on a quiet chain.
inline std::optional<block> heartbeat(const anchor_node &node,
                                      std::uint64_t now) {
  if (!node.mempool.empty()) return std::nullopt;
  if (now - head(node.c).timestamp < node.c.config.heartbeat_interval) {
    return std::nullopt;
  }
  block b;
  b.kind = block_kind::empty;
  b.number = head(node.c).number + 1;
  b.timestamp = now;
  b.previous_hash = head(node.c).own_hash;
  seal_block(b);
  return b;
}

// Result of comparing the latest common summary block across the quorum.
// Partitions group node ids by summary hash; a single group means in sync.
struct sync_result {
  bool in_sync = true;
  std::uint64_t height = 0;
  std::vector<std::vector<int>> partitions;
};

inline std::optional<std::uint64_t> latest_summary_height(const chain &c) {
  for (auto it = c.blocks.rbegin(); it != c.blocks.rend(); ++it) {
    if (it->kind == block_kind::summary) return it->number;
  }
  return std::nullopt;
}

// Synchronization is checked by comparing summary-block hashes, never by
// shipping summaries around.  All nodes must have reached the same summary
// height; a node that lags is a retry-later error, not a fork.
inline sync_result sync_check(const std::vector<anchor_node> &nodes) {
  if (nodes.empty()) {
    throw error(errc::validation, "sync check needs at least one node");
  }
  std::optional<std::uint64_t> h = latest_summary_height(nodes[0].c);
  for (const anchor_node &n : nodes) {
    if (latest_summary_height(n.c) != h) {
      throw error(errc::validation,
                  "height-mismatch: a node lags behind the quorum");
    }
  }
  sync_result result;
  if (!h) return result;  // no summaries anywhere yet: trivially in sync
  result.height = *h;
  std::vector<digest> seen;
  for (const anchor_node &n : nodes) {
    const digest &own = block_by_number(n.c, *h)->own_hash;
    auto pos = std::find(seen.begin(), seen.end(), own);
    if (pos == seen.end()) {
      seen.push_back(own);
      result.partitions.push_back({n.node_id});
    } else {
      result.partitions[pos - seen.begin()].push_back(n.node_id);
    }
  }
  result.in_sync = result.partitions.size() == 1;
  return result;
}

// Local checks behind the two ballot subjects.
inline bool marker_shift_acceptable(const chain &c, std::uint64_t new_marker) {
  return new_marker >= c.marker &&
         is_sequence_start(new_marker, c.config.delta_l);
}

inline bool deletion_acceptable(const chain &c, const entry &request,
                                const key_registry &registry) {
  if (request.kind != entry_kind::delete_request || !request.target) {
    return false;
  }
  if (!authorize(c, request, registry).authorized) return false;
  return check_cohesion(c, *request.target, request, {}, registry).state ==
         cohesion_state::coherent;
}

// Polls every node once.  Honest nodes vote their local check; contrarian
// nodes vote the opposite.  Approval needs a strict majority, so an even
// split rejects.
inline ballot hold_ballot(const std::vector<anchor_node> &nodes,
                          ballot_subject subject, std::uint64_t new_marker,
                          const std::optional<entry> &request,
                          const key_registry &registry) {
  ballot b;
  b.subject = subject;
  b.marker = new_marker;
  if (request && request->target) b.target = *request->target;
  int yes = 0;
  for (const anchor_node &n : nodes) {
    bool check = false;
    if (subject == ballot_subject::marker_shift) {
      check = marker_shift_acceptable(n.c, new_marker);
    } else if (request) {
      check = deletion_acceptable(n.c, *request, registry);
    }
    const bool vote = n.contrarian_votes ? !check : check;
    b.votes[n.node_id] = vote;
    if (vote) ++yes;
  }
  b.approved = 2 * yes > static_cast<int>(nodes.size());
  return b;
}

// A client accepts a chain only if it is traceable from the status quo — the
// head that a strict majority of trusted anchors attest — never because it
// is longer or carries higher block numbers.
struct client_verdict {
  bool accepted = false;
  std::string reason;
};

inline client_verdict client_sync(const std::vector<const chain *> &trusted,
                                  const chain &candidate) {
  if (trusted.empty()) return {false, "no trusted anchors reachable"};
  std::map<digest, int> heads;
  for (const chain *t : trusted) ++heads[head(*t).own_hash];
  const digest *attested = nullptr;
  for (const auto &[hash, count] : heads) {
    if (2 * count > static_cast<int>(trusted.size())) {
      attested = &hash;
      break;
    }
  }
  if (attested == nullptr) {
    return {false, "trusted anchors attest no majority status quo"};
  }
  for (const block &b : candidate.blocks) {
    if (b.own_hash == *attested) {
      return {true, "contains the attested status quo"};
    }
  }
  return {false, "head is not traceable from the attested status quo"};
}

inline client_verdict client_sync(const std::vector<anchor_node> &nodes,
                                  const std::vector<int> &trusted_ids,
                                  const chain &candidate) {
  std::vector<const chain *> trusted;
  for (int id : trusted_ids) trusted.push_back(&nodes.at(id).c);
  return client_sync(trusted, candidate);
}

// ---------------------------------------------------------------------------
// Scenario script and configuration
// ---------------------------------------------------------------------------

// One scripted event.  Actions: submit (user, payload, optional expiry),
// delete (user, target), corrupt (node, mode: summary|votes|proposal),
// partition (node, until), idle (no-op marker).
struct script_event {
  std::uint64_t at = 0;
  std::string action;
  std::string user;
  std::string payload;
  std::optional<expiry> expires;
  std::vector<entry_ref> depends;
  entry_ref target{0, 0};
  int node = 0;
  std::string mode = "summary";
  std::uint64_t until = 0;
};

struct sim_config {
  int n_nodes = 4;
  std::uint64_t seed = 1;
  std::uint64_t until = 30;
  std::uint64_t latency_min = 0;
  std::uint64_t latency_max = 0;
  std::vector<std::string> users;
  chain_config config;
  std::vector<script_event> script;
};

inline void validate_sim_config(const sim_config &cfg) {
  if (cfg.n_nodes < 1 || cfg.n_nodes > 64) {
    throw error(errc::script_error, "nodes must be between 1 and 64");
  }
  if (cfg.until < 1 || cfg.until > 1000000) {
    throw error(errc::script_error, "until must be between 1 and 1000000");
  }
  if (cfg.latency_min > cfg.latency_max) {
    throw error(errc::script_error, "latency min exceeds max");
  }
  validate_config(cfg.config);
  for (const script_event &ev : cfg.script) {
    if (ev.action != "submit" && ev.action != "delete" &&
        ev.action != "corrupt" && ev.action != "partition" &&
        ev.action != "idle") {
      throw error(errc::script_error, "unknown action: " + ev.action);
    }
    if ((ev.action == "corrupt" || ev.action == "partition") &&
        (ev.node < 0 || ev.node >= cfg.n_nodes)) {
      throw error(errc::script_error, "event names a node outside the quorum");
    }
    if (ev.action == "corrupt" && ev.mode != "summary" &&
        ev.mode != "votes" && ev.mode != "proposal") {
      throw error(errc::script_error, "unknown corrupt mode: " + ev.mode);
    }
  }
}

inline constexpr const char *trace_format_name = "prunechain-trace";
inline constexpr int trace_format_version = 1;

// ---------------------------------------------------------------------------
// The event loop
// ---------------------------------------------------------------------------

class simulation {
 public:
  explicit simulation(sim_config cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
    validate_sim_config(cfg_);
    for (const std::string &user : cfg_.users) {
      register_user(registry_, user, derive_keypair(cfg_.seed, user).pk);
      user_keys_[user] = derive_keypair(cfg_.seed, user);
    }
    register_admin(registry_, derive_keypair(cfg_.seed, "admin").pk);
    for (int i = 0; i < cfg_.n_nodes; ++i) {
      anchor_node n;
      n.node_id = i;
      n.c = make_chain(cfg_.config, 0);
      nodes_.push_back(std::move(n));
    }
    ordered_json header;
    header["format"] = trace_format_name;
    header["version"] = trace_format_version;
    header["nodes"] = cfg_.n_nodes;
    header["seed"] = cfg_.seed;
    header["until"] = cfg_.until;
    trace_.push_back(std::move(header));
  }

  void run() {
    for (now_ = 1; now_ <= cfg_.until; ++now_) step();
    finalize();
  }

  const std::vector<anchor_node> &nodes() const { return nodes_; }
  const key_registry &registry() const { return registry_; }
  const std::vector<ordered_json> &trace() const { return trace_; }

  std::string trace_text() const {
    std::string out;
    for (const ordered_json &line : trace_) {
      out += line.dump();
      out += "\n";
    }
    return out;
  }

  void write_trace(std::ostream &out) const { out << trace_text(); }

 private:
  // -- plumbing ------------------------------------------------------------

  void note(ordered_json j) { trace_.push_back(std::move(j)); }

  static std::string hex5(const digest &d) {
    return to_hex(d).substr(0, 5);
  }

  void enqueue(message m) {
    if (m.sender >= 0 && nodes_[m.sender].partitioned(now_)) {
      note({{"at", now_}, {"event", "drop"},
            {"kind", message_kind_name(m.kind)}, {"from", m.sender},
            {"to", m.recipient}, {"why", "sender partitioned"}});
      return;
    }
    if (nodes_[m.recipient].partitioned(now_)) {
      note({{"at", now_}, {"event", "drop"},
            {"kind", message_kind_name(m.kind)}, {"from", m.sender},
            {"to", m.recipient}, {"why", "recipient partitioned"}});
      return;
    }
    m.arrival = arrival_counter_++;
    queue_.push_back(std::move(m));
  }

  std::uint64_t draw_latency() {
    return cfg_.latency_min +
           rng_.below(cfg_.latency_max - cfg_.latency_min + 1);
  }

  // Sends one message to every node, in node-id order so that the latency
  // draws consume the generator deterministically.  The sender reaches
  // itself after exactly one tick.
  void broadcast(message proto) {
    for (int j = 0; j < cfg_.n_nodes; ++j) {
      message m = proto;
      m.recipient = j;
      m.deliver_at = now_ + 1 + (j == proto.sender ? 0 : draw_latency());
      enqueue(std::move(m));
    }
  }

  // -- script --------------------------------------------------------------

  entry build_scripted_entry(const script_event &ev) const {
    auto key = user_keys_.find(ev.user);
    if (key == user_keys_.end()) {
      throw error(errc::script_error, "unknown scripted user: " + ev.user);
    }
    entry e;
    if (ev.action == "submit") {
      e.kind = entry_kind::data;
      e.user = ev.user;
      e.payload = to_bytes(ev.payload);
      e.expires = ev.expires;
      e.depends_on = ev.depends;
    } else {
      e.kind = entry_kind::delete_request;
      e.user = ev.user;
      e.target = ev.target;
    }
    sign_entry(e, key->second.sk);
    return e;
  }

  void enact(const script_event &ev) {
    ordered_json j{{"at", now_}, {"event", "script"}, {"action", ev.action}};
    if (ev.action == "submit" || ev.action == "delete") {
      j["user"] = ev.user;
      if (ev.action == "submit") j["payload"] = ev.payload;
      if (ev.action == "delete") j["target"] = ref_to_json(ev.target);
      note(std::move(j));
      message m;
      m.kind = message_kind::submit_entry;
      m.sender = -1;
      m.e = build_scripted_entry(ev);
      broadcast(std::move(m));
      return;
    }
    if (ev.action == "corrupt") {
      j["node"] = ev.node;
      j["mode"] = ev.mode;
      anchor_node &n = nodes_[ev.node];
      if (ev.mode == "summary") n.corrupt_summaries = true;
      if (ev.mode == "votes") n.contrarian_votes = true;
      if (ev.mode == "proposal") n.unfiltered_once = true;
    } else if (ev.action == "partition") {
      j["node"] = ev.node;
      j["until"] = ev.until;
      nodes_[ev.node].partitioned_until = ev.until;
    }
    note(std::move(j));
  }

  // -- ballots (memoized so every node consults the same vote) --------------

  ballot &shift_ballot(std::uint64_t height, std::uint64_t new_marker) {
    auto key = std::make_pair(height, new_marker);
    auto it = shift_ballots_.find(key);
    if (it == shift_ballots_.end()) {
      ballot b = hold_ballot(nodes_, ballot_subject::marker_shift, new_marker,
                             std::nullopt, registry_);
      it = shift_ballots_.emplace(key, std::move(b)).first;
      trace_ballot(it->second, height);
    }
    return it->second;
  }

  ballot &deletion_ballot(entry_ref request_ref, const entry &request) {
    auto it = deletion_ballots_.find(request_ref);
    if (it == deletion_ballots_.end()) {
      ballot b = hold_ballot(nodes_, ballot_subject::approve_deletion, 0,
                             request, registry_);
      it = deletion_ballots_.emplace(request_ref, std::move(b)).first;
      trace_ballot(it->second, request_ref.block_number);
    }
    return it->second;
  }

  void trace_ballot(const ballot &b, std::uint64_t height) {
    ordered_json votes;
    for (const auto &[id, vote] : b.votes) {
      votes[std::to_string(id)] = vote;
    }
    note({{"at", now_}, {"event", "ballot"},
          {"subject", b.subject == ballot_subject::marker_shift
                          ? "marker_shift"
                          : "approve_deletion"},
          {"height", height}, {"votes", votes}, {"approved", b.approved}});
  }

  // -- summaries -----------------------------------------------------------

  void corrupt_plan(summary_plan &plan) {
    if (!plan.summary.summaries.empty()) {
      bytes &payload = plan.summary.summaries[0].inner.payload;
      if (payload.empty()) {
        payload.push_back(0x00);
      } else {
        payload[0] ^= 0x01;
      }
    } else {
      summary_entry bogus;
      bogus.origin_block = 0;
      bogus.origin_timestamp = 0;
      bogus.origin_entry = 0;
      bogus.inner.kind = entry_kind::data;
      bogus.inner.user = "??";
      bogus.inner.payload = to_bytes("CORRUPT");
      plan.summary.summaries.push_back(std::move(bogus));
    }
    seal_block(plan.summary);
  }

  // Every node builds its own summary the moment its chain needs one; the
  // only coordination is the (memoized) marker-shift ballot for plans that
  // prune, and the hash announcement afterwards.
  void build_local_summaries(anchor_node &n) {
    while (needs_summary(n.c)) {
      summary_plan plan = plan_summary(n.c);
      ballot vote = local_ballot(ballot_subject::marker_shift);
      if (plan.prunes()) {
        vote = shift_ballot(plan.summary.number, plan.new_marker);
        if (!vote.approved) plan = plan_summary(n.c, false);
      }
      if (n.corrupt_summaries) corrupt_plan(plan);
      n.c = apply_summary_plan(n.c, plan, vote);
      const block &b = head(n.c);
      note({{"at", now_}, {"event", "summary"}, {"node", n.node_id},
            {"block", b.number}, {"hash", to_hex(b.own_hash)},
            {"pruned", plan.prunes()}, {"marker", n.c.marker}});
      if (plan.prunes()) {
        note({{"at", now_}, {"event", "prune"}, {"node", n.node_id},
              {"report", report_to_json(plan.report)}});
      }
      message m;
      m.kind = message_kind::summary_hash_announce;
      m.sender = n.node_id;
      m.height = b.number;
      m.hash = b.own_hash;
      broadcast(std::move(m));
    }
  }

  // -- block handling ------------------------------------------------------

  bool proposal_acceptable(const anchor_node &n, const block &b) const {
    if (b.kind != block_kind::normal && b.kind != block_kind::empty) {
      return false;
    }
    if (b.number != head(n.c).number + 1) return false;
    if (b.previous_hash != head(n.c).own_hash) return false;
    if (is_summary_position(b.number, n.c.config.delta_l)) return false;
    if (b.timestamp < head(n.c).timestamp) return false;
    for (const entry &e : b.entries) {
      if (!detail::entry_admissible(n.c, e, registry_)) return false;
    }
    return hash_block(b) == b.own_hash;
  }

  void scrub_mempool(anchor_node &n, const block &b) {
    for (const entry &e : b.entries) {
      std::erase_if(n.mempool,
                    [&e](const entry &m) { return m.sig == e.sig; });
    }
  }

  void accept_block(anchor_node &n, const block &b) {
    n.c.blocks.push_back(b);
    n.syncing = false;  // an appendable proposal proves the node caught up
    scrub_mempool(n, b);
    note({{"at", now_}, {"event", "append"}, {"node", n.node_id},
          {"block", b.number},
          {"kind", b.kind == block_kind::empty ? "empty" : "normal"},
          {"hash", to_hex(b.own_hash)}});
    for (std::size_t i = 0; i < b.entries.size(); ++i) {
      const entry &e = b.entries[i];
      if (e.kind != entry_kind::delete_request) continue;
      const entry_ref request_ref{b.number, i};
      const ballot &vote = deletion_ballot(request_ref, e);
      auto [next, decision] =
          process_delete_request(n.c, request_ref, registry_);
      const bool effective = vote.approved && decision.approved;
      if (effective) {
        n.c.pending_deletions = std::move(next.pending_deletions);
      }
      ordered_json dj = decision_to_json(decision);
      dj["approved"] = effective;
      if (!vote.approved && decision.approved) dj["reason"] = "vote-rejected";
      note({{"at", now_}, {"event", "decision"}, {"node", n.node_id},
            {"decision", std::move(dj)}});
    }
    build_local_summaries(n);
  }

  // Apply held-back proposals that have become appendable and discard the
  // ones the chain has since moved past.
  void drain_stash(anchor_node &n) {
    for (;;) {
      n.stash.erase(n.stash.begin(),
                    n.stash.lower_bound(head(n.c).number + 1));
      auto it = n.stash.find(head(n.c).number + 1);
      if (it == n.stash.end()) return;
      block b = it->second;
      n.stash.erase(it);
      if (!proposal_acceptable(n, b)) return;
      accept_block(n, b);
    }
  }

  // -- message handlers ----------------------------------------------------

  void deliver(const message &m) {
    anchor_node &n = nodes_[m.recipient];
    note({{"at", now_}, {"event", "deliver"},
          {"kind", message_kind_name(m.kind)}, {"from", m.sender},
          {"to", m.recipient}});
    switch (m.kind) {
      case message_kind::submit_entry:
        n.mempool.push_back(m.e);
        break;
      case message_kind::propose_block:
        if (m.b.number <= head(n.c).number) break;  // stale duplicate
        if (m.b.number > head(n.c).number + 1) {
          // arrived ahead of its predecessor (latency jitter); hold it back
          note({{"at", now_}, {"event", "lag"}, {"node", n.node_id},
                {"block", m.b.number}});
          n.stash.emplace(m.b.number, m.b);
          break;
        }
        if (proposal_acceptable(n, m.b)) {
          accept_block(n, m.b);
          drain_stash(n);
        } else {
          note({{"at", now_}, {"event", "refuse"}, {"node", n.node_id},
                {"block", m.b.number}, {"proposer", m.sender}});
          if (n.node_id == m.sender) {
            // own proposal bounced: clear the slot and drop the entries the
            // quorum will never accept, then re-propose filtered
            n.proposed_height = head(n.c).number;
            std::erase_if(n.mempool, [&n, this](const entry &e) {
              return !detail::entry_admissible(n.c, e, registry_);
            });
          }
        }
        break;
      case message_kind::summary_hash_announce:
        announces_[m.height][m.sender] = m.hash;
        break;
      case message_kind::sync_request:
        if (head(n.c).number > m.height) {
          message resp;
          resp.kind = message_kind::sync_response;
          resp.sender = n.node_id;
          resp.recipient = m.sender;
          resp.snapshot = n.c;
          resp.deliver_at = now_ + 1 + draw_latency();
          enqueue(std::move(resp));
        }
        break;
      case message_kind::sync_response: {
        n.syncing = false;
        if (!m.snapshot) break;
        const chain &candidate = *m.snapshot;
        if (head(candidate).number <= head(n.c).number) break;
        const bool traceable =
            std::any_of(candidate.blocks.begin(), candidate.blocks.end(),
                        [&n](const block &b) {
                          return b.own_hash == head(n.c).own_hash;
                        }) ||
            candidate.marker > head(n.c).number;
        if (!traceable) break;
        if (!verify_chain(candidate, &registry_).valid) break;
        n.c = candidate;
        replay_delete_requests(n.c, registry_);
        n.proposed_height = head(n.c).number;
        note({{"at", now_}, {"event", "adopt"}, {"node", n.node_id},
              {"head", head(n.c).number}, {"from", m.sender},
              {"marker", n.c.marker}});
        build_local_summaries(n);
        drain_stash(n);
        break;
      }
      case message_kind::ballot_request:
      case message_kind::ballot_vote:
        break;  // ballots are resolved synchronously; kinds kept for traces
    }
  }

  // -- production ----------------------------------------------------------

  void produce(anchor_node &n) {
    const std::uint64_t height = head(n.c).number + 1;
    if (proposer_for(height, cfg_.n_nodes) != n.node_id) return;
    if (height <= n.proposed_height) return;  // proposal still in flight
    if (needs_summary(n.c)) return;           // summaries are built locally

    std::optional<block> b;
    if (!n.mempool.empty()) {
      if (n.unfiltered_once) {
        n.unfiltered_once = false;
        block raw;
        raw.kind = block_kind::normal;
        raw.number = height;
        raw.timestamp = now_;
        raw.previous_hash = head(n.c).own_hash;
        raw.nonce = default_nonce();
        raw.entries = n.mempool;
        seal_block(raw);
        b = std::move(raw);
      } else {
        block filtered = produce_block(n, cfg_.n_nodes, n.mempool,
                                       registry_, now_);
        if (filtered.entries.empty()) {
          // nothing admissible: clear the junk and fall back to idling
          n.mempool.clear();
        } else {
          b = std::move(filtered);
        }
      }
    }
    if (!b) {
      b = heartbeat(n, now_);
    }
    if (!b) return;

    n.proposed_height = height;
    note({{"at", now_}, {"event", "propose"}, {"node", n.node_id},
          {"block", b->number},
          {"kind", b->kind == block_kind::empty ? "empty" : "normal"},
          {"entries", b->entries.size()}});
    message m;
    m.kind = message_kind::propose_block;
    m.sender = n.node_id;
    m.b = std::move(*b);
    broadcast(std::move(m));
  }

  // -- sync checking -------------------------------------------------------

  void try_sync_check() {
    std::optional<std::uint64_t> h = latest_summary_height(nodes_[0].c);
    if (!h || *h <= last_sync_height_) return;
    for (const anchor_node &n : nodes_) {
      if (latest_summary_height(n.c) != h) return;  // someone lags; retry
    }
    sync_result result = sync_check(nodes_);
    last_sync_height_ = result.height;
    ordered_json parts = ordered_json::array();
    for (const auto &group : result.partitions) parts.push_back(group);
    note({{"at", now_}, {"event", "sync_check"}, {"height", result.height},
          {"in_sync", result.in_sync}, {"partitions", std::move(parts)}});
  }

  // -- the tick ------------------------------------------------------------

  void step() {
    for (const script_event &ev : cfg_.script) {
      if (ev.at == now_) enact(ev);
    }
    // healed nodes ask the quorum where the head moved
    for (anchor_node &n : nodes_) {
      if (n.partitioned_until == now_ && !n.syncing) {
        n.syncing = true;
        message m;
        m.kind = message_kind::sync_request;
        m.sender = n.node_id;
        m.height = head(n.c).number;
        broadcast(std::move(m));
      }
    }
    // deliver everything due now, in (deliver_at, sender, arrival) order
    std::vector<message> due;
    std::erase_if(queue_, [&](const message &m) {
      if (m.deliver_at != now_) return false;
      due.push_back(m);
      return true;
    });
    std::stable_sort(due.begin(), due.end(),
                     [](const message &a, const message &b) {
                       if (a.sender != b.sender) return a.sender < b.sender;
                       return a.arrival < b.arrival;
                     });
    for (const message &m : due) {
      if (nodes_[m.recipient].partitioned(now_)) {
        note({{"at", now_}, {"event", "drop"},
              {"kind", message_kind_name(m.kind)}, {"from", m.sender},
              {"to", m.recipient}, {"why", "recipient partitioned"}});
        continue;
      }
      deliver(m);
    }
    for (anchor_node &n : nodes_) {
      if (!n.partitioned(now_)) build_local_summaries(n);
    }
    for (anchor_node &n : nodes_) {
      if (!n.partitioned(now_) && !n.syncing) produce(n);
    }
    try_sync_check();
  }

  void finalize() {
    ordered_json heads = ordered_json::array();
    ordered_json markers = ordered_json::array();
    ordered_json digests = ordered_json::array();
    for (const anchor_node &n : nodes_) {
      heads.push_back(head(n.c).number);
      markers.push_back(n.c.marker);
      digests.push_back(to_hex(chain_digest(n.c)));
    }
    note({{"event", "final"}, {"at", now_ - 1}, {"heads", std::move(heads)},
          {"markers", std::move(markers)}, {"digests", std::move(digests)}});
  }

  sim_config cfg_;
  splitmix64 rng_;
  key_registry registry_;
  std::map<std::string, keypair> user_keys_;
  std::vector<anchor_node> nodes_;
  std::vector<message> queue_;
  std::vector<ordered_json> trace_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, ballot> shift_ballots_;
  std::map<entry_ref, ballot> deletion_ballots_;
  std::map<std::uint64_t, std::map<int, digest>> announces_;
  std::uint64_t now_ = 0;
  std::uint64_t arrival_counter_ = 0;
  std::uint64_t last_sync_height_ = 0;
};

inline simulation run_simulation(sim_config cfg) {
  simulation sim(std::move(cfg));
  sim.run();
  return sim;
}

}  // namespace prunechain
