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

#include "prunechain/scenario.hpp"
#include "support/helpers.hpp"

using namespace prunechain;
using namespace pc_test;

namespace {

chain_config sim_tiny_config() {
  chain_config cfg;
  cfg.delta_l = 3;
  cfg.l_max = 8;
  cfg.l_min = 3;
  cfg.heartbeat_interval = 1;
  return cfg;
}

sim_config base_config(int nodes, std::uint64_t until) {
  sim_config cfg;
  cfg.n_nodes = nodes;
  cfg.seed = 7;
  cfg.until = until;
  cfg.users = {"alice", "bob", "carol"};
  cfg.config = sim_tiny_config();
  return cfg;
}

script_event submit(std::uint64_t at, const std::string &user,
                    const std::string &payload) {
  script_event ev;
  ev.at = at;
  ev.action = "submit";
  ev.user = user;
  ev.payload = payload;
  return ev;
}

script_event delete_of(std::uint64_t at, const std::string &user,
                       entry_ref target) {
  script_event ev;
  ev.at = at;
  ev.action = "delete";
  ev.user = user;
  ev.target = target;
  return ev;
}

script_event corrupt(std::uint64_t at, int node, const std::string &mode) {
  script_event ev;
  ev.at = at;
  ev.action = "corrupt";
  ev.node = node;
  ev.mode = mode;
  return ev;
}

bool all_agree(const simulation &sim) {
  const digest first = chain_digest(sim.nodes()[0].c);
  for (const anchor_node &n : sim.nodes()) {
    if (chain_digest(n.c) != first) return false;
  }
  return true;
}

// Under latency jitter nodes legitimately sit at different frontiers when the
// clock stops; agreement then means the live ranges they share are identical.
bool overlap_agree(const simulation &sim) {
  for (std::size_t i = 0; i < sim.nodes().size(); ++i) {
    for (std::size_t j = i + 1; j < sim.nodes().size(); ++j) {
      const chain &a = sim.nodes()[i].c;
      const chain &b = sim.nodes()[j].c;
      const std::uint64_t lo = std::max(a.marker, b.marker);
      const std::uint64_t hi = std::min(head(a).number, head(b).number);
      for (std::uint64_t num = lo; num <= hi; ++num) {
        const block *x = block_by_number(a, num);
        const block *y = block_by_number(b, num);
        if (x == nullptr || y == nullptr) return false;
        if (x->own_hash != y->own_hash) return false;
      }
    }
  }
  return true;
}

std::size_t count_events(const simulation &sim, const std::string &name) {
  std::size_t count = 0;
  for (const ordered_json &line : sim.trace()) {
    if (line.value("event", "") == name) ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("the trace is a pure function of the configuration") {
  sim_config cfg = base_config(4, 20);
  cfg.latency_max = 2;
  cfg.script = {submit(1, "alice", "ALPHA"), submit(3, "bob", "BRAVO"),
                delete_of(6, "alice", {3, 0})};

  simulation first = run_simulation(cfg);
  simulation second = run_simulation(cfg);
  CHECK(first.trace_text() == second.trace_text());

  sim_config other = cfg;
  other.seed = 8;
  simulation third = run_simulation(other);
  CHECK(first.trace_text() != third.trace_text());
}

TEST_CASE("four honest nodes replay the reference scenario in lockstep") {
  sim_config cfg = base_config(4, 40);
  cfg.script = {submit(1, "alice", "ALPHA"), submit(3, "bob", "BRAVO"),
                submit(5, "carol", "CHARLIE"), delete_of(7, "alice", {3, 0})};

  simulation sim = run_simulation(cfg);

  CHECK(all_agree(sim));
  const chain &c = sim.nodes()[0].c;
  key_registry reg = sim.registry();
  CHECK(verify_chain(c, &reg).valid);
  CHECK(c.marker >= 6);
  CHECK(c.marker % 3 == 0);

  // the deletion physically removed ALPHA and nothing else got lost
  CHECK_FALSE(lookup_entry(c, {3, 0}).has_value());
  bool bravo = false;
  bool charlie = false;
  bool requests = false;
  for (const block &b : c.blocks) {
    for (const entry &e : b.entries) {
      if (e.kind == entry_kind::delete_request) requests = true;
      if (to_string(e.payload) == "BRAVO") bravo = true;
      if (to_string(e.payload) == "CHARLIE") charlie = true;
    }
    for (const summary_entry &se : b.summaries) {
      if (to_string(se.inner.payload) == "BRAVO") bravo = true;
      if (to_string(se.inner.payload) == "CHARLIE") charlie = true;
    }
  }
  CHECK(bravo);
  CHECK(charlie);
  CHECK_FALSE(requests);  // the request itself has drained as well
  CHECK(count_events(sim, "prune") > 0);
  // every node observed the same marker
  for (const anchor_node &n : sim.nodes()) {
    CHECK(n.c.marker == c.marker);
  }
}

TEST_CASE("an unscripted run is heartbeats and summaries only") {
  sim_config cfg = base_config(4, 20);
  simulation sim = run_simulation(cfg);

  CHECK(all_agree(sim));
  CHECK(count_events(sim, "script") == 0);
  const chain &c = sim.nodes()[0].c;
  CHECK(head(c).number > 5);
  for (const block &b : c.blocks) {
    CHECK(b.entries.empty());
    CHECK((b.kind == block_kind::empty || b.kind == block_kind::summary ||
           b.number == 0));
  }
}

TEST_CASE("messages stay in flight for the configured latency") {
  sim_config cfg = base_config(4, 30);
  cfg.latency_min = 1;
  cfg.latency_max = 3;
  cfg.script = {submit(1, "alice", "ALPHA")};
  simulation sim = run_simulation(cfg);
  CHECK(overlap_agree(sim));
  key_registry reg = sim.registry();
  for (const anchor_node &n : sim.nodes()) {
    CHECK(verify_chain(n.c, &reg).valid);
  }
  bool alpha = false;
  for (const block &b : sim.nodes()[0].c.blocks) {
    for (const entry &e : b.entries) {
      if (to_string(e.payload) == "ALPHA") alpha = true;
    }
    for (const summary_entry &se : b.summaries) {
      if (to_string(se.inner.payload) == "ALPHA") alpha = true;
    }
  }
  CHECK(alpha);
}

TEST_CASE("a corrupted summary forks the quorum at the next summary height") {
  // stop right at the fork: from here on the outvoted node refuses honest
  // blocks, so later heights are no longer comparable
  sim_config cfg = base_config(4, 2);
  cfg.script = {corrupt(1, 2, "summary")};
  simulation sim = run_simulation(cfg);

  sync_result result = sync_check(sim.nodes());
  CHECK_FALSE(result.in_sync);
  REQUIRE(result.partitions.size() == 2);
  CHECK(result.partitions[0] == std::vector<int>{0, 1, 3});
  CHECK(result.partitions[1] == std::vector<int>{2});

  bool forked_in_trace = false;
  for (const ordered_json &line : sim.trace()) {
    if (line.value("event", "") == "sync_check" &&
        line.value("in_sync", true) == false) {
      forked_in_trace = true;
    }
  }
  CHECK(forked_in_trace);
}

TEST_CASE("two equal corruptions split the quorum two against two") {
  sim_config cfg = base_config(4, 2);
  cfg.script = {corrupt(1, 2, "summary"), corrupt(1, 3, "summary")};
  simulation sim = run_simulation(cfg);

  sync_result result = sync_check(sim.nodes());
  CHECK_FALSE(result.in_sync);
  REQUIRE(result.partitions.size() == 2);
  CHECK(result.partitions[0] == std::vector<int>{0, 1});
  CHECK(result.partitions[1] == std::vector<int>{2, 3});
}

TEST_CASE("sync checks refuse to compare lagging nodes") {
  std::vector<anchor_node> nodes(2);
  nodes[0].node_id = 0;
  nodes[0].c = make_chain(sim_tiny_config(), 0);
  nodes[1].node_id = 1;
  nodes[1].c = make_chain(sim_tiny_config(), 0);
  nodes[0].c.blocks.push_back(make_empty_block(nodes[0].c, 1));
  nodes[0].c.blocks.push_back(make_summary_block_raw(nodes[0].c, {}));
  try {
    sync_check(nodes);
    FAIL("expected height-mismatch");
  } catch (const error &e) {
    CHECK(e.code() == errc::validation);
    CHECK(std::string(e.what()).find("height-mismatch") != std::string::npos);
  }
}

TEST_CASE("ballots require a strict majority") {
  SECTION("a two against two tie rejects the deletion") {
    sim_config cfg = base_config(4, 20);
    cfg.script = {corrupt(1, 2, "votes"), corrupt(1, 3, "votes"),
                  submit(1, "alice", "ALPHA"), delete_of(5, "alice", {3, 0})};
    simulation sim = run_simulation(cfg);
    CHECK(all_agree(sim));
    // the vote failed, so the entry is still there and nothing is marked
    CHECK(lookup_entry(sim.nodes()[0].c, {3, 0}).has_value());
    for (const anchor_node &n : sim.nodes()) {
      CHECK(n.c.pending_deletions.empty());
    }
    bool tie_seen = false;
    for (const ordered_json &line : sim.trace()) {
      if (line.value("event", "") == "ballot" &&
          line.value("subject", "") == "approve_deletion") {
        CHECK(line["approved"] == false);
        tie_seen = true;
      }
    }
    CHECK(tie_seen);
  }

  SECTION("three honest votes outvote one contrarian") {
    sim_config cfg = base_config(4, 30);
    cfg.script = {corrupt(1, 3, "votes"), submit(1, "alice", "ALPHA"),
                  delete_of(5, "alice", {3, 0})};
    simulation sim = run_simulation(cfg);
    CHECK(all_agree(sim));
    CHECK_FALSE(lookup_entry(sim.nodes()[0].c, {3, 0}).has_value());
  }

  SECTION("contrarians can also freeze the marker") {
    sim_config cfg = base_config(4, 30);
    cfg.script = {corrupt(1, 1, "votes"), corrupt(1, 2, "votes")};
    simulation sim = run_simulation(cfg);
    CHECK(all_agree(sim));
    // every shrink vote tied, so the chain only ever grew
    CHECK(sim.nodes()[0].c.marker == 0);
    CHECK(chain_length(sim.nodes()[0].c) > sim_tiny_config().l_max);
  }
}

TEST_CASE("only the round-robin proposer may produce") {
  anchor_node node;
  node.node_id = 2;
  node.c = make_chain(sim_tiny_config(), 0);
  key_registry reg = make_registry();

  try {
    produce_block(node, 4, {}, reg, 1);
    FAIL("expected refusal");
  } catch (const error &e) {
    CHECK(e.code() == errc::not_proposer);
  }

  anchor_node proposer;
  proposer.node_id = 1;
  proposer.c = make_chain(sim_tiny_config(), 0);
  entry good = make_data_entry("alice", "GOOD");
  entry ghost = make_data_entry("bob", "GHOST", std::nullopt, {{99, 0}});
  block b = produce_block(proposer, 4, {good, ghost}, reg, 1);
  REQUIRE(b.entries.size() == 1);  // the filter kept only the admissible one
  CHECK(to_string(b.entries[0].payload) == "GOOD");
  CHECK(b.number == 1);
  CHECK(b.timestamp == 1);
}

TEST_CASE("a heartbeat fires only after the configured quiet spell") {
  anchor_node node;
  node.node_id = 0;
  node.c = make_chain(sim_tiny_config(), 0);
  node.c.config.heartbeat_interval = 3;

  CHECK_FALSE(heartbeat(node, 2).has_value());
  std::optional<block> beat = heartbeat(node, 3);
  REQUIRE(beat.has_value());
  CHECK(beat->kind == block_kind::empty);

  node.mempool.push_back(make_data_entry("alice", "X"));
  CHECK_FALSE(heartbeat(node, 9).has_value());
}

TEST_CASE("a rejected proposal is refused everywhere and re-proposed clean") {
  sim_config cfg = base_config(4, 12);
  script_event ghost = submit(1, "bob", "GHOST");
  ghost.depends.push_back({99, 0});  // nothing to depend on: inadmissible
  // node 3 is the proposer at height 3, the slot where the mempool is first
  // consumed, so it is the one that must push the raw unfiltered block
  cfg.script = {corrupt(1, 3, "proposal"), submit(1, "alice", "GOOD"), ghost};
  simulation sim = run_simulation(cfg);

  CHECK(count_events(sim, "refuse") >= 4);  // every node bounced the raw block
  CHECK(all_agree(sim));
  bool good = false;
  bool ghost_found = false;
  for (const block &b : sim.nodes()[0].c.blocks) {
    for (const entry &e : b.entries) {
      if (to_string(e.payload) == "GOOD") good = true;
      if (to_string(e.payload) == "GHOST") ghost_found = true;
    }
    for (const summary_entry &se : b.summaries) {
      if (to_string(se.inner.payload) == "GOOD") good = true;
      if (to_string(se.inner.payload) == "GHOST") ghost_found = true;
    }
  }
  CHECK(good);
  CHECK_FALSE(ghost_found);
}

TEST_CASE("a partitioned node catches up through a sync request") {
  sim_config cfg = base_config(4, 24);
  script_event cut;
  cut.at = 2;
  cut.action = "partition";
  cut.node = 3;
  cut.until = 8;
  cfg.script = {submit(1, "alice", "ALPHA"), cut, submit(3, "bob", "BRAVO")};
  simulation sim = run_simulation(cfg);

  CHECK(count_events(sim, "drop") > 0);
  CHECK(count_events(sim, "adopt") >= 1);
  CHECK(all_agree(sim));
  bool alpha = false;
  bool bravo = false;
  for (const block &b : sim.nodes()[3].c.blocks) {
    for (const entry &e : b.entries) {
      if (to_string(e.payload) == "ALPHA") alpha = true;
      if (to_string(e.payload) == "BRAVO") bravo = true;
    }
    for (const summary_entry &se : b.summaries) {
      if (to_string(se.inner.payload) == "ALPHA") alpha = true;
      if (to_string(se.inner.payload) == "BRAVO") bravo = true;
    }
  }
  CHECK(alpha);
  CHECK(bravo);
}

TEST_CASE("clients follow the attested status quo, not the longest chain") {
  sim_config cfg = base_config(4, 16);
  cfg.script = {submit(1, "alice", "ALPHA")};
  simulation sim = run_simulation(cfg);
  REQUIRE(all_agree(sim));

  const chain &honest = sim.nodes()[0].c;

  SECTION("an honest node is accepted") {
    client_verdict v = client_sync(sim.nodes(), {0, 1, 2}, honest);
    CHECK(v.accepted);
  }

  SECTION("a longer but divergent chain is rejected") {
    chain divergent = make_chain(sim_tiny_config(), 0);
    while (head(divergent).number < head(honest).number + 5) {
      if (needs_summary(divergent)) {
        divergent.blocks.push_back(make_summary_block_raw(divergent, {}));
      } else {
        divergent.blocks.push_back(
            make_empty_block(divergent, head(divergent).timestamp + 1));
      }
    }
    REQUIRE(head(divergent).number > head(honest).number);
    client_verdict v = client_sync(sim.nodes(), {0, 1, 2}, divergent);
    CHECK_FALSE(v.accepted);
  }

  SECTION("a majority-attested shorter chain beats an unattested longer one") {
    chain shorter = honest;  // exactly the attested status quo
    client_verdict v = client_sync(sim.nodes(), {0, 1, 2}, shorter);
    CHECK(v.accepted);
  }

  SECTION("no majority means no acceptance") {
    chain a = honest;
    chain b = honest;
    b.blocks.push_back(make_empty_block(b, head(b).timestamp + 1));
    chain c = honest;
    c.blocks.push_back(make_empty_block(c, head(c).timestamp + 2));
    client_verdict v = client_sync({&a, &b, &c}, honest);
    CHECK_FALSE(v.accepted);
  }

  SECTION("an extension of the status quo is accepted") {
    chain extended = honest;
    extended.blocks.push_back(
        make_empty_block(extended, head(extended).timestamp + 1));
    client_verdict v = client_sync(sim.nodes(), {0, 1, 2}, extended);
    CHECK(v.accepted);
  }
}

TEST_CASE("a marked entry drains from an idle quorum within the window bound") {
  sim_config cfg = base_config(4, 60);
  cfg.script = {submit(1, "alice", "ALPHA"), delete_of(5, "alice", {3, 0})};
  simulation sim = run_simulation(cfg);
  REQUIRE(all_agree(sim));
  CHECK_FALSE(lookup_entry(sim.nodes()[0].c, {3, 0}).has_value());

  // measure mark-to-drop latency from the trace
  std::uint64_t marked_at = 0;
  std::uint64_t dropped_at = 0;
  for (const ordered_json &line : sim.trace()) {
    if (marked_at == 0 && line.value("event", "") == "decision" &&
        line["decision"].value("approved", false)) {
      marked_at = line["at"].get<std::uint64_t>();
    }
    if (dropped_at == 0 && line.value("event", "") == "prune") {
      for (const auto &d : line["report"]["dropped_entries"]) {
        if (d["ref"] == ordered_json::array({3, 0})) {
          dropped_at = line["at"].get<std::uint64_t>();
        }
      }
    }
  }
  REQUIRE(marked_at > 0);
  REQUIRE(dropped_at >= marked_at);
  const chain_config &cc = cfg.config;
  // one block per tick when idle, so the worst case is one full overshoot
  // window: the chain grows to l_max + delta_l before the shrink fires
  CHECK(dropped_at - marked_at <=
        (cc.l_max + cc.delta_l) * cc.heartbeat_interval + 2);
}

TEST_CASE("scenarios load from YAML") {
  SECTION("the full header is honored") {
    sim_config cfg = parse_scenario(R"(
nodes: 5
seed: 99
until: 25
latency: {min: 1, max: 2}
users: [alice, bob]
config:
  delta_l: 3
  l_max: 8
  l_min: 3
events:
  - {at: 1, action: submit, user: alice, payload: ALPHA}
  - {at: 2, action: submit, user: bob, payload: TEMP, expires: {kind: time, bound: 8888}}
  - {at: 3, action: delete, user: alice, target: [3, 0]}
  - {at: 4, action: corrupt, node: 2, mode: votes}
  - {at: 5, action: partition, node: 1, until: 9}
  - {at: 6, action: idle}
)");
    CHECK(cfg.n_nodes == 5);
    CHECK(cfg.seed == 99);
    CHECK(cfg.until == 25);
    CHECK(cfg.latency_min == 1);
    CHECK(cfg.latency_max == 2);
    CHECK(cfg.users == std::vector<std::string>{"alice", "bob"});
    CHECK(cfg.config.delta_l == 3);
    REQUIRE(cfg.script.size() == 6);
    CHECK(cfg.script[0].payload == "ALPHA");
    REQUIRE(cfg.script[1].expires.has_value());
    CHECK(cfg.script[1].expires->kind == expiry_kind::by_time);
    CHECK(cfg.script[1].expires->bound == 8888);
    CHECK(cfg.script[2].target == entry_ref{3, 0});
    CHECK(cfg.script[3].mode == "votes");
    CHECK(cfg.script[4].until == 9);
    CHECK(cfg.script[5].action == "idle");
  }

  SECTION("defaults fill in for a minimal scenario") {
    sim_config cfg = parse_scenario("users: [alice]");
    CHECK(cfg.n_nodes == 4);
    CHECK(cfg.seed == 1);
    CHECK(cfg.script.empty());
  }

  SECTION("bad scenarios are refused") {
    auto expect_script_error = [](const std::string &text) {
      try {
        parse_scenario(text);
        FAIL("expected rejection");
      } catch (const error &e) {
        CHECK(e.code() == errc::script_error);
      }
    };
    expect_script_error("events:\n  - {at: 1, action: explode}");
    expect_script_error("events:\n  - {action: submit, user: a}");
    expect_script_error("nodes: 2\nevents:\n  - {at: 1, action: corrupt, node: 7}");
    expect_script_error(
        "events:\n  - {at: 5, action: partition, node: 0, until: 4}");
    expect_script_error("events:\n  - {at: 1, action: submit}");
    expect_script_error("nodes: 0");
    expect_script_error("[not, a, map]");
    expect_script_error("{unclosed");
  }

  SECTION("a scripted unknown user fails at runtime") {
    sim_config cfg = parse_scenario(R"(
users: [alice]
until: 5
events:
  - {at: 1, action: submit, user: mallory, payload: X}
)");
    CHECK_THROWS_AS(run_simulation(cfg), error);
  }
}

TEST_CASE("simulated chains always verify") {
  sim_config cfg = base_config(5, 35);
  cfg.latency_max = 1;
  cfg.script = {submit(1, "alice", "ALPHA"), submit(4, "bob", "BRAVO"),
                delete_of(8, "bob", {0, 0})};  // genesis target: denied
  simulation sim = run_simulation(cfg);
  key_registry reg = sim.registry();
  for (const anchor_node &n : sim.nodes()) {
    CHECK(verify_chain(n.c, &reg).valid);
  }
  CHECK(overlap_agree(sim));
}
