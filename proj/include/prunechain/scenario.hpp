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

#include <yaml-cpp/yaml.h>

#include <string>

#include "prunechain/quorum.hpp"
#include "prunechain/schema.hpp"

namespace prunechain {

// Scenario files drive the simulator.  The header names the quorum and the
// chain parameters; the events list scripts what happens when:
//
//   nodes: 4
//   seed: 7
//   until: 30
//   latency: {min: 0, max: 2}
//   users: [alice, bob, carol]
//   config:
//     delta_l: 3
//     l_max: 8
//     l_min: 3
//   events:
//     - {at: 1, action: submit, user: alice, payload: ALPHA}
//     - {at: 4, action: delete, user: bob, target: [3, 0]}
//     - {at: 9, action: corrupt, node: 2, mode: summary}
//     - {at: 5, action: partition, node: 1, until: 12}
//     - {at: 8, action: idle}

namespace detail {

inline entry_ref ref_from_yaml(const YAML::Node &node) {
  if (!node.IsSequence() || node.size() != 2) {
    throw error(errc::script_error, "target must be a [block, entry] pair");
  }
  return {node[0].as<std::uint64_t>(), node[1].as<std::uint64_t>()};
}

inline expiry expiry_from_yaml(const YAML::Node &node) {
  expiry x;
  const std::string kind = node["kind"].as<std::string>("");
  if (kind == "time") {
    x.kind = expiry_kind::by_time;
  } else if (kind == "block") {
    x.kind = expiry_kind::by_block;
  } else {
    throw error(errc::script_error, "expiry kind must be time or block");
  }
  x.bound = node["bound"].as<std::uint64_t>();
  return x;
}

inline script_event event_from_yaml(const YAML::Node &node) {
  if (!node.IsMap()) {
    throw error(errc::script_error, "each event must be a map");
  }
  script_event ev;
  if (!node["at"] || !node["action"]) {
    throw error(errc::script_error, "each event needs at and action");
  }
  ev.at = node["at"].as<std::uint64_t>();
  ev.action = node["action"].as<std::string>();
  if (node["user"]) ev.user = node["user"].as<std::string>();
  if (node["payload"]) ev.payload = node["payload"].as<std::string>();
  if (node["expires"]) ev.expires = expiry_from_yaml(node["expires"]);
  if (node["depends"]) {
    for (const auto &dep : node["depends"]) {
      ev.depends.push_back(ref_from_yaml(dep));
    }
  }
  if (node["target"]) ev.target = ref_from_yaml(node["target"]);
  if (node["node"]) ev.node = node["node"].as<int>();
  if (node["mode"]) ev.mode = node["mode"].as<std::string>();
  if (node["until"]) ev.until = node["until"].as<std::uint64_t>();
  if (ev.action == "submit" && ev.user.empty()) {
    throw error(errc::script_error, "submit needs a user");
  }
  if (ev.action == "delete" && ev.user.empty()) {
    throw error(errc::script_error, "delete needs a user");
  }
  if (ev.action == "partition" && ev.until <= ev.at) {
    throw error(errc::script_error, "partition must heal after it starts");
  }
  return ev;
}

}  // namespace detail

inline sim_config scenario_from_yaml(const YAML::Node &root) {
  if (!root.IsMap()) {
    throw error(errc::script_error, "scenario must be a YAML map");
  }
  sim_config cfg;
  if (root["nodes"]) cfg.n_nodes = root["nodes"].as<int>();
  if (root["seed"]) cfg.seed = root["seed"].as<std::uint64_t>();
  if (root["until"]) cfg.until = root["until"].as<std::uint64_t>();
  if (root["latency"]) {
    const YAML::Node lat = root["latency"];
    if (lat["min"]) cfg.latency_min = lat["min"].as<std::uint64_t>();
    if (lat["max"]) cfg.latency_max = lat["max"].as<std::uint64_t>();
  }
  if (root["users"]) {
    for (const auto &user : root["users"]) {
      cfg.users.push_back(user.as<std::string>());
    }
  }
  if (root["config"]) cfg.config = config_from_yaml(root["config"]);
  if (root["events"]) {
    if (!root["events"].IsSequence()) {
      throw error(errc::script_error, "events must be a list");
    }
    for (const auto &node : root["events"]) {
      cfg.script.push_back(detail::event_from_yaml(node));
    }
  }
  validate_sim_config(cfg);
  return cfg;
}

inline sim_config parse_scenario(const std::string &text) {
  try {
    return scenario_from_yaml(YAML::Load(text));
  } catch (const YAML::Exception &e) {
    throw error(errc::script_error, std::string("scenario: ") + e.what());
  }
}

inline sim_config load_scenario(const std::string &path) {
  try {
    return scenario_from_yaml(YAML::LoadFile(path));
  } catch (const YAML::Exception &e) {
    throw error(errc::script_error, "scenario " + path + ": " + e.what());
  }
}

}  // namespace prunechain
