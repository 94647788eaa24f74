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

#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "prunechain/bytes.hpp"
#include "prunechain/types.hpp"

namespace prunechain {

// ---------------------------------------------------------------------------
// Chain configuration from YAML
// ---------------------------------------------------------------------------

inline chain_config config_from_yaml(const YAML::Node &root) {
  chain_config cfg;
  if (!root.IsMap()) {
    throw error(errc::validation, "config must be a YAML map");
  }
  if (root["delta_l"]) cfg.delta_l = root["delta_l"].as<std::uint64_t>();
  if (root["l_max"]) cfg.l_max = root["l_max"].as<std::uint64_t>();
  if (root["l_min"]) cfg.l_min = root["l_min"].as<std::uint64_t>();
  if (root["min_summary_blocks"]) {
    cfg.min_summary_blocks = root["min_summary_blocks"].as<std::uint64_t>();
  }
  if (root["min_time_coverage"]) {
    cfg.min_time_coverage = root["min_time_coverage"].as<std::uint64_t>();
  }
  if (root["heartbeat_interval"]) {
    cfg.heartbeat_interval = root["heartbeat_interval"].as<std::uint64_t>();
  }
  if (root["redundancy_enabled"]) {
    cfg.redundancy_enabled = root["redundancy_enabled"].as<bool>();
  }
  validate_config(cfg);
  return cfg;
}

inline chain_config load_config(const std::string &path) {
  try {
    return config_from_yaml(YAML::LoadFile(path));
  } catch (const YAML::Exception &e) {
    throw error(errc::validation, "config " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Payload schema
// ---------------------------------------------------------------------------

// Declarative shape of acceptable payloads, loaded from YAML:
//
//   payload:
//     type: string            # or: map
//     max_length: 64          # bytes, string payloads
//     pattern: "^[A-Z ]+$"    # full-match regex, string payloads
//     required: [name, value] # keys, map payloads (parsed as YAML)
//     fields:                 # per-key value types, map payloads
//       name: string
//       value: int
//
// Violations are reported before anything is signed or appended.
class entry_schema {
 public:
  entry_schema() = default;  // permissive: accepts everything

  static entry_schema from_yaml(const YAML::Node &root) {
    entry_schema s;
    if (!root.IsMap() || !root["payload"]) {
      throw error(errc::schema_violation,
                  "schema must be a map with a payload section");
    }
    const YAML::Node p = root["payload"];
    if (p["type"]) {
      s.type_ = p["type"].as<std::string>();
      if (s.type_ != "string" && s.type_ != "map") {
        throw error(errc::schema_violation,
                    "payload type must be string or map");
      }
    }
    if (p["max_length"]) s.max_length_ = p["max_length"].as<std::size_t>();
    if (p["pattern"]) {
      s.pattern_text_ = p["pattern"].as<std::string>();
      s.pattern_.emplace(*s.pattern_text_);
    }
    if (p["required"]) {
      for (const auto &key : p["required"]) {
        s.required_.push_back(key.as<std::string>());
      }
    }
    if (p["fields"]) {
      for (const auto &field : p["fields"]) {
        const std::string type = field.second.as<std::string>();
        if (type != "string" && type != "int") {
          throw error(errc::schema_violation,
                      "field type must be string or int");
        }
        s.fields_[field.first.as<std::string>()] = type;
      }
    }
    return s;
  }

  static entry_schema load_file(const std::string &path) {
    try {
      return from_yaml(YAML::LoadFile(path));
    } catch (const YAML::Exception &e) {
      throw error(errc::schema_violation, "schema " + path + ": " + e.what());
    }
  }

  // nullopt when the payload conforms, otherwise a human-readable reason.
  std::optional<std::string> validate(const bytes &payload) const {
    if (max_length_ && payload.size() > *max_length_) {
      return "payload exceeds max_length " + std::to_string(*max_length_);
    }
    const std::string text = to_string(payload);
    if (type_ == "map") {
      YAML::Node node;
      try {
        node = YAML::Load(text);
      } catch (const YAML::Exception &) {
        return std::optional<std::string>("payload is not a YAML map");
      }
      if (!node.IsMap()) {
        return std::optional<std::string>("payload is not a YAML map");
      }
      for (const std::string &key : required_) {
        if (!node[key]) return "payload misses required key " + key;
      }
      for (const auto &[key, type] : fields_) {
        if (!node[key]) continue;
        if (type == "int") {
          try {
            node[key].as<std::int64_t>();
          } catch (const YAML::Exception &) {
            return "payload key " + key + " must be an integer";
          }
        } else if (!node[key].IsScalar()) {
          return "payload key " + key + " must be a string";
        }
      }
      return std::nullopt;
    }
    if (pattern_ && !std::regex_match(text, *pattern_)) {
      return "payload does not match pattern " + *pattern_text_;
    }
    return std::nullopt;
  }

 private:
  std::string type_ = "string";
  std::optional<std::size_t> max_length_;
  std::optional<std::string> pattern_text_;
  std::optional<std::regex> pattern_;
  std::vector<std::string> required_;
  std::map<std::string, std::string> fields_;
};

}  // namespace prunechain
