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

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prunechain/chain.hpp"
#include "prunechain/deletion.hpp"
#include "prunechain/summarize.hpp"
#include "prunechain/types.hpp"

namespace prunechain {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// JSON projections
// ---------------------------------------------------------------------------

inline ordered_json ref_to_json(const entry_ref &r) {
  return ordered_json::array({r.block_number, r.entry_number});
}

inline entry_ref ref_from_json(const ordered_json &j) {
  return {j.at(0).get<std::uint64_t>(), j.at(1).get<std::uint64_t>()};
}

inline ordered_json entry_to_json(const entry &e) {
  ordered_json j;
  j["kind"] = e.kind == entry_kind::data ? "data" : "delete";
  j["user"] = e.user;
  if (e.kind == entry_kind::data) {
    j["payload"] = to_hex(e.payload);
    if (e.expires) {
      j["expiry"] = {
          {"kind", e.expires->kind == expiry_kind::by_time ? "time" : "block"},
          {"bound", e.expires->bound}};
    }
    if (!e.depends_on.empty()) {
      ordered_json deps = ordered_json::array();
      for (const entry_ref &r : e.depends_on) deps.push_back(ref_to_json(r));
      j["depends_on"] = deps;
    }
  } else {
    j["target"] = ref_to_json(*e.target);
  }
  j["signature"] = to_hex(e.sig);
  return j;
}

inline entry entry_from_json(const ordered_json &j) {
  entry e;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "data") {
    e.kind = entry_kind::data;
  } else if (kind == "delete") {
    e.kind = entry_kind::delete_request;
  } else {
    throw error(errc::io_error, "unknown entry kind: " + kind);
  }
  e.user = j.at("user").get<std::string>();
  if (e.kind == entry_kind::data) {
    e.payload = from_hex(j.at("payload").get<std::string>());
    if (j.contains("expiry")) {
      expiry x;
      const std::string xk = j["expiry"].at("kind").get<std::string>();
      if (xk == "time") {
        x.kind = expiry_kind::by_time;
      } else if (xk == "block") {
        x.kind = expiry_kind::by_block;
      } else {
        throw error(errc::io_error, "unknown expiry kind: " + xk);
      }
      x.bound = j["expiry"].at("bound").get<std::uint64_t>();
      e.expires = x;
    }
    if (j.contains("depends_on")) {
      for (const auto &r : j["depends_on"]) e.depends_on.push_back(ref_from_json(r));
    }
  } else {
    e.target = ref_from_json(j.at("target"));
  }
  bytes sig = from_hex(j.at("signature").get<std::string>());
  if (sig.size() != e.sig.size()) {
    throw error(errc::io_error, "signature must be 64 bytes");
  }
  std::copy(sig.begin(), sig.end(), e.sig.begin());
  return e;
}

inline ordered_json summary_entry_to_json(const summary_entry &se) {
  ordered_json j;
  j["origin"] = ref_to_json({se.origin_block, se.origin_entry});
  j["origin_timestamp"] = se.origin_timestamp;
  j["entry"] = entry_to_json(se.inner);
  return j;
}

inline summary_entry summary_entry_from_json(const ordered_json &j) {
  summary_entry se;
  entry_ref origin = ref_from_json(j.at("origin"));
  se.origin_block = origin.block_number;
  se.origin_entry = origin.entry_number;
  se.origin_timestamp = j.at("origin_timestamp").get<std::uint64_t>();
  se.inner = entry_from_json(j.at("entry"));
  return se;
}

namespace detail {

inline digest digest_from_hex(const std::string &hex) {
  bytes raw = from_hex(hex);
  if (raw.size() != 32) {
    throw error(errc::io_error, "digest must be 32 bytes");
  }
  digest d;
  std::copy(raw.begin(), raw.end(), d.begin());
  return d;
}

}  // namespace detail

inline ordered_json block_to_json(const block &b) {
  ordered_json j;
  switch (b.kind) {
    case block_kind::normal:
      j["kind"] = "normal";
      break;
    case block_kind::summary:
      j["kind"] = "summary";
      break;
    case block_kind::empty:
      j["kind"] = "empty";
      break;
  }
  j["number"] = b.number;
  j["timestamp"] = b.timestamp;
  j["previous_hash"] = to_hex(b.previous_hash);
  if (b.kind == block_kind::normal) {
    j["nonce"] = to_hex(b.nonce);
    if (!b.entries.empty()) {
      ordered_json entries = ordered_json::array();
      for (const entry &e : b.entries) entries.push_back(entry_to_json(e));
      j["entries"] = entries;
    }
  } else if (b.kind == block_kind::summary) {
    ordered_json summaries = ordered_json::array();
    for (const summary_entry &se : b.summaries) {
      summaries.push_back(summary_entry_to_json(se));
    }
    j["summaries"] = summaries;
    if (b.redundancy) {
      j["redundancy"] = {{"sequence_index", b.redundancy->sequence_index},
                         {"merkle_root", to_hex(b.redundancy->merkle_root)}};
    }
  }
  j["own_hash"] = to_hex(b.own_hash);
  return j;
}

inline block block_from_json(const ordered_json &j) {
  block b;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "normal") {
    b.kind = block_kind::normal;
  } else if (kind == "summary") {
    b.kind = block_kind::summary;
  } else if (kind == "empty") {
    b.kind = block_kind::empty;
  } else {
    throw error(errc::io_error, "unknown block kind: " + kind);
  }
  b.number = j.at("number").get<std::uint64_t>();
  b.timestamp = j.at("timestamp").get<std::uint64_t>();
  b.previous_hash = detail::digest_from_hex(j.at("previous_hash").get<std::string>());
  if (b.kind == block_kind::normal) {
    b.nonce = from_hex(j.at("nonce").get<std::string>());
    if (j.contains("entries")) {
      for (const auto &e : j["entries"]) b.entries.push_back(entry_from_json(e));
    }
  } else if (b.kind == block_kind::summary) {
    if (j.contains("summaries")) {
      for (const auto &se : j["summaries"]) {
        b.summaries.push_back(summary_entry_from_json(se));
      }
    }
    if (j.contains("redundancy")) {
      redundancy_ref ref;
      ref.sequence_index = j["redundancy"].at("sequence_index").get<std::uint64_t>();
      ref.merkle_root =
          detail::digest_from_hex(j["redundancy"].at("merkle_root").get<std::string>());
      b.redundancy = ref;
    }
  }
  b.own_hash = detail::digest_from_hex(j.at("own_hash").get<std::string>());
  return b;
}

inline ordered_json config_to_json(const chain_config &cfg) {
  ordered_json j;
  j["delta_l"] = cfg.delta_l;
  j["l_max"] = cfg.l_max;
  j["l_min"] = cfg.l_min;
  j["min_summary_blocks"] = cfg.min_summary_blocks;
  j["min_time_coverage"] = cfg.min_time_coverage;
  j["heartbeat_interval"] = cfg.heartbeat_interval;
  j["redundancy_enabled"] = cfg.redundancy_enabled;
  return j;
}

inline chain_config config_from_json(const ordered_json &j) {
  chain_config cfg;
  cfg.delta_l = j.at("delta_l").get<std::uint64_t>();
  cfg.l_max = j.at("l_max").get<std::uint64_t>();
  cfg.l_min = j.at("l_min").get<std::uint64_t>();
  cfg.min_summary_blocks = j.at("min_summary_blocks").get<std::uint64_t>();
  cfg.min_time_coverage = j.at("min_time_coverage").get<std::uint64_t>();
  cfg.heartbeat_interval = j.at("heartbeat_interval").get<std::uint64_t>();
  cfg.redundancy_enabled = j.at("redundancy_enabled").get<bool>();
  return cfg;
}

inline ordered_json report_to_json(const prune_report &r) {
  ordered_json j;
  ordered_json merged = ordered_json::array();
  for (const sequence &s : r.merged_sequences) {
    merged.push_back({{"index", s.index},
                      {"ordinal", s.ordinal},
                      {"first_block", s.first_block},
                      {"last_block", s.last_block}});
  }
  j["merged_sequences"] = merged;
  ordered_json dropped = ordered_json::array();
  for (const dropped_entry &d : r.dropped_entries) {
    dropped.push_back({{"ref", ref_to_json(d.ref)}, {"reason", d.reason}});
  }
  j["dropped_entries"] = dropped;
  j["old_marker"] = r.old_marker;
  j["new_marker"] = r.new_marker;
  j["new_length"] = r.new_length;
  return j;
}

inline ordered_json decision_to_json(const deletion_decision &d) {
  ordered_json j;
  j["request"] = ref_to_json(d.request);
  j["target"] = ref_to_json(d.target);
  j["approved"] = d.approved;
  if (!d.approved) j["reason"] = d.reason;
  if (!d.required_cosigners.empty()) j["required_cosigners"] = d.required_cosigners;
  if (!d.marked.empty()) {
    ordered_json marked = ordered_json::array();
    for (const entry_ref &r : d.marked) marked.push_back(ref_to_json(r));
    j["marked"] = marked;
  }
  return j;
}

inline ordered_json verdict_to_json(const verify_verdict &v) {
  ordered_json j;
  j["valid"] = v.valid;
  if (!v.valid) {
    j["at"] = v.at;
    j["reason"] = v.reason;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Chain files (JSON lines)
// ---------------------------------------------------------------------------

inline constexpr const char *chain_format_name = "prunechain";
inline constexpr int chain_format_version = 1;

struct chain_file {
  chain c;
  std::uint64_t clock = 0;
};

// First line is the header (format, version, clock, marker, config), then
// one line per block.  Delayed-deletion marks are not persisted: they are
// re-derived from the stored requests on import.
inline void export_chain(const chain &c, std::uint64_t clock,
                         std::ostream &out) {
  ordered_json header;
  header["format"] = chain_format_name;
  header["version"] = chain_format_version;
  header["clock"] = clock;
  header["marker"] = c.marker;
  header["config"] = config_to_json(c.config);
  out << header.dump() << "\n";
  for (const block &b : c.blocks) {
    out << block_to_json(b).dump() << "\n";
  }
}

inline chain_file import_chain(std::istream &in,
                               const key_registry *registry = nullptr) {
  std::string line;
  if (!std::getline(in, line)) {
    throw error(errc::io_error, "chain file is empty");
  }
  ordered_json header = ordered_json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object()) {
    throw error(errc::io_error, "chain file header is not valid JSON");
  }
  if (header.value("format", "") != chain_format_name ||
      header.value("version", -1) != chain_format_version) {
    throw error(errc::io_error, "unrecognized chain file format");
  }
  chain_file file;
  file.clock = header.at("clock").get<std::uint64_t>();
  file.c.marker = header.at("marker").get<std::uint64_t>();
  file.c.config = config_from_json(header.at("config"));
  validate_config(file.c.config);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw error(errc::io_error, "chain file has a corrupt block line");
    }
    file.c.blocks.push_back(block_from_json(j));
  }
  if (file.c.blocks.empty()) {
    throw error(errc::io_error, "chain file has no blocks");
  }
  if (registry != nullptr) {
    replay_delete_requests(file.c, *registry);
  }
  return file;
}

inline void save_chain_file(const chain &c, std::uint64_t clock,
                            const std::string &path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw error(errc::io_error, "cannot write " + path);
  }
  export_chain(c, clock, out);
}

inline chain_file load_chain_file(const std::string &path,
                                  const key_registry *registry = nullptr) {
  std::ifstream in(path);
  if (!in) {
    throw error(errc::io_error, "cannot read " + path);
  }
  return import_chain(in, registry);
}

// ---------------------------------------------------------------------------
// Keys on disk
// ---------------------------------------------------------------------------

// A key file holds one signing identity; the registry file next to a chain
// file holds one line per known public key:
//   {"user":"alice","public_key":"<hex>"}
//   {"admin":"<hex>"}

struct stored_keypair {
  std::string user;
  keypair keys;
};

inline void save_keypair(const stored_keypair &kp, const std::string &path) {
  ordered_json j;
  j["user"] = kp.user;
  j["public_key"] = to_hex(kp.keys.pk);
  j["secret_key"] = to_hex(kp.keys.sk);
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw error(errc::io_error, "cannot write " + path);
  }
  out << j.dump() << "\n";
}

inline stored_keypair load_keypair(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw error(errc::io_error, "cannot read " + path);
  }
  std::string line;
  std::getline(in, line);
  ordered_json j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded()) {
    throw error(errc::io_error, "key file is not valid JSON");
  }
  stored_keypair kp;
  kp.user = j.at("user").get<std::string>();
  bytes pk = from_hex(j.at("public_key").get<std::string>());
  bytes sk = from_hex(j.at("secret_key").get<std::string>());
  if (pk.size() != kp.keys.pk.size() || sk.size() != kp.keys.sk.size()) {
    throw error(errc::io_error, "key file has malformed key material");
  }
  std::copy(pk.begin(), pk.end(), kp.keys.pk.begin());
  std::copy(sk.begin(), sk.end(), kp.keys.sk.begin());
  return kp;
}

inline std::string registry_path_for(const std::string &chain_path) {
  return chain_path + ".keys";
}

inline key_registry load_registry(const std::string &path) {
  key_registry reg;
  std::ifstream in(path);
  if (!in) return reg;  // an absent registry is simply empty
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw error(errc::io_error, "registry file is not valid JSON");
    }
    bytes raw;
    if (j.contains("admin")) {
      raw = from_hex(j.at("admin").get<std::string>());
    } else {
      raw = from_hex(j.at("public_key").get<std::string>());
    }
    if (raw.size() != 32) {
      throw error(errc::io_error, "registry key must be 32 bytes");
    }
    public_key pk;
    std::copy(raw.begin(), raw.end(), pk.begin());
    if (j.contains("admin")) {
      register_admin(reg, pk);
    } else {
      register_user(reg, j.at("user").get<std::string>(), pk);
    }
  }
  return reg;
}

inline void append_registry_entry(const std::string &path,
                                  const std::string &user,
                                  const public_key &pk, bool admin) {
  std::ofstream out(path, std::ios::app);
  if (!out) {
    throw error(errc::io_error, "cannot write " + path);
  }
  ordered_json j;
  if (admin) {
    j["admin"] = to_hex(pk);
  } else {
    j["user"] = user;
    j["public_key"] = to_hex(pk);
  }
  out << j.dump() << "\n";
}

}  // namespace prunechain
