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
//
// prunechain — operate a single-node audit chain and drive the multi-node
// simulator.  Exit codes: 0 ok, 2 validation/schema/io, 3 authorization,
// 4 guard violation, 5 broken chain.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prunechain/engine.hpp"
#include "prunechain/render.hpp"
#include "prunechain/scenario.hpp"

namespace pc = prunechain;
using pc::ordered_json;

namespace {

int exit_code_for(pc::errc code) {
  switch (code) {
    case pc::errc::bad_signature:
    case pc::errc::vote_rejected:
      return 3;
    case pc::errc::guard_violation:
      return 4;
    case pc::errc::invalid_chain:
      return 5;
    default:
      return 2;  // validation, schema, script, io, ...
  }
}

// Advisory lock next to the chain file: writers exclusive, readers shared.
class file_lock {
 public:
  file_lock(const std::string &chain_path, bool exclusive)
      : path_(chain_path + ".lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) {
      throw pc::error(pc::errc::io_error, "cannot open lock file " + path_);
    }
    if (::flock(fd_, (exclusive ? LOCK_EX : LOCK_SH) | LOCK_NB) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw pc::error(pc::errc::validation,
                      "chain file is locked by another process");
    }
  }
  file_lock(const file_lock &) = delete;
  file_lock &operator=(const file_lock &) = delete;
  ~file_lock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }

 private:
  std::string path_;
  int fd_ = -1;
};

std::uint64_t parse_u64(const std::string &text, const std::string &what) {
  try {
    std::size_t used = 0;
    const std::uint64_t value = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception &) {
    throw pc::error(pc::errc::validation, what + " is not a number: " + text);
  }
}

pc::entry_ref parse_ref(const std::string &text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos) {
    throw pc::error(pc::errc::validation,
                    "expected <block>:<index>, got: " + text);
  }
  return {parse_u64(text.substr(0, colon), "block number"),
          parse_u64(text.substr(colon + 1), "entry index")};
}

struct loaded_state {
  pc::key_registry registry;
  pc::chain_engine engine;
};

loaded_state load_state(const std::string &chain_path) {
  pc::key_registry registry =
      pc::load_registry(pc::registry_path_for(chain_path));
  pc::chain_file file = pc::load_chain_file(chain_path, &registry);
  return {registry, pc::chain_engine(std::move(file.c), registry, file.clock)};
}

void emit_error(bool json, const std::string &what) {
  if (json) {
    ordered_json j;
    j["ok"] = false;
    j["error"] = what;
    std::cout << j.dump() << "\n";
  }
  std::cerr << "error: " << what << "\n";
}

int run_guarded(bool json, const std::function<int()> &body) {
  try {
    return body();
  } catch (const pc::error &e) {
    emit_error(json, e.what());
    return exit_code_for(e.code());
  } catch (const std::exception &e) {
    emit_error(json, e.what());
    return 2;
  }
}

ordered_json blocks_to_numbers(const std::vector<pc::block> &blocks) {
  ordered_json arr = ordered_json::array();
  for (const pc::block &b : blocks) arr.push_back(b.number);
  return arr;
}

void print_blocks(const std::vector<pc::block> &blocks) {
  for (const pc::block &b : blocks) {
    std::cout << pc::render_block(b) << "\n";
  }
}

void print_reports(const pc::chain_engine &engine, bool json,
                   ordered_json &out) {
  if (json) {
    ordered_json arr = ordered_json::array();
    for (const pc::prune_report &r : engine.reports()) {
      arr.push_back(pc::report_to_json(r));
    }
    out["reports"] = std::move(arr);
    return;
  }
  for (const pc::prune_report &r : engine.reports()) {
    std::cout << "pruned: marker " << r.old_marker << " -> " << r.new_marker
              << ", dropped " << r.dropped_entries.size() << " entr"
              << (r.dropped_entries.size() == 1 ? "y" : "ies") << "\n";
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"prunechain: a blockchain that can forget"};
  app.require_subcommand(1);

  std::string chain_path;
  std::string config_path;
  std::string schema_path;
  std::string key_path;
  std::string out_path;
  std::string scenario_path;
  std::string trace_path;
  std::string user;
  std::string payload;
  std::string target_text;
  std::vector<std::string> depends_text;
  std::vector<std::string> cosign_paths;
  std::uint64_t seed = 0;
  std::uint64_t expires_time = 0;
  std::uint64_t expires_block = 0;
  std::uint64_t count = 1;
  bool json = false;
  bool admin = false;

  CLI::App *cmd_init = app.add_subcommand("init", "create a new chain file");
  cmd_init->add_option("--chain", chain_path, "chain file to create")
      ->required();
  cmd_init->add_option("--config", config_path, "chain parameters (YAML)");
  cmd_init->add_flag("--json", json, "machine-readable output");

  CLI::App *cmd_keygen =
      app.add_subcommand("keygen", "create a signing key and register it");
  cmd_keygen->add_option("--chain", chain_path, "chain file whose registry gains the key")
      ->required();
  cmd_keygen->add_option("--user", user, "identity to register")->required();
  cmd_keygen->add_option("--key", key_path, "key file to write")->required();
  CLI::Option *keygen_seed =
      cmd_keygen->add_option("--seed", seed, "derive the key deterministically");
  cmd_keygen->add_flag("--admin", admin, "register as an admin key");
  cmd_keygen->add_flag("--json", json, "machine-readable output");

  CLI::App *cmd_append =
      app.add_subcommand("append", "sign and append a data entry");
  cmd_append->add_option("--chain", chain_path, "chain file")->required();
  cmd_append->add_option("--key", key_path, "signer's key file")->required();
  cmd_append->add_option("--payload", payload, "entry payload")->required();
  cmd_append->add_option("--schema", schema_path,
                         "payload schema to enforce (YAML)");
  CLI::Option *opt_expires_time = cmd_append->add_option(
      "--expires-time", expires_time, "drop after this timestamp");
  CLI::Option *opt_expires_block = cmd_append->add_option(
      "--expires-block", expires_block, "drop after this block number");
  cmd_append->add_option("--depends", depends_text,
                         "dependency as <block>:<index> (repeatable)");
  cmd_append->add_flag("--json", json, "machine-readable output");
  opt_expires_time->excludes(opt_expires_block);

  CLI::App *cmd_delete = app.add_subcommand(
      "delete-request", "request deletion of an entry you own");
  cmd_delete->add_option("--chain", chain_path, "chain file")->required();
  cmd_delete->add_option("--key", key_path, "requester's key file")->required();
  cmd_delete->add_option("--target", target_text, "entry as <block>:<index>")
      ->required();
  cmd_delete->add_option("--cosign", cosign_paths,
                         "key file of a consenting dependent owner (repeatable)");
  cmd_delete->add_flag("--json", json, "machine-readable output");

  CLI::App *cmd_tick =
      app.add_subcommand("tick", "advance time by one step (heartbeat/summary)");
  cmd_tick->add_option("--chain", chain_path, "chain file")->required();
  cmd_tick->add_option("--count", count, "number of steps (default 1)");
  cmd_tick->add_flag("--json", json, "machine-readable output");

  CLI::App *cmd_show = app.add_subcommand("show", "render the chain");
  cmd_show->add_option("--chain", chain_path, "chain file")->required();
  cmd_show->add_flag("--json", json, "dump blocks as JSON instead of text");

  CLI::App *cmd_verify =
      app.add_subcommand("verify", "check every link, hash and signature");
  cmd_verify->add_option("--chain", chain_path, "chain file")->required();
  cmd_verify->add_flag("--json", json, "machine-readable output");

  CLI::App *cmd_simulate =
      app.add_subcommand("simulate", "run a multi-node scenario");
  cmd_simulate->add_option("--scenario", scenario_path, "scenario file (YAML)")
      ->required();
  cmd_simulate->add_option("--trace", trace_path,
                           "write the JSON-Lines trace here (default stdout)");
  CLI::Option *sim_seed =
      cmd_simulate->add_option("--seed", seed, "override the scenario seed");
  cmd_simulate->add_flag("--json", json, "machine-readable status line");

  CLI::App *cmd_export =
      app.add_subcommand("export", "write the chain as JSON-Lines");
  cmd_export->add_option("--chain", chain_path, "chain file")->required();
  cmd_export->add_option("--out", out_path, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // --help stays 0; any flag problem is validation
  }

  if (app.got_subcommand(cmd_init)) {
    return run_guarded(json, [&] {
      if (std::filesystem::exists(chain_path)) {
        throw pc::error(pc::errc::validation,
                        "refusing to overwrite existing " + chain_path);
      }
      pc::chain_config config;
      if (!config_path.empty()) config = pc::load_config(config_path);
      file_lock lock(chain_path, /*exclusive=*/true);
      pc::chain c = pc::make_chain(config, 0);
      pc::save_chain_file(c, 0, chain_path);
      if (json) {
        ordered_json j;
        j["ok"] = true;
        j["chain"] = chain_path;
        j["marker"] = c.marker;
        j["clock"] = 0;
        std::cout << j.dump() << "\n";
      } else {
        std::cout << "initialized " << chain_path << "\n";
      }
      return 0;
    });
  }

  if (app.got_subcommand(cmd_keygen)) {
    return run_guarded(json, [&] {
      pc::stored_keypair kp;
      kp.user = user;
      kp.keys = *keygen_seed ? pc::derive_keypair(seed, user)
                             : pc::generate_keypair();
      pc::save_keypair(kp, key_path);
      pc::append_registry_entry(pc::registry_path_for(chain_path), user,
                                kp.keys.pk, admin);
      if (json) {
        ordered_json j;
        j["ok"] = true;
        j["user"] = user;
        j["admin"] = admin;
        j["public_key"] = pc::to_hex(kp.keys.pk);
        j["key_file"] = key_path;
        std::cout << j.dump() << "\n";
      } else {
        std::cout << "registered " << (admin ? "admin " : "") << user << " ("
                  << pc::to_hex(kp.keys.pk).substr(0, 8) << "...) -> "
                  << key_path << "\n";
      }
      return 0;
    });
  }

  if (app.got_subcommand(cmd_append)) {
    return run_guarded(json, [&] {
      const pc::bytes payload_bytes = pc::to_bytes(payload);
      if (!schema_path.empty()) {
        pc::entry_schema schema = pc::entry_schema::load_file(schema_path);
        if (std::optional<std::string> violation =
                schema.validate(payload_bytes)) {
          // rejected before anything is signed or the chain is touched
          throw pc::error(pc::errc::schema_violation, *violation);
        }
      }
      file_lock lock(chain_path, /*exclusive=*/true);
      loaded_state state = load_state(chain_path);
      pc::stored_keypair kp = pc::load_keypair(key_path);

      pc::entry e;
      e.kind = pc::entry_kind::data;
      e.user = kp.user;
      e.payload = payload_bytes;
      if (*opt_expires_time) {
        e.expires = pc::expiry{pc::expiry_kind::by_time, expires_time};
      } else if (*opt_expires_block) {
        e.expires = pc::expiry{pc::expiry_kind::by_block, expires_block};
      }
      for (const std::string &dep : depends_text) {
        e.depends_on.push_back(parse_ref(dep));
      }
      pc::sign_entry(e, kp.keys.sk);

      pc::submit_outcome outcome = state.engine.submit(e);
      pc::save_chain_file(state.engine.state(), state.engine.clock(),
                          chain_path);
      if (json) {
        ordered_json j;
        j["ok"] = true;
        j["clock"] = state.engine.clock();
        j["appended"] = blocks_to_numbers(outcome.appended);
        j["entry"] = ordered_json::array(
            {outcome.appended.back().number, 0});
        print_reports(state.engine, true, j);
        std::cout << j.dump() << "\n";
      } else {
        print_blocks(outcome.appended);
        ordered_json unused;
        print_reports(state.engine, false, unused);
      }
      return 0;
    });
  }

  if (app.got_subcommand(cmd_delete)) {
    return run_guarded(json, [&] {
      file_lock lock(chain_path, /*exclusive=*/true);
      loaded_state state = load_state(chain_path);
      pc::stored_keypair kp = pc::load_keypair(key_path);

      pc::entry e;
      e.kind = pc::entry_kind::delete_request;
      e.user = kp.user;
      e.target = parse_ref(target_text);
      pc::sign_entry(e, kp.keys.sk);

      std::vector<pc::signature> cosignatures;
      for (const std::string &path : cosign_paths) {
        pc::stored_keypair cosigner = pc::load_keypair(path);
        cosignatures.push_back(pc::make_cosignature(*e.target, cosigner.keys.sk));
      }

      pc::submit_outcome outcome = state.engine.submit(e, cosignatures);
      pc::save_chain_file(state.engine.state(), state.engine.clock(),
                          chain_path);
      const pc::deletion_decision &decision = *outcome.decision;
      if (json) {
        ordered_json j;
        j["ok"] = decision.approved;
        j["clock"] = state.engine.clock();
        j["appended"] = blocks_to_numbers(outcome.appended);
        j["decision"] = pc::decision_to_json(decision);
        print_reports(state.engine, true, j);
        std::cout << j.dump() << "\n";
      } else {
        print_blocks(outcome.appended);
        if (decision.approved) {
          std::cout << "approved: " << decision.marked.size()
                    << " entr" << (decision.marked.size() == 1 ? "y" : "ies")
                    << " marked for deletion\n";
        } else {
          std::cout << "no effect: " << decision.reason << "\n";
        }
      }
      // the request is on record either way; a denied one changes nothing
      return decision.approved ? 0 : 3;
    });
  }

  if (app.got_subcommand(cmd_tick)) {
    return run_guarded(json, [&] {
      file_lock lock(chain_path, /*exclusive=*/true);
      loaded_state state = load_state(chain_path);
      std::vector<pc::block> appended;
      for (std::uint64_t i = 0; i < count; ++i) {
        std::vector<pc::block> step = state.engine.tick();
        appended.insert(appended.end(), step.begin(), step.end());
      }
      pc::save_chain_file(state.engine.state(), state.engine.clock(),
                          chain_path);
      if (json) {
        ordered_json j;
        j["ok"] = true;
        j["clock"] = state.engine.clock();
        j["appended"] = blocks_to_numbers(appended);
        print_reports(state.engine, true, j);
        std::cout << j.dump() << "\n";
      } else {
        if (appended.empty()) {
          std::cout << "idle (no block due at clock " << state.engine.clock()
                    << ")\n";
        } else {
          print_blocks(appended);
        }
        ordered_json unused;
        print_reports(state.engine, false, unused);
      }
      return 0;
    });
  }

  if (app.got_subcommand(cmd_show)) {
    return run_guarded(json, [&] {
      file_lock lock(chain_path, /*exclusive=*/false);
      pc::key_registry registry =
          pc::load_registry(pc::registry_path_for(chain_path));
      pc::chain_file file = pc::load_chain_file(chain_path, &registry);
      if (json) {
        ordered_json j;
        j["clock"] = file.clock;
        j["marker"] = file.c.marker;
        j["length"] = pc::chain_length(file.c);
        j["head"] = pc::head(file.c).number;
        ordered_json arr = ordered_json::array();
        for (const pc::block &b : file.c.blocks) {
          arr.push_back(pc::block_to_json(b));
        }
        j["blocks"] = std::move(arr);
        std::cout << j.dump() << "\n";
      } else if (::isatty(STDOUT_FILENO)) {
        std::cout << pc::render_chain(file.c, /*color=*/true);
      } else {
        std::cout << pc::golden_render(file.c);
      }
      return 0;
    });
  }

  if (app.got_subcommand(cmd_verify)) {
    return run_guarded(json, [&] {
      file_lock lock(chain_path, /*exclusive=*/false);
      pc::key_registry registry =
          pc::load_registry(pc::registry_path_for(chain_path));
      pc::chain_file file = pc::load_chain_file(chain_path, &registry);
      pc::verify_verdict verdict = pc::verify_chain(file.c, &registry);
      if (json) {
        std::cout << pc::verdict_to_json(verdict).dump() << "\n";
      } else if (verdict.valid) {
        std::cout << "valid (marker " << file.c.marker << ", length "
                  << pc::chain_length(file.c) << ", head "
                  << pc::head(file.c).number << ")\n";
      } else {
        std::cout << "broken at block " << verdict.at << ": " << verdict.reason
                  << "\n";
      }
      return verdict.valid ? 0 : 5;
    });
  }

  if (app.got_subcommand(cmd_simulate)) {
    return run_guarded(json, [&] {
      pc::sim_config config = pc::load_scenario(scenario_path);
      if (*sim_seed) config.seed = seed;
      pc::simulation sim = pc::run_simulation(config);
      if (trace_path.empty()) {
        std::cout << sim.trace_text();
      } else {
        std::ofstream out(trace_path, std::ios::trunc);
        if (!out) {
          throw pc::error(pc::errc::io_error, "cannot write " + trace_path);
        }
        out << sim.trace_text();
        ordered_json j;
        j["ok"] = true;
        j["nodes"] = config.n_nodes;
        j["until"] = config.until;
        j["events"] = sim.trace().size();
        j["trace"] = trace_path;
        if (json) {
          std::cout << j.dump() << "\n";
        } else {
          std::cout << "simulated " << config.n_nodes << " nodes to t"
                    << config.until << "; " << sim.trace().size()
                    << " events -> " << trace_path << "\n";
        }
      }
      return 0;
    });
  }

  if (app.got_subcommand(cmd_export)) {
    return run_guarded(false, [&] {
      file_lock lock(chain_path, /*exclusive=*/false);
      pc::chain_file file = pc::load_chain_file(chain_path);
      if (out_path.empty()) {
        pc::export_chain(file.c, file.clock, std::cout);
      } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) {
          throw pc::error(pc::errc::io_error, "cannot write " + out_path);
        }
        pc::export_chain(file.c, file.clock, out);
      }
      return 0;
    });
  }

  return 2;  // unreachable: require_subcommand(1)
}
