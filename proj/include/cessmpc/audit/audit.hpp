// Copyright 2026 The cessmpc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Public replay of a bulletin transcript. The auditor runs the same engine as
// the servers, holding commitments only, and re-derives the cheat list.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cessmpc/online/engine.hpp"
#include "cessmpc/online/session.hpp"

namespace cessmpc {

struct AuditVerdict {
  std::uint64_t seq = 0;
  std::uint64_t epoch = 0;
  PartyId author = 0;
  EntryKind kind = EntryKind::Silent;
  bool accepted = false;
  std::string reason;
};

struct AuditReport {
  bool complete = false;
  bool circuit_matches = false;
  bool signatures_ok = true;
  bool sttp_consistent = true;
  std::vector<std::size_t> cheat_list;
  std::optional<OutputRecord> outcome;
  std::vector<AuditVerdict> verdicts;
  std::string error;  // why the replay stopped early, if it did
  EngineStats stats;

  std::string status() const { return complete ? (outcome && outcome->ok ? "ok" : "abort") : "incomplete"; }
};

inline AuditReport audit(const Transcript& transcript, const Circuit& circuit) {
  AuditReport rep;
  PublicSetup setup;
  try {
    setup = parse_session_header(transcript.header);
  } catch (const DecodeError& e) {
    rep.error = e.what();
    rep.signatures_ok = false;
    return rep;
  }
  rep.circuit_matches = circuit_digest(circuit) == setup.circuit;
  if (!rep.circuit_matches) {
    rep.error = "circuit does not match the transcript";
    return rep;
  }

  // Signature and ordering pass; rejected entries are left out of the replay.
  std::map<std::uint64_t, std::vector<Message>> rounds;
  std::map<std::uint64_t, std::size_t> index_of;
  std::uint64_t last_epoch = 0;
  for (std::size_t i = 0; i < transcript.entries.size(); ++i) {
    const auto& e = transcript.entries[i];
    AuditVerdict v{e.seq, e.epoch, e.author, e.kind, true, ""};
    if (!setup.pki.verify(e)) {
      v.accepted = false;
      v.reason = "bad signature";
      rep.signatures_ok = false;
    } else if (e.seq != i || e.epoch < last_epoch || !e.broadcast()) {
      v.accepted = false;
      v.reason = "out of order";
      rep.signatures_ok = false;
    } else {
      last_epoch = e.epoch;
      rounds[e.epoch].push_back(e);
    }
    index_of[e.seq] = rep.verdicts.size();
    rep.verdicts.push_back(std::move(v));
  }

  try {
    ProtocolEngine engine(setup.ctx, circuit, EngineRole::Auditor);
    for (std::uint64_t epoch = 0; epoch <= last_epoch && !engine.finished(); ++epoch) {
      static const std::vector<Message> kNone;
      auto it = rounds.find(epoch);
      engine.process_round(epoch, it == rounds.end() ? kNone : it->second);
    }
    for (const auto& ev : engine.verdicts()) {
      auto it = index_of.find(ev.seq);
      if (it == index_of.end()) continue;
      auto& v = rep.verdicts[it->second];
      if (v.accepted) {
        v.accepted = ev.accepted;
        v.reason = ev.reason;
      }
    }
    rep.complete = engine.finished();
    rep.cheat_list = engine.cheat_list();
    rep.outcome = engine.outcome();
    rep.sttp_consistent = engine.sttp_consistent();
    rep.stats = engine.stats();
    if (!rep.complete) rep.error = "transcript ends before the output";
  } catch (const std::exception& e) {
    rep.complete = false;
    rep.error = e.what();
  }
  return rep;
}

inline nlohmann::json audit_json(const AuditReport& r) {
  using nlohmann::json;
  json entries = json::array();
  for (const auto& v : r.verdicts) {
    entries.push_back({{"seq", v.seq},
                       {"epoch", v.epoch},
                       {"author", party_name(v.author)},
                       {"kind", kind_name(v.kind)},
                       {"accepted", v.accepted},
                       {"reason", v.reason}});
  }
  json j{{"status", r.status()},
         {"circuit_matches", r.circuit_matches},
         {"signatures_ok", r.signatures_ok},
         {"sttp_consistent", r.sttp_consistent},
         {"cheat_list", r.cheat_list},
         {"entries", entries}};
  if (!r.error.empty()) j["error"] = r.error;
  if (r.outcome) {
    j["output_ok"] = r.outcome->ok;
    j["output_cheaters"] = r.outcome->cheaters;
  }
  return j;
}

}  // namespace cessmpc
