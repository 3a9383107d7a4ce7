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

// End-to-end driver: offline phase, then the online protocol over the
// in-process or the loopback TCP transport.

#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <thread>
#include <vector>

#include "cessmpc/net/adversary.hpp"
#include "cessmpc/net/sim.hpp"
#include "cessmpc/net/tcp.hpp"
#include "cessmpc/offline/offline.hpp"
#include "cessmpc/online/nodes.hpp"
#include "cessmpc/online/session.hpp"

namespace cessmpc {

/// Offline material sized for one evaluation of `circuit`.
inline OfflineParams offline_params_for(const Circuit& circuit, std::size_t servers) {
  const auto plan = plan_circuit(circuit);
  OfflineParams p;
  p.parties = servers;
  p.masks = std::max<std::size_t>(1, plan.inputs.size());
  p.triples = std::max<std::size_t>(1, plan.triples());
  return p;
}

struct ProtocolRun {
  std::optional<OutputRecord> output;  // as read by the client
  Transcript transcript;
  Metrics metrics;
  EngineStats stats;          // STTP's view
  std::vector<std::size_t> cheaters;
  bool sttp_consistent = true;
  std::vector<bool> adversary_fired;
};

struct ProtocolOptions {
  std::vector<AdversarySpec> adversaries;
  SimOptions sim;
};

/// Every party of one online run, built from a session and offline result.
class ProtocolCast {
 public:
  ProtocolCast(const Session& session, const Circuit& circuit, const std::vector<RingElement>& inputs,
               const OfflineResult& offline, const std::vector<AdversarySpec>& adversaries)
      : sttp_(session.ctx, circuit, session.escrow()),
        client_(session.ctx, circuit, inputs, make_client_package(*session.ctx, offline.bundles),
                session.party_seed(kClientId)) {
    const std::size_t n = session.servers();
    if (adversaries.size() + 1 > n) throw std::invalid_argument("at most n-1 servers may be corrupted");
    for (std::size_t j = 0; j < n; ++j) {
      const AdversarySpec* spec = nullptr;
      for (const auto& a : adversaries) {
        if (a.server == j) spec = &a;
      }
      const auto seed = session.party_seed(static_cast<PartyId>(j));
      if (spec) {
        auto node = std::make_unique<AdversarialServer>(session.ctx, circuit, offline.bundles[j], seed, *spec);
        corrupted_.push_back(node.get());
        servers_.push_back(std::move(node));
      } else {
        servers_.push_back(std::make_unique<ServerNode>(session.ctx, circuit, j, offline.bundles[j], seed));
      }
    }
    for (auto& s : servers_) parties_.push_back(s.get());
    parties_.push_back(&sttp_);
    parties_.push_back(&client_);
    for (auto* p : parties_) keys_.emplace(p->id(), session.signing_key(p->id()));
  }

  const std::vector<Participant*>& parties() const { return parties_; }
  const std::map<PartyId, SigningKey>& keys() const { return keys_; }
  const SttpNode& sttp() const { return sttp_; }
  const ClientNode& client() const { return client_; }

  void fill(ProtocolRun& run) const {
    run.output = client_.result();
    run.stats = sttp_.engine().stats();
    run.cheaters = sttp_.engine().cheat_list();
    run.sttp_consistent = sttp_.engine().sttp_consistent();
    for (auto* c : corrupted_) run.adversary_fired.push_back(c->fired());
  }

 private:
  std::vector<std::unique_ptr<ServerNode>> servers_;
  std::vector<AdversarialServer*> corrupted_;
  SttpNode sttp_;
  ClientNode client_;
  std::vector<Participant*> parties_;
  std::map<PartyId, SigningKey> keys_;
};

/// Online phase only, from an existing session and offline result.
inline ProtocolRun run_online(const Session& session, const Circuit& circuit, const std::vector<RingElement>& inputs,
                              const OfflineResult& offline, const ProtocolOptions& opts = {}) {
  ProtocolCast cast(session, circuit, inputs, offline, opts.adversaries);
  RoundHub hub(session.pki, session.signing_key(kHubId));
  auto sim = run_sim(cast.parties(), cast.keys(), hub, kSttpId, opts.sim);
  ProtocolRun run;
  cast.fill(run);
  run.transcript.header = session_header(session, circuit);
  run.transcript.entries = std::move(sim.entries);
  run.metrics = std::move(sim.metrics);
  return run;
}

/// The same run over loopback TCP: a hub on an ephemeral port and one thread per party.
inline ProtocolRun run_online_tcp(const Session& session, const Circuit& circuit,
                                  const std::vector<RingElement>& inputs, const OfflineResult& offline,
                                  const ProtocolOptions& opts = {}, HubOptions hub_opts = {}) {
  ProtocolCast cast(session, circuit, inputs, offline, opts.adversaries);
  RoundHub hub(session.pki, session.signing_key(kHubId));
  TcpHub tcp_hub("127.0.0.1:0");
  const std::string addr = "127.0.0.1:" + std::to_string(tcp_hub.port());
  ProtocolEngine observer(session.ctx, circuit, EngineRole::Auditor);
  hub_opts.latency = opts.sim.latency;
  hub_opts.label = [&] { return std::string(phase_name(observer.phase())); };
  hub_opts.observe = [&](const RoundOutput& out) {
    if (!observer.finished()) observer.process_round(out.epoch, out.posted);
  };
  std::set<PartyId> ids;
  for (auto* p : cast.parties()) ids.insert(p->id());

  std::vector<std::thread> threads;
  std::vector<std::string> errors(cast.parties().size());
  for (std::size_t i = 0; i < cast.parties().size(); ++i) {
    threads.emplace_back([&, i] {
      try {
        auto* p = cast.parties()[i];
        run_tcp_party(*p, cast.keys().at(p->id()), addr);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
  }
  HubResult served;
  std::string hub_error;
  try {
    served = tcp_hub.serve(ids, hub, hub_opts);
  } catch (const std::exception& e) {
    hub_error = e.what();
  }
  for (auto& t : threads) t.join();
  if (!hub_error.empty()) throw NetError("hub: " + hub_error);
  for (const auto& e : errors) {
    if (!e.empty()) throw NetError("party: " + e);
  }
  ProtocolRun run;
  cast.fill(run);
  run.transcript.header = session_header(session, circuit);
  run.transcript.entries = std::move(served.entries);
  run.metrics = std::move(served.metrics);
  return run;
}

/// Session, offline phase and online phase in one call.
inline ProtocolRun run_protocol(const SessionParams& params, const Circuit& circuit,
                                const std::vector<RingElement>& inputs, const ProtocolOptions& opts = {}) {
  const Session session = make_session(params);
  const auto offline =
      offline_run(session.ctx, session.offline_keys, offline_params_for(circuit, params.servers), session.offline_seeds());
  return run_online(session, circuit, inputs, offline, opts);
}

}  // namespace cessmpc
