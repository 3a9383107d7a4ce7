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

// Honest server, STTP and client state machines.

#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "cessmpc/net/participant.hpp"
#include "cessmpc/online/engine.hpp"
#include "cessmpc/online/session.hpp"

namespace cessmpc {

class ServerNode : public Participant {
 public:
  ServerNode(CessContextPtr ctx, const Circuit& circuit, std::size_t index, const OfflineBundle& bundle, Seed seed)
      : engine_(std::move(ctx), circuit, EngineRole::Server, index), index_(index), seed_(seed) {
    engine_.attach_bundle(bundle);
  }

  PartyId id() const override { return static_cast<PartyId>(index_); }
  bool finished() const override { return engine_.finished() || retired_; }
  std::string_view phase_label() const override { return phase_name(engine_.phase()); }

  std::vector<Submission> step(std::uint64_t epoch, std::span<const Message> previous,
                               std::span<const Message> inbox) override {
    if (epoch == 0 || finished()) return {};
    if (engine_.phase() == Phase::Setup) {
      for (const auto& m : inbox) {
        if (m.author == kClientId && m.kind == EntryKind::InputShares) {
          engine_.attach_inputs(decode_input_delivery(engine_.context(), m.payload));
        }
      }
    }
    engine_.process_round(epoch - 1, previous);
    if (!engine_.is_live(index_)) {
      // removed from the computation; nothing more to contribute
      retired_ = true;
      return {};
    }
    return respond(epoch);
  }

  const ProtocolEngine& engine() const { return engine_; }

 protected:
  std::vector<Submission> respond(std::uint64_t epoch) const {
    std::vector<Submission> out;
    switch (engine_.phase()) {
      case Phase::Open:
        out.push_back({engine_.open_kind(), kBroadcast, encode_item_batch(engine_.make_open_items(seed_, epoch))});
        break;
      case Phase::Accuse:
        for (const auto& a : engine_.make_accusations()) out.push_back({EntryKind::Accuse, kBroadcast, encode_accusation(a)});
        break;
      case Phase::Report: out.push_back({EntryKind::Report, kBroadcast, encode_report(engine_.make_report())}); break;
      default: break;
    }
    return out;
  }

  ProtocolEngine engine_;
  std::size_t index_;
  Seed seed_;
  bool retired_ = false;
};

class SttpNode : public Participant {
 public:
  SttpNode(CessContextPtr ctx, const Circuit& circuit, Escrow escrow)
      : engine_(std::move(ctx), circuit, EngineRole::Sttp), escrow_(std::move(escrow)) {}

  PartyId id() const override { return kSttpId; }
  bool finished() const override { return engine_.finished(); }
  std::string_view phase_label() const override { return phase_name(engine_.phase()); }

  std::vector<Submission> step(std::uint64_t epoch, std::span<const Message> previous,
                               std::span<const Message>) override {
    if (epoch == 0 || finished()) return {};
    engine_.process_round(epoch - 1, previous);
    std::vector<Submission> out;
    if (engine_.phase() == Phase::Decide) {
      const auto d = engine_.decision();
      if (d.abort) {
        out.push_back({EntryKind::Output, kBroadcast, encode_output_record(engine_.expected_output())});
      } else {
        for (auto k : d.release) {
          if (auto s = release_key(k)) out.push_back(std::move(*s));
        }
      }
    } else if (engine_.phase() == Phase::Final) {
      out.push_back({EntryKind::Output, kBroadcast, encode_output_record(engine_.expected_output())});
    }
    return out;
  }

  /// Publishes sk_k. Refused unless the current decision flags k; a repeat
  /// request for a key already on the board yields nothing.
  std::optional<Submission> release_key(std::size_t k) {
    if (engine_.released_keys().count(k) || released_.count(k)) return std::nullopt;
    const auto d = engine_.decision();
    if (engine_.phase() != Phase::Decide || d.abort ||
        std::find(d.release.begin(), d.release.end(), k) == d.release.end()) {
      throw ProtocolError("key release for server " + std::to_string(k) + " without a valid accusation");
    }
    released_.insert(k);
    KeyRelease kr{static_cast<std::uint32_t>(k), engine_.flag_reason(k), escrow_.key(k)};
    return Submission{EntryKind::KeyRelease, kBroadcast, encode_key_release(*engine_.context().he, kr)};
  }

  const ProtocolEngine& engine() const { return engine_; }

 private:
  ProtocolEngine engine_;
  Escrow escrow_;
  std::set<std::size_t> released_;
};

/// Shares the inputs at setup and collects the posted output.
class ClientNode : public Participant {
 public:
  ClientNode(CessContextPtr ctx, const Circuit& circuit, std::vector<RingElement> inputs, ClientPackage package,
             Seed seed)
      : ctx_(std::move(ctx)),
        circuit_(circuit),
        plan_(plan_circuit(circuit_)),
        inputs_(std::move(inputs)),
        package_(std::move(package)),
        seed_(seed) {
    if (inputs_.size() != plan_.inputs.size()) throw std::invalid_argument("client: wrong number of inputs");
    if (package_.mask_shares.size() < inputs_.size()) throw std::invalid_argument("client: not enough input masks");
    if (package_.triple_comms.size() < plan_.triples()) throw std::invalid_argument("client: not enough triples");
  }

  PartyId id() const override { return kClientId; }
  bool finished() const override { return result_.has_value(); }

  std::vector<Submission> step(std::uint64_t epoch, std::span<const Message> previous,
                               std::span<const Message>) override {
    if (epoch == 0) return share_inputs();
    for (const auto& e : previous) {
      if (e.author == kSttpId && e.kind == EntryKind::Output && !result_) {
        result_ = decode_output_record(ctx_->ring, e.payload);
      }
    }
    return {};
  }

  const std::optional<OutputRecord>& result() const { return result_; }

 private:
  std::vector<Submission> share_inputs() {
    const std::size_t n = ctx_->parties();
    SeedStream rng(derive_seed(seed_, "client-inputs"));
    SetupCommitments comms;
    SetupDigests digests;
    std::vector<InputDelivery> deliveries(n);
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      const auto sharing = client_input_share(*ctx_, inputs_[i], package_.mask_shares[i], rng);
      const std::uint64_t id = plan_.inputs[i];
      comms.objects.emplace_back(id, sharing.pub->comms);
      digests.emplace_back(id, digest_ciphertexts(*ctx_, *sharing.pub));
      for (std::size_t j = 0; j < n; ++j) {
        deliveries[j].ids.push_back(id);
        deliveries[j].shares.push_back(sharing.shares[j]);
        deliveries[j].pubs.push_back(*sharing.pub);
      }
    }
    for (std::size_t t = 0; t < plan_.triples(); ++t) {
      for (std::size_t k = 0; k < 3; ++k) {
        const auto id = triple_object(circuit_, t, k);
        comms.objects.emplace_back(id, package_.triple_comms[t][k]);
        digests.emplace_back(id, package_.triple_digests[t][k]);
      }
    }
    std::vector<Submission> out;
    out.push_back({EntryKind::Commit, kBroadcast, encode_setup_commitments(*ctx_->ck, comms)});
    out.push_back({EntryKind::Ciphertext, kBroadcast, encode_setup_digests(digests)});
    for (std::size_t j = 0; j < n; ++j) {
      out.push_back({EntryKind::InputShares, static_cast<PartyId>(j), encode_input_delivery(*ctx_, deliveries[j])});
    }
    return out;
  }

  CessContextPtr ctx_;
  Circuit circuit_;
  CircuitPlan plan_;
  std::vector<RingElement> inputs_;
  ClientPackage package_;
  Seed seed_;
  std::optional<OutputRecord> result_;
};

/// Replays the board with commitments only; never posts.
class AuditorNode : public Participant {
 public:
  AuditorNode(CessContextPtr ctx, const Circuit& circuit) : engine_(std::move(ctx), circuit, EngineRole::Auditor) {}

  PartyId id() const override { return kHubId; }
  bool finished() const override { return engine_.finished(); }
  std::vector<Submission> step(std::uint64_t epoch, std::span<const Message> previous,
                               std::span<const Message>) override {
    if (epoch > 0 && !finished()) engine_.process_round(epoch - 1, previous);
    return {};
  }
  const ProtocolEngine& engine() const { return engine_; }

 private:
  ProtocolEngine engine_;
};

}  // namespace cessmpc
