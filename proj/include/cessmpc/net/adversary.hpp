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

// Scripted misbehaviour for test and benchmark runs. A corrupted server runs
// the honest state machine and rewrites what it is about to post.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cessmpc/online/nodes.hpp"

namespace cessmpc {

enum class Behaviour : std::uint8_t {
  Honest,
  WrongOpen,        // epsilon of one gate shifted by `offset`
  WrongRandomness,  // epsilon's commitment randomness perturbed
  Silent,           // one gate's item left out
  WrongReport,      // recovery report with a shifted share
  RefuseOutput,     // no output proof
  FalseAccusation,  // accuses `target` with that server's honest item
};

struct AdversarySpec {
  std::size_t server = 0;
  Behaviour behaviour = Behaviour::Honest;
  std::optional<std::uint32_t> gate;  // unset: first multiplication opened
  std::int64_t offset = 1;
  std::size_t target = 0;
};

inline std::string_view behaviour_name(Behaviour b) {
  switch (b) {
    case Behaviour::Honest: return "honest";
    case Behaviour::WrongOpen: return "wrong_open";
    case Behaviour::WrongRandomness: return "wrong_randomness";
    case Behaviour::Silent: return "silent";
    case Behaviour::WrongReport: return "wrong_report";
    case Behaviour::RefuseOutput: return "refuse_output";
    case Behaviour::FalseAccusation: return "false_accusation";
  }
  return "?";
}

inline Behaviour parse_behaviour(std::string_view s) {
  for (auto b : {Behaviour::Honest, Behaviour::WrongOpen, Behaviour::WrongRandomness, Behaviour::Silent,
                 Behaviour::WrongReport, Behaviour::RefuseOutput, Behaviour::FalseAccusation}) {
    if (behaviour_name(b) == s) return b;
  }
  throw std::invalid_argument("unknown behaviour: " + std::string(s));
}

class AdversarialServer : public ServerNode {
 public:
  AdversarialServer(CessContextPtr ctx, const Circuit& circuit, const OfflineBundle& bundle, Seed seed,
                    AdversarySpec spec)
      : ServerNode(std::move(ctx), circuit, spec.server, bundle, seed), spec_(spec) {}

  std::vector<Submission> step(std::uint64_t epoch, std::span<const Message> previous,
                               std::span<const Message> inbox) override {
    auto out = ServerNode::step(epoch, previous, inbox);
    if (fired_ || finished()) return out;
    switch (spec_.behaviour) {
      case Behaviour::Honest: break;
      case Behaviour::WrongOpen:
      case Behaviour::WrongRandomness:
      case Behaviour::Silent: tamper_open(out); break;
      case Behaviour::WrongReport: tamper_report(out); break;
      case Behaviour::RefuseOutput:
        if (std::erase_if(out, [](const Submission& s) { return s.kind == EntryKind::LinkedOpen; }) > 0) fired_ = true;
        break;
      case Behaviour::FalseAccusation: accuse(epoch, out); break;
    }
    return out;
  }

  bool fired() const { return fired_; }

 private:
  void tamper_open(std::vector<Submission>& out) {
    for (auto& s : out) {
      if (s.kind != EntryKind::Open) continue;
      auto batch = decode_item_batch(s.payload);
      for (auto it = batch.items.begin(); it != batch.items.end(); ++it) {
        const auto gate = item_key(*it);
        if (spec_.gate && *spec_.gate != gate) continue;
        if (spec_.behaviour == Behaviour::Silent) {
          batch.items.erase(it);
        } else {
          auto m = decode_masked_open(engine_.context(), *it);
          if (spec_.behaviour == Behaviour::WrongOpen) {
            m.eps.value += shift(m.eps.value.context(), spec_.offset);
          } else {
            m.eps.rand.r[0] += shift(m.eps.rand.r[0].context(), 1);
          }
          *it = encode_masked_open(m);
        }
        s.payload = encode_item_batch(batch);
        fired_ = true;
        return;
      }
    }
  }

  void tamper_report(std::vector<Submission>& out) {
    for (auto& s : out) {
      if (s.kind != EntryKind::Report) continue;
      auto bodies = decode_report(s.payload);
      if (bodies.empty()) continue;
      auto pairs = decode_report_body(engine_.context(), bodies[0].second);
      if (pairs.empty()) continue;
      pairs[0].pair.value += shift(pairs[0].pair.value.context(), spec_.offset);
      bodies[0].second = encode_report_body(pairs);
      s.payload = encode_report(bodies);
      fired_ = true;
      return;
    }
  }

  // Accuses the target of the previous open round, quoting its item verbatim.
  void accuse(std::uint64_t epoch, std::vector<Submission>& out) {
    const auto& rec = engine_.last_open();
    if (!rec || rec->epoch + 1 != epoch) return;
    for (const auto& [key, item] : rec->items) {
      if (key.first != spec_.target || !item.ok || !item.bytes) continue;
      if (spec_.gate && *spec_.gate != key.second) continue;
      Accusation a;
      a.epoch = rec->epoch;
      a.accuser = static_cast<std::uint32_t>(index_);
      a.accused = static_cast<std::uint32_t>(spec_.target);
      a.item = key.second;
      a.message = *item.bytes;
      a.expected = item.expected;
      out.push_back({EntryKind::Accuse, kBroadcast, encode_accusation(a)});
      fired_ = true;
      return;
    }
  }

  static RingElement shift(const RingPtr& ring, std::int64_t offset) {
    const u64 p = ring->q();
    const u64 mag = static_cast<u64>(offset < 0 ? -offset : offset) % p;
    return RingElement::constant(ring, offset < 0 ? (p - mag) % p : mag);
  }

  AdversarySpec spec_;
  bool fired_ = false;
};

}  // namespace cessmpc
