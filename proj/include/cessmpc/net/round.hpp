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

// Round sequencer shared by both transports: collects one epoch's signed
// messages, posts the broadcasts to the bulletin and routes the rest.

#pragma once

#include <chrono>
#include <map>
#include <set>
#include <thread>
#include <vector>

#include "cessmpc/net/bulletin.hpp"
#include "cessmpc/net/metrics.hpp"

namespace cessmpc {

struct RoundOutput {
  std::uint64_t epoch = 0;
  std::vector<Message> posted;
  std::map<PartyId, std::vector<Message>> inboxes;
};

class RoundHub {
 public:
  RoundHub(Pki pki, SigningKey hub_key) : bulletin_(std::move(pki)), key_(std::move(hub_key)) {}

  /// Closes `epoch`. `submitted` holds each party's messages in its own
  /// order; `silent` lists parties that missed the deadline.
  RoundOutput close_round(std::uint64_t epoch, const std::map<PartyId, std::vector<Message>>& submitted,
                          const std::set<PartyId>& silent = {}) {
    RoundOutput out;
    out.epoch = epoch;
    std::vector<Message> broadcast;
    std::vector<Message> direct;
    for (const auto& [author, msgs] : submitted) {
      for (const auto& m : msgs) {
        if (m.author != author || m.epoch != epoch) continue;
        if (m.broadcast()) {
          broadcast.push_back(m);
        } else if (bulletin_.pki().verify(m)) {
          direct.push_back(m);
        }
      }
    }
    for (auto id : silent) {
      ByteWriter w;
      w.u32(id);
      broadcast.push_back(sign_submission(key_, kHubId, epoch, {EntryKind::Silent, kBroadcast, std::move(w).take()}));
    }
    out.posted = bulletin_.post_round(epoch, std::move(broadcast));
    std::stable_sort(direct.begin(), direct.end(), [](const Message& a, const Message& b) {
      return std::pair(a.author, a.to) < std::pair(b.author, b.to);
    });
    for (auto& m : direct) out.inboxes[m.to].push_back(std::move(m));
    return out;
  }

  const Bulletin& bulletin() const { return bulletin_; }

 private:
  Bulletin bulletin_;
  SigningKey key_;
};

inline void inject_latency(std::chrono::milliseconds latency) {
  if (latency.count() > 0) std::this_thread::sleep_for(latency);
}

}  // namespace cessmpc
