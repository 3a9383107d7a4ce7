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

// In-process transport: every party is stepped in id order within one thread.

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <vector>

#include "cessmpc/net/participant.hpp"
#include "cessmpc/net/round.hpp"

namespace cessmpc {

struct SimOptions {
  std::chrono::milliseconds latency{0};
  std::uint64_t max_rounds = 10000;
};

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimResult {
  std::vector<Message> entries;
  Metrics metrics;
  std::uint64_t epochs = 0;
};

/// Runs until every participant reports finished. `keys` signs for each id;
/// `clock` names the participant whose phase labels the round timings.
inline SimResult run_sim(std::vector<Participant*> parties, const std::map<PartyId, SigningKey>& keys,
                         RoundHub& hub, PartyId clock, const SimOptions& opts = {}) {
  std::sort(parties.begin(), parties.end(), [](auto* a, auto* b) { return a->id() < b->id(); });
  SimResult res;
  RoundOutput last;
  for (std::uint64_t epoch = 0;; ++epoch) {
    if (epoch >= opts.max_rounds) throw SimError("protocol did not finish within the round limit");
    bool active = false;
    const auto t0 = std::chrono::steady_clock::now();
    std::map<PartyId, std::vector<Message>> submitted;
    std::string phase;
    for (auto* p : parties) {
      if (p->finished()) continue;
      active = true;
      static const std::vector<Message> kNone;
      auto it = last.inboxes.find(p->id());
      const auto& inbox = it == last.inboxes.end() ? kNone : it->second;
      auto subs = p->step(epoch, last.posted, inbox);
      ++res.metrics.parties[p->id()].rounds;
      if (p->id() == clock) phase = p->phase_label();
      auto& signed_msgs = submitted[p->id()];
      for (auto& s : subs) {
        signed_msgs.push_back(sign_submission(keys.at(p->id()), p->id(), epoch, std::move(s)));
        res.metrics.count_message(signed_msgs.back());
      }
    }
    if (!active) {
      res.epochs = epoch;
      break;
    }
    last = hub.close_round(epoch, submitted);
    inject_latency(opts.latency);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.metrics.count_round(phase.empty() ? (epoch == 0 ? "setup" : "done") : phase, secs);
  }
  res.entries = hub.bulletin().entries();
  return res;
}

}  // namespace cessmpc
