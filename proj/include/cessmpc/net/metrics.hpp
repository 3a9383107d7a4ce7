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

#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cessmpc/net/bulletin.hpp"

namespace cessmpc {

struct PartyCounters {
  std::uint64_t bytes_sent = 0;
  std::uint64_t messages = 0;
  std::size_t rounds = 0;  // rounds the party took part in
};

struct PhaseCounters {
  double seconds = 0;
  std::size_t rounds = 0;
};

struct RoundTiming {
  std::string phase;
  double seconds = 0;
};

/// A recovery run cut at the first accusation: the rounds before it, the
/// accuse/decide/report rounds, and everything after the last report.
struct RecoverySplit {
  double before = 0;
  double recovery = 0;
  double completion = 0;
};

struct Metrics {
  std::map<PartyId, PartyCounters> parties;
  std::map<std::string, PhaseCounters> phases;
  std::vector<RoundTiming> timeline;
  std::size_t rounds = 0;
  double seconds = 0;

  std::uint64_t total_bytes() const {
    std::uint64_t s = 0;
    for (const auto& [id, c] : parties) s += c.bytes_sent;
    return s;
  }

  /// Wall-clock of every round except setup.
  double online_seconds() const {
    double s = 0;
    for (const auto& [name, c] : phases) {
      if (name != "setup") s += c.seconds;
    }
    return s;
  }

  void count_message(const Message& m) {
    auto& c = parties[m.author];
    c.bytes_sent += encode_message(m).size();
    ++c.messages;
  }

  void count_round(const std::string& phase, double secs) {
    auto& p = phases[phase];
    p.seconds += secs;
    ++p.rounds;
    ++rounds;
    seconds += secs;
    timeline.push_back({phase, secs});
  }

  Metrics& operator+=(const Metrics& o) {
    for (const auto& [id, c] : o.parties) {
      auto& mine = parties[id];
      mine.bytes_sent += c.bytes_sent;
      mine.messages += c.messages;
      mine.rounds += c.rounds;
    }
    for (const auto& [name, c] : o.phases) {
      phases[name].seconds += c.seconds;
      phases[name].rounds += c.rounds;
    }
    timeline.insert(timeline.end(), o.timeline.begin(), o.timeline.end());
    rounds += o.rounds;
    seconds += o.seconds;
    return *this;
  }

  RecoverySplit recovery_split() const {
    RecoverySplit r;
    std::size_t first = timeline.size(), last = timeline.size();
    for (std::size_t i = 0; i < timeline.size(); ++i) {
      const auto& ph = timeline[i].phase;
      if (ph == "accuse" || ph == "decide" || ph == "report") {
        if (first == timeline.size()) first = i;
        last = i;
      }
    }
    for (std::size_t i = 0; i < timeline.size(); ++i) {
      const auto& t = timeline[i];
      if (t.phase == "setup") continue;
      if (i < first) {
        r.before += t.seconds;
      } else if (i <= last) {
        r.recovery += t.seconds;
      } else {
        r.completion += t.seconds;
      }
    }
    return r;
  }
};

inline nlohmann::json metrics_json(const Metrics& m) {
  using nlohmann::json;
  json parties = json::object();
  for (const auto& [id, c] : m.parties) {
    parties[party_name(id)] = {{"bytes_sent", c.bytes_sent}, {"messages", c.messages}, {"rounds", c.rounds}};
  }
  json phases = json::object();
  for (const auto& [name, c] : m.phases) phases[name] = {{"seconds", c.seconds}, {"rounds", c.rounds}};
  json timeline = json::array();
  for (const auto& t : m.timeline) timeline.push_back({{"phase", t.phase}, {"seconds", t.seconds}});
  return json{{"rounds", m.rounds},
              {"bytes_total", m.total_bytes()},
              {"seconds", m.seconds},
              {"online_seconds", m.online_seconds()},
              {"parties", parties},
              {"phases", phases},
              {"timeline", timeline}};
}

}  // namespace cessmpc
