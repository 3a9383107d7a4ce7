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

#include <span>
#include <string_view>
#include <vector>

#include "cessmpc/net/bulletin.hpp"

namespace cessmpc {

/// A sequential party state machine driven by synchronous rounds.
///
/// step(e) first consumes round e-1 (its bulletin entries and the private
/// messages addressed to this party), then returns round e's submissions.
class Participant {
 public:
  virtual ~Participant() = default;

  virtual PartyId id() const = 0;
  virtual std::vector<Submission> step(std::uint64_t epoch, std::span<const Message> previous,
                                       std::span<const Message> inbox) = 0;
  virtual bool finished() const = 0;

  /// Phase the party is in after its last step; used to attribute timings.
  virtual std::string_view phase_label() const { return ""; }
};

}  // namespace cessmpc
