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

// Signed bulletin entries, the simulated PKI and the transcript file.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cessmpc/common/bytes.hpp"
#include "cessmpc/common/crypto.hpp"

namespace cessmpc {

using PartyId = std::uint32_t;

// Servers take ids 0..n-1.
inline constexpr PartyId kSttpId = 1000;
inline constexpr PartyId kClientId = 1001;
inline constexpr PartyId kHubId = 1002;
inline constexpr PartyId kBroadcast = 0xffffffffu;

inline std::string party_name(PartyId id) {
  if (id == kSttpId) return "sttp";
  if (id == kClientId) return "client";
  if (id == kHubId) return "hub";
  return "server" + std::to_string(id);
}

enum class EntryKind : std::uint8_t {
  Commit = 1,
  Ciphertext = 2,
  Open = 3,
  LinkedOpen = 4,
  Accuse = 5,
  KeyRelease = 6,
  Report = 7,
  Output = 8,
  Silent = 9,        // posted by the sequencer when a party misses the round deadline
  InputShares = 10,  // private: client to one server
};

inline std::string_view kind_name(EntryKind k) {
  switch (k) {
    case EntryKind::Commit: return "COMMIT";
    case EntryKind::Ciphertext: return "CIPHERTEXT";
    case EntryKind::Open: return "OPEN";
    case EntryKind::LinkedOpen: return "LINKED_OPEN";
    case EntryKind::Accuse: return "ACCUSE";
    case EntryKind::KeyRelease: return "KEY_RELEASE";
    case EntryKind::Report: return "REPORT";
    case EntryKind::Output: return "OUTPUT";
    case EntryKind::Silent: return "SILENT";
    case EntryKind::InputShares: return "INPUT_SHARES";
  }
  return "?";
}

inline bool known_kind(std::uint8_t k) { return k >= 1 && k <= 10; }

/// One round message. Broadcasts become bulletin entries (seq assigned by the
/// board); private messages carry a receiver and never reach the transcript.
struct Message {
  std::uint64_t epoch = 0;
  std::uint64_t seq = 0;
  PartyId author = 0;
  PartyId to = kBroadcast;
  EntryKind kind = EntryKind::Commit;
  Bytes payload;
  SignatureBytes signature{};

  bool broadcast() const { return to == kBroadcast; }
  bool operator==(const Message&) const = default;
};

using BulletinEntry = Message;

/// Unsigned submission produced by a party state machine.
struct Submission {
  EntryKind kind = EntryKind::Commit;
  PartyId to = kBroadcast;
  Bytes payload;
};

inline Bytes signing_message(std::uint64_t epoch, PartyId to, EntryKind kind, ByteSpan payload) {
  ByteWriter w;
  w.str("cessmpc-entry-v1");
  w.u64(epoch);
  w.u32(to);
  w.u8(static_cast<std::uint8_t>(kind));
  const auto h = sha256(payload);
  w.raw(h);
  return std::move(w).take();
}

inline Message sign_submission(const SigningKey& key, PartyId author, std::uint64_t epoch, Submission s) {
  Message m;
  m.epoch = epoch;
  m.author = author;
  m.to = s.to;
  m.kind = s.kind;
  m.payload = std::move(s.payload);
  m.signature = key.sign(signing_message(epoch, m.to, m.kind, m.payload));
  return m;
}

/// Trusted setup map from party id to signing key.
class Pki {
 public:
  void add(PartyId id, const PublicKeyBytes& pk) { keys_[id] = pk; }
  bool knows(PartyId id) const { return keys_.count(id) != 0; }
  const std::map<PartyId, PublicKeyBytes>& keys() const { return keys_; }

  bool verify(const Message& m) const {
    auto it = keys_.find(m.author);
    if (it == keys_.end()) return false;
    return verify_signature(it->second, signing_message(m.epoch, m.to, m.kind, m.payload), m.signature);
  }

 private:
  std::map<PartyId, PublicKeyBytes> keys_;
};

class BulletinError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only, totally ordered log. Every reader sees the same sequence.
class Bulletin {
 public:
  explicit Bulletin(Pki pki) : pki_(std::move(pki)) {}

  /// Appends one round in author order; within an author, submission order.
  /// Entries with bad signatures, unknown authors or a stale epoch are refused.
  std::vector<Message> post_round(std::uint64_t epoch, std::vector<Message> batch) {
    if (!entries_.empty() && epoch <= entries_.back().epoch) throw BulletinError("epoch must increase");
    std::stable_sort(batch.begin(), batch.end(), [](const Message& a, const Message& b) { return a.author < b.author; });
    std::vector<Message> accepted;
    for (auto& m : batch) {
      if (!m.broadcast() || m.epoch != epoch || !pki_.verify(m)) {
        ++refused_;
        continue;
      }
      m.seq = entries_.size();
      entries_.push_back(m);
      accepted.push_back(std::move(m));
    }
    return accepted;
  }

  std::vector<Message> read_from(std::uint64_t epoch) const {
    std::vector<Message> out;
    for (const auto& e : entries_) {
      if (e.epoch >= epoch) out.push_back(e);
    }
    return out;
  }

  const std::vector<Message>& entries() const { return entries_; }
  const Pki& pki() const { return pki_; }
  std::size_t refused() const { return refused_; }

 private:
  Pki pki_;
  std::vector<Message> entries_;
  std::size_t refused_ = 0;
};

// ---- wire and file encoding ---------------------------------------------------

inline void write_message(ByteWriter& w, const Message& m) {
  w.u64(m.epoch);
  w.u64(m.seq);
  w.u32(m.author);
  w.u32(m.to);
  w.u8(static_cast<std::uint8_t>(m.kind));
  w.blob(m.payload);
  w.raw(m.signature);
}

inline Message read_message(ByteReader& r) {
  Message m;
  m.epoch = r.u64();
  m.seq = r.u64();
  m.author = r.u32();
  m.to = r.u32();
  const auto kind = r.u8();
  if (!known_kind(kind)) throw DecodeError("unknown entry kind");
  m.kind = static_cast<EntryKind>(kind);
  m.payload = r.blob();
  const auto sig = r.raw(m.signature.size());
  std::copy(sig.begin(), sig.end(), m.signature.begin());
  return m;
}

inline Bytes encode_message(const Message& m) {
  ByteWriter w;
  write_message(w, m);
  return std::move(w).take();
}

inline Message decode_message(ByteSpan data) {
  ByteReader r(data);
  auto m = read_message(r);
  r.expect_done();
  return m;
}

/// Length-prefixed frames: the session header, then entries in bulletin order.
struct Transcript {
  Bytes header;
  std::vector<Message> entries;

  Bytes encode() const {
    Bytes out;
    put_frame(out, header);
    for (const auto& e : entries) put_frame(out, encode_message(e));
    return out;
  }

  static Transcript decode(ByteSpan data) {
    auto frames = split_frames(data);
    if (frames.empty()) throw DecodeError("transcript: missing header frame");
    Transcript t;
    t.header = std::move(frames[0]);
    for (std::size_t i = 1; i < frames.size(); ++i) t.entries.push_back(decode_message(frames[i]));
    return t;
  }

  Digest digest() const { return sha256(encode()); }
};

inline void save_transcript(const std::string& path, const Transcript& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const auto bytes = t.encode();
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline Transcript load_transcript(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Transcript::decode(bytes);
}

}  // namespace cessmpc
