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

// STTP decision rules and key escrow. The rules are pure functions of public
// data so servers and auditors evaluate them exactly as the STTP does.

#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include <sodium.h>

#include "cessmpc/he/he.hpp"

namespace cessmpc {

struct Accusation {
  std::uint64_t epoch = 0;  // round whose opening is disputed
  std::uint32_t accuser = 0;
  std::uint32_t accused = 0;
  std::uint32_t item = 0;  // gate index, or output index in the output stage
  Bytes message;           // offending item bytes; empty for a refusal
  Digest expected{};       // hash of the commitment the item must open

  bool refusal() const { return message.empty(); }
};

inline Bytes encode_accusation(const Accusation& a) {
  ByteWriter w;
  w.u64(a.epoch);
  w.u32(a.accuser);
  w.u32(a.accused);
  w.u32(a.item);
  w.blob(a.message);
  w.raw(a.expected);
  return std::move(w).take();
}

inline Accusation decode_accusation(ByteSpan data) {
  ByteReader r(data);
  Accusation a;
  a.epoch = r.u64();
  a.accuser = r.u32();
  a.accused = r.u32();
  a.item = r.u32();
  a.message = r.blob();
  const auto d = r.raw(32);
  std::copy(d.begin(), d.end(), a.expected.begin());
  r.expect_done();
  return a;
}

/// What the board shows for the disputed item: the posted bytes (if any)
/// and the digest of the commitment it had to open.
struct PostedItem {
  std::optional<Bytes> bytes;
  Digest expected{};
};

/// Valid iff the accusation names the posted item (or its absence) and that
/// item fails to open the commitment. A refusal is valid iff nothing was posted.
inline bool validate_accusation(const Accusation& acc, const PostedItem& posted,
                                const std::function<bool(ByteSpan)>& item_verifies) {
  if (acc.expected != posted.expected) return false;
  if (acc.refusal()) return !posted.bytes.has_value();
  if (!posted.bytes || *posted.bytes != acc.message) return false;
  return !item_verifies(acc.message);
}

enum class FlagReason : std::uint8_t {
  BadOpening = 1,       // failed or missing opening (including a valid accusation)
  FalseAccusation = 2,  // accuser of an invalid accusation
  BadReport = 3,        // recovery report rejected
};

inline std::string_view flag_reason_name(FlagReason r) {
  switch (r) {
    case FlagReason::BadOpening: return "bad-opening";
    case FlagReason::FalseAccusation: return "false-accusation";
    case FlagReason::BadReport: return "bad-report";
  }
  return "?";
}

// ---- report resolution --------------------------------------------------------

struct ReportOutcome {
  std::optional<std::size_t> accepted;  // position in the input of an accepted report
  std::vector<std::size_t> flagged;     // reporter ids
  std::size_t checks = 0;               // commitment checks performed
};

/// reports: (reporter id, report bytes or nothing). Identical reports are
/// grouped; groups are checked largest first (ties: lowest reporter). The
/// first passing group is accepted and every other reporter is flagged. If
/// all groups but the last fail, the last one is accepted unchecked: some
/// honest reporter is always live, and honest reports agree, so it must
/// hold the true pair. This keeps the loop within (reporters - 1) checks.
inline ReportOutcome resolve_reports(const std::vector<std::pair<std::size_t, std::optional<Bytes>>>& reports,
                                     const std::function<bool(ByteSpan)>& check) {
  ReportOutcome out;
  struct Group {
    const Bytes* bytes;
    std::vector<std::size_t> positions;
  };
  std::vector<Group> groups;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& [who, bytes] = reports[i];
    if (!bytes) {
      out.flagged.push_back(who);
      continue;
    }
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return *g.bytes == *bytes; });
    if (it == groups.end()) {
      groups.push_back({&*bytes, {i}});
    } else {
      it->positions.push_back(i);
    }
  }
  std::stable_sort(groups.begin(), groups.end(), [&](const Group& a, const Group& b) {
    if (a.positions.size() != b.positions.size()) return a.positions.size() > b.positions.size();
    return reports[a.positions[0]].first < reports[b.positions[0]].first;
  });
  std::optional<std::size_t> winner;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (g + 1 == groups.size()) {
      // every other group already failed: nothing left to compare against
      winner = g;
      break;
    }
    ++out.checks;
    if (check(*groups[g].bytes)) {
      winner = g;
      break;
    }
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (winner && g == *winner) continue;
    for (auto pos : groups[g].positions) out.flagged.push_back(reports[pos].first);
  }
  if (winner) out.accepted = groups[*winner].positions[0];
  std::sort(out.flagged.begin(), out.flagged.end());
  return out;
}

// ---- threshold rule ---------------------------------------------------------------

struct Decision {
  bool abort = false;             // OUT = bottom
  std::vector<std::size_t> release;  // keys to publish, ascending
};

inline Decision sttp_decide(const std::set<std::size_t>& cheat_list, const std::set<std::size_t>& newly_flagged,
                            std::size_t parties) {
  std::set<std::size_t> all = cheat_list;
  all.insert(newly_flagged.begin(), newly_flagged.end());
  Decision d;
  if (parties >= 1 && all.size() + 1 >= parties) {
    d.abort = true;
    return d;
  }
  d.release.assign(newly_flagged.begin(), newly_flagged.end());
  return d;
}

// ---- key release ------------------------------------------------------------------

struct KeyRelease {
  std::uint32_t index = 0;
  FlagReason reason = FlagReason::BadOpening;
  SecretKey sk;
};

inline Bytes encode_key_release(const HeContext& he, const KeyRelease& kr) {
  ByteWriter w;
  w.u32(kr.index);
  w.u8(static_cast<std::uint8_t>(kr.reason));
  write_secret_key(w, he, kr.sk);
  return std::move(w).take();
}

inline KeyRelease decode_key_release(const HeContext& he, ByteSpan data) {
  ByteReader r(data);
  KeyRelease kr;
  kr.index = r.u32();
  const auto reason = r.u8();
  if (reason < 1 || reason > 3) throw DecodeError("key release: unknown reason");
  kr.reason = static_cast<FlagReason>(reason);
  kr.sk = read_secret_key(r, he);
  r.expect_done();
  return kr;
}

/// True iff b - a s is p times a small error, i.e. sk belongs to pk.
inline bool secret_key_matches(const HeContext& he, const PublicKey& pk, const SecretKey& sk) {
  const auto diff = he.sub(pk.b, he.mul(pk.a, sk.s));
  const auto centered = he.to_centered(diff);
  const i128 p = static_cast<i128>(he.p());
  const i128 bound = static_cast<i128>(he.params().eta) * p;
  for (auto c : centered) {
    if (c % p != 0 || c > bound || c < -bound) return false;
  }
  return true;
}

// ---- escrow -----------------------------------------------------------------------

class EscrowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-server decryption keys held by the STTP. At rest the escrow is sealed
/// with secretbox under an operator key.
class Escrow {
 public:
  using SealKey = std::array<std::uint8_t, crypto_secretbox_KEYBYTES>;

  void deposit(std::size_t server, SecretKey sk) { keys_[server] = std::move(sk); }
  bool holds(std::size_t server) const { return keys_.count(server) != 0; }
  const SecretKey& key(std::size_t server) const {
    auto it = keys_.find(server);
    if (it == keys_.end()) throw EscrowError("no escrowed key for server " + std::to_string(server));
    return it->second;
  }
  std::size_t size() const { return keys_.size(); }

  Bytes seal(const HeContext& he, const SealKey& key, const Seed& nonce_seed) const {
    ensure_sodium();
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(keys_.size()));
    for (const auto& [idx, sk] : keys_) {
      w.u32(static_cast<std::uint32_t>(idx));
      write_secret_key(w, he, sk);
    }
    const auto& plain = w.bytes();
    std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> nonce{};
    std::copy_n(nonce_seed.begin(), nonce.size(), nonce.begin());
    Bytes out(nonce.begin(), nonce.end());
    out.resize(nonce.size() + crypto_secretbox_MACBYTES + plain.size());
    crypto_secretbox_easy(out.data() + nonce.size(), plain.data(), plain.size(), nonce.data(), key.data());
    return out;
  }

  static Escrow unseal(const HeContext& he, const SealKey& key, ByteSpan sealed) {
    ensure_sodium();
    if (sealed.size() < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES) throw EscrowError("escrow too short");
    Bytes plain(sealed.size() - crypto_secretbox_NONCEBYTES - crypto_secretbox_MACBYTES);
    if (crypto_secretbox_open_easy(plain.data(), sealed.data() + crypto_secretbox_NONCEBYTES,
                                   sealed.size() - crypto_secretbox_NONCEBYTES, sealed.data(), key.data()) != 0) {
      throw EscrowError("escrow authentication failed (wrong key file?)");
    }
    ByteReader r(plain);
    Escrow e;
    const auto n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto idx = r.u32();
      e.deposit(idx, read_secret_key(r, he));
    }
    r.expect_done();
    return e;
  }

 private:
  std::map<std::size_t, SecretKey> keys_;
};

}  // namespace cessmpc
