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

// Payload codecs for the online phase.

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cessmpc/cess/cess.hpp"
#include "cessmpc/commit/linked_open.hpp"

namespace cessmpc {

/// One server's masked differences for one multiplication gate.
struct MaskedOpen {
  std::uint32_t gate = 0;
  ShareState eps;    // x_j - a_j
  ShareState delta;  // y_j - b_j
};

inline Bytes encode_masked_open(const MaskedOpen& m) {
  ByteWriter w;
  w.u32(m.gate);
  write_share_state(w, m.eps);
  write_share_state(w, m.delta);
  return std::move(w).take();
}

inline MaskedOpen decode_masked_open(const CessContext& ctx, ByteSpan data) {
  ByteReader r(data);
  MaskedOpen m;
  m.gate = r.u32();
  m.eps = read_share_state(r, ctx);
  m.delta = read_share_state(r, ctx);
  r.expect_done();
  return m;
}

struct OutputOpen {
  std::uint32_t index = 0;
  LinkedOpening proof;
};

inline Bytes encode_output_open(const CommitKey& ck, const OutputOpen& o) {
  ByteWriter w;
  w.u32(o.index);
  write_linked_opening(w, ck, o.proof);
  return std::move(w).take();
}

inline OutputOpen decode_output_open(const CommitKey& ck, ByteSpan data) {
  ByteReader r(data);
  OutputOpen o;
  o.index = r.u32();
  o.proof = read_linked_opening(r, ck);
  r.expect_done();
  return o;
}

/// Leading u32 of an item: the gate or output index it answers.
inline std::uint32_t item_key(ByteSpan item) {
  ByteReader r(item);
  return r.u32();
}

/// OPEN / LINKED_OPEN payload: all of one server's items for one stage.
struct ItemBatch {
  std::uint32_t stage = 0;
  std::vector<Bytes> items;
};

inline Bytes encode_item_batch(const ItemBatch& b) {
  ByteWriter w;
  w.u32(b.stage);
  w.u32(static_cast<std::uint32_t>(b.items.size()));
  for (const auto& it : b.items) w.blob(it);
  return std::move(w).take();
}

inline ItemBatch decode_item_batch(ByteSpan data) {
  ByteReader r(data);
  ItemBatch b;
  b.stage = r.u32();
  const auto n = r.u32();
  if (n > r.remaining() / 4) throw DecodeError("item batch: bad count");
  for (std::uint32_t i = 0; i < n; ++i) b.items.push_back(r.blob());
  r.expect_done();
  return b;
}

/// A decrypted (share, randomness) pair for one live object.
struct ObjectPair {
  std::uint64_t id = 0;
  ShareState pair;
};

inline Bytes encode_report_body(const std::vector<ObjectPair>& pairs) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(pairs.size()));
  for (const auto& p : pairs) {
    w.u64(p.id);
    write_share_state(w, p.pair);
  }
  return std::move(w).take();
}

inline std::vector<ObjectPair> decode_report_body(const CessContext& ctx, ByteSpan data) {
  ByteReader r(data);
  const auto n = r.u32();
  if (n > r.remaining() / 8) throw DecodeError("report: bad count");
  std::vector<ObjectPair> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    ObjectPair p;
    p.id = r.u64();
    p.pair = read_share_state(r, ctx);
    out.push_back(std::move(p));
  }
  r.expect_done();
  return out;
}

/// REPORT payload: one body per recovery target.
inline Bytes encode_report(const std::vector<std::pair<std::uint32_t, Bytes>>& bodies) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(bodies.size()));
  for (const auto& [target, body] : bodies) {
    w.u32(target);
    w.blob(body);
  }
  return std::move(w).take();
}

inline std::vector<std::pair<std::uint32_t, Bytes>> decode_report(ByteSpan data) {
  ByteReader r(data);
  const auto n = r.u32();
  if (n > r.remaining() / 8) throw DecodeError("report: bad target count");
  std::vector<std::pair<std::uint32_t, Bytes>> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto target = r.u32();
    out.emplace_back(target, r.blob());
  }
  r.expect_done();
  return out;
}

/// OUTPUT payload posted by the STTP.
struct OutputRecord {
  bool ok = false;
  std::vector<std::uint32_t> cheaters;
  std::vector<RingElement> values;

  bool operator==(const OutputRecord&) const = default;
};

inline Bytes encode_output_record(const OutputRecord& o) {
  ByteWriter w;
  w.u8(o.ok ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(o.cheaters.size()));
  for (auto c : o.cheaters) w.u32(c);
  w.u32(static_cast<std::uint32_t>(o.values.size()));
  for (const auto& v : o.values) write_ring(w, v);
  return std::move(w).take();
}

inline OutputRecord decode_output_record(const RingPtr& ring, ByteSpan data) {
  ByteReader r(data);
  OutputRecord o;
  const auto ok = r.u8();
  if (ok > 1) throw DecodeError("output: bad status");
  o.ok = ok == 1;
  const auto nc = r.u32();
  if (nc > r.remaining() / 4) throw DecodeError("output: bad cheater count");
  for (std::uint32_t i = 0; i < nc; ++i) o.cheaters.push_back(r.u32());
  const auto nv = r.u32();
  if (nv > r.remaining() / 8) throw DecodeError("output: bad value count");
  for (std::uint32_t i = 0; i < nv; ++i) o.values.push_back(read_ring(r, ring));
  r.expect_done();
  return o;
}

/// COMMIT payload: the commitment arrays of every input wire and triple item.
struct SetupCommitments {
  std::vector<std::pair<std::uint64_t, std::vector<Commitment>>> objects;
};

inline Bytes encode_setup_commitments(const CommitKey& ck, const SetupCommitments& s) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(s.objects.size()));
  for (const auto& [id, comms] : s.objects) {
    w.u64(id);
    w.u32(static_cast<std::uint32_t>(comms.size()));
    for (const auto& c : comms) write_commitment(w, ck, c);
  }
  return std::move(w).take();
}

inline SetupCommitments decode_setup_commitments(const CommitKey& ck, std::size_t parties, ByteSpan data) {
  ByteReader r(data);
  SetupCommitments s;
  const auto n = r.u32();
  if (n > r.remaining() / 12) throw DecodeError("setup commitments: bad count");
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto id = r.u64();
    const auto m = r.u32();
    if (m != parties) throw DecodeError("setup commitments: party count mismatch");
    std::vector<Commitment> comms;
    for (std::uint32_t j = 0; j < m; ++j) comms.push_back(read_commitment(r, ck));
    s.objects.emplace_back(id, std::move(comms));
  }
  r.expect_done();
  return s;
}

/// CIPHERTEXT payload: a digest of every object's per-server ciphertexts.
using SetupDigests = std::vector<std::pair<std::uint64_t, Digest>>;

inline Bytes encode_setup_digests(const SetupDigests& d) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(d.size()));
  for (const auto& [id, h] : d) {
    w.u64(id);
    w.raw(h);
  }
  return std::move(w).take();
}

inline SetupDigests decode_setup_digests(ByteSpan data) {
  ByteReader r(data);
  SetupDigests d;
  const auto n = r.u32();
  if (n > r.remaining() / 40) throw DecodeError("setup digests: bad count");
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto id = r.u64();
    Digest h{};
    const auto raw = r.raw(32);
    std::copy(raw.begin(), raw.end(), h.begin());
    d.emplace_back(id, h);
  }
  r.expect_done();
  return d;
}

/// INPUT_SHARES payload (private, client to server j): j's share of each
/// input wire plus that wire's full public half.
struct InputDelivery {
  std::vector<std::uint64_t> ids;
  std::vector<ShareState> shares;
  std::vector<WirePublic> pubs;
};

inline Bytes encode_input_delivery(const CessContext& ctx, const InputDelivery& d) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(d.ids.size()));
  for (std::size_t i = 0; i < d.ids.size(); ++i) {
    w.u64(d.ids[i]);
    write_share_state(w, d.shares[i]);
    write_wire_public(w, ctx, d.pubs[i]);
  }
  return std::move(w).take();
}

inline InputDelivery decode_input_delivery(const CessContext& ctx, ByteSpan data) {
  ByteReader r(data);
  InputDelivery d;
  const auto n = r.u32();
  if (n > r.remaining() / 8) throw DecodeError("input delivery: bad count");
  for (std::uint32_t i = 0; i < n; ++i) {
    d.ids.push_back(r.u64());
    d.shares.push_back(read_share_state(r, ctx));
    d.pubs.push_back(read_wire_public(r, ctx));
  }
  r.expect_done();
  return d;
}

}  // namespace cessmpc
