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

// Preprocessing run by n semi-honest offline parties sharing one HE key.
// Each item (a random mask, or one of a/b/d per triple) is produced as:
//
//   party i samples a row W_i (t columns) and y_i, broadcasts
//     Enc(W_i), Enc(y_i), Comm(y_i)
//   Enc(W) = sum_i Enc(W_i);  Enc([v]_j) = derive_encrypted_share(Enc(W), j)
//   m_j = DistDec(Enc(y_j) - Enc([v]_j)),  party j keeps y_j - m_j
//
// Triples finish with c = d + DistDec(Enc(a) * Enc(b) - Enc(d)).
// Items are processed one at a time so memory stays proportional to the
// output bundles.

#pragma once

#include <chrono>
#include <fstream>
#include <string>
#include <vector>

#include "cessmpc/cess/cess.hpp"

namespace cessmpc {

enum class OfflineMode : std::uint8_t { Additive = 0, Literal = 1 };

struct OfflineParams {
  std::size_t parties = 3;
  std::size_t masks = 1;    // I
  std::size_t triples = 1;  // M
  std::size_t width = 0;    // t; 0 selects t = parties
  OfflineMode mode = OfflineMode::Additive;

  std::size_t columns() const { return width == 0 ? parties : width; }
  std::size_t items() const { return masks + 3 * triples; }

  void check() const {
    if (parties < 1) throw std::invalid_argument("offline: need at least one party");
    if (masks < 1 || triples < 1) throw std::invalid_argument("offline: I and M must be positive");
    if (columns() < 1) throw std::invalid_argument("offline: width must be positive");
    if (mode == OfflineMode::Additive && columns() != parties) {
      throw std::invalid_argument("offline: additive mode needs t = n");
    }
    if (mode == OfflineMode::Literal && columns() > parties) {
      throw std::invalid_argument("offline: literal mode needs t <= n to interpolate");
    }
  }

  bool operator==(const OfflineParams&) const = default;
};

struct OfflineTriple {
  CessShare a, b, c;
};

struct OfflineBundle {
  std::size_t owner = 0;
  OfflineParams params;
  std::vector<CessShare> masks;
  std::vector<OfflineTriple> triples;
};

struct OfflineMetrics {
  std::vector<u64> broadcast_bytes;  // per offline party
  u64 delivery_bytes = 0;            // bundles handed to the client and servers
  std::size_t rounds = 0;
  double seconds = 0;
  std::vector<Digest> party_views;  // hash of each party's sampled broadcasts (W_i, y_i rows)

  u64 total_broadcast() const {
    u64 s = 0;
    for (auto b : broadcast_bytes) s += b;
    return s;
  }
};

struct OfflineResult {
  std::vector<OfflineBundle> bundles;
  OfflineMetrics metrics;

  /// Mask shares as delivered to the client: [mask index][server].
  std::vector<RingElement> mask_shares(std::size_t mask) const {
    std::vector<RingElement> out;
    for (const auto& b : bundles) out.push_back(b.masks.at(mask).state.value);
    return out;
  }
};

// ---- building blocks --------------------------------------------------------

/// Enc([v]_j) for j in 1..n from one row of Enc(W).
inline Ciphertext derive_encrypted_share(const HeContext& he, std::span<const Ciphertext> enc_w_row, std::size_t j,
                                         OfflineMode mode) {
  if (enc_w_row.empty()) throw std::invalid_argument("derive_encrypted_share: empty row");
  if (j < 1) throw std::out_of_range("derive_encrypted_share: party index starts at 1");
  if (mode == OfflineMode::Additive) {
    if (j > enc_w_row.size()) throw std::out_of_range("derive_encrypted_share: party index beyond width");
    return enc_w_row[j - 1];
  }
  Ciphertext acc = enc_w_row[0];
  u64 power = 1;
  for (std::size_t l = 1; l < enc_w_row.size(); ++l) {
    power = he.plain()->modulus().mul(power, j % he.p());
    acc = ct_add(he, acc, ct_mul_scalar(he, enc_w_row[l], power));
  }
  return acc;
}

/// Enc(v) for the shared item: every column in additive mode, the constant
/// term in literal mode.
inline Ciphertext encrypted_item_value(const HeContext& he, std::span<const Ciphertext> enc_w_row, OfflineMode mode) {
  if (mode == OfflineMode::Literal) return enc_w_row[0];
  Ciphertext acc = enc_w_row[0];
  for (std::size_t l = 1; l < enc_w_row.size(); ++l) acc = ct_add(he, acc, enc_w_row[l]);
  return acc;
}

/// Coefficients lambda_j with sum_j lambda_j P(j) = P(0) for deg P < n, points 1..n.
inline std::vector<u64> lagrange_at_zero(const Modulus& m, std::size_t n) {
  std::vector<u64> out(n);
  for (std::size_t j = 1; j <= n; ++j) {
    u64 num = 1, den = 1;
    for (std::size_t k = 1; k <= n; ++k) {
      if (k == j) continue;
      num = m.mul(num, k % m.value);
      den = m.mul(den, m.sub(k % m.value, j % m.value));
    }
    out[j - 1] = m.mul(num, m.inv(den));
  }
  return out;
}

namespace detail {

inline RingElement dist_decrypt_all(const HeContext& he, const SharedKeyMaterial& keys, const Ciphertext& ct,
                                    std::vector<SeedStream>& rngs, std::vector<u64>& bytes) {
  const std::size_t n = keys.parties();
  std::vector<PartialDecryption> partials;
  partials.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    partials.push_back(dist_decrypt_share(he, keys.shares[i], n, ct, rngs[i]));
    ByteWriter w;
    write_partial(w, he, partials.back());
    bytes[i] += w.size();
  }
  return dist_decrypt_combine(he, partials, n);
}

struct ItemOutput {
  std::vector<ShareState> shares;
  std::vector<Commitment> comms;
  Ciphertext enc_value;  // under the offline key
};

}  // namespace detail

/// Adds c - d to party 0's d-share and commitment; returns the public difference.
inline RingElement triple_finalize(const CessContext& ctx, const SharedKeyMaterial& keys, std::vector<ShareState>& d_shares,
                                   std::vector<Commitment>& d_comms, const Ciphertext& enc_a, const Ciphertext& enc_b,
                                   const Ciphertext& enc_d, std::vector<SeedStream>& rngs, std::vector<u64>& bytes) {
  const auto& he = *ctx.he;
  const Ciphertext enc_c = ct_mul(he, enc_a, enc_b);
  const RingElement diff = detail::dist_decrypt_all(he, keys, ct_sub(he, enc_c, enc_d), rngs, bytes);
  d_shares[0].value += diff;
  d_comms[0] = comm_add_const(d_comms[0], diff);
  return diff;
}

// ---- the protocol -----------------------------------------------------------

class OfflineRunner {
 public:
  OfflineRunner(CessContextPtr ctx, const SharedKeyMaterial& keys, OfflineParams params, std::vector<Seed> seeds)
      : ctx_(std::move(ctx)), keys_(keys), params_(params), seeds_(std::move(seeds)) {
    params_.check();
    if (keys_.parties() != params_.parties || seeds_.size() != params_.parties) {
      throw std::invalid_argument("offline: key shares and seeds must match the party count");
    }
    if (ctx_->parties() != params_.parties) throw std::invalid_argument("offline: server key count mismatch");
    const std::size_t n = params_.parties;
    views_.assign(n, Sha256());
    bytes_.assign(n, 0);
    if (params_.mode == OfflineMode::Literal) lambdas_ = lagrange_at_zero(ctx_->ring->modulus(), n);
  }

  OfflineResult run() {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = params_.parties;
    OfflineResult out;
    out.bundles.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      out.bundles[j].owner = j;
      out.bundles[j].params = params_;
      out.bundles[j].masks.reserve(params_.masks);
      out.bundles[j].triples.reserve(params_.triples);
    }

    for (std::size_t k = 0; k < params_.masks; ++k) {
      auto item = generate_item(k);
      distribute(out, k, item, [&](std::size_t j, CessShare s) { out.bundles[j].masks.push_back(std::move(s)); });
    }
    const std::size_t base = params_.masks;
    const std::size_t m = params_.triples;
    for (std::size_t t = 0; t < m; ++t) {
      auto a = generate_item(base + t);
      auto b = generate_item(base + m + t);
      auto d = generate_item(base + 2 * m + t);
      auto rngs = party_streams("offline-triple", t);
      triple_finalize(*ctx_, keys_, d.shares, d.comms, a.enc_value, b.enc_value, d.enc_value, rngs, bytes_);
      std::vector<CessShare> as, bs, cs;
      distribute(out, base + t, a, [&](std::size_t, CessShare s) { as.push_back(std::move(s)); });
      distribute(out, base + m + t, b, [&](std::size_t, CessShare s) { bs.push_back(std::move(s)); });
      distribute(out, base + 2 * m + t, d, [&](std::size_t, CessShare s) { cs.push_back(std::move(s)); });
      for (std::size_t j = 0; j < n; ++j) {
        out.bundles[j].triples.push_back({std::move(as[j]), std::move(bs[j]), std::move(cs[j])});
      }
    }

    out.metrics.broadcast_bytes = bytes_;
    out.metrics.delivery_bytes = delivery_bytes_;
    // broadcast of Enc(W_i), Enc(y_i), Comm(y_i); mask partials; triple partials; delivery
    out.metrics.rounds = 4;
    for (auto& v : views_) out.metrics.party_views.push_back(v.finish());
    out.metrics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

 private:
  std::vector<SeedStream> party_streams(std::string_view label, std::size_t index) const {
    std::vector<SeedStream> out;
    for (const auto& s : seeds_) out.emplace_back(derive_seed(s, label, index));
    return out;
  }

  void broadcast(std::size_t i, const ByteWriter& w) {
    bytes_[i] += w.size();
    views_[i].update(w.bytes());
  }

  detail::ItemOutput generate_item(std::size_t index) {
    const auto& he = *ctx_->he;
    const auto& ck = *ctx_->ck;
    const std::size_t n = params_.parties;
    const std::size_t t = params_.columns();
    auto rngs = party_streams("offline-item", index);

    std::vector<Ciphertext> enc_w;
    std::vector<Ciphertext> enc_y;
    std::vector<RingElement> y;
    std::vector<Randomness> ry;
    std::vector<Commitment> comm_y;
    for (std::size_t i = 0; i < n; ++i) {
      auto& rng = rngs[i];
      ByteWriter w;
      for (std::size_t l = 0; l < t; ++l) {
        const RingElement wil = sample_uniform(ctx_->ring, rng);
        Ciphertext ct = encrypt(he, keys_.pk, wil, rng);
        write_ciphertext(w, he, ct);
        if (i == 0) {
          enc_w.push_back(std::move(ct));
        } else {
          enc_w[l] = ct_add(he, enc_w[l], ct);
        }
      }
      y.push_back(sample_uniform(ctx_->ring, rng));
      ry.push_back(sample_randomness(ck, rng));
      enc_y.push_back(encrypt(he, keys_.pk, y.back(), rng));
      comm_y.push_back(commit(ck, y.back(), ry.back()));
      write_ciphertext(w, he, enc_y.back());
      write_commitment(w, ck, comm_y.back());
      broadcast(i, w);
    }

    detail::ItemOutput out;
    for (std::size_t j = 0; j < n; ++j) {
      const Ciphertext share_ct = derive_encrypted_share(he, enc_w, j + 1, params_.mode);
      const RingElement mask = detail::dist_decrypt_all(he, keys_, ct_sub(he, enc_y[j], share_ct), rngs, bytes_);
      ShareState s{y[j] - mask, ry[j]};
      Commitment c = comm_sub_const(comm_y[j], mask);
      if (params_.mode == OfflineMode::Literal) {
        s = share_scalar_mul(s, lambdas_[j]);
        c = comm_scalar_mul(ck, c, lambdas_[j]);
      }
      out.shares.push_back(std::move(s));
      out.comms.push_back(std::move(c));
    }
    out.enc_value = encrypted_item_value(he, enc_w, params_.mode);
    return out;
  }

  // Each party encrypts its final share under its online server's key.
  template <typename Sink>
  void distribute(const OfflineResult&, std::size_t index, detail::ItemOutput& item, Sink&& sink) {
    auto rngs = party_streams("offline-deliver", index);
    auto pub = std::make_shared<WirePublic>();
    const std::size_t n = params_.parties;
    pub->comms = std::move(item.comms);
    pub->cts_value.resize(n);
    pub->cts_rand.resize(n);
    for (std::size_t j = 0; j < n; ++j) encrypt_share_into(*ctx_, *pub, j, item.shares[j], rngs[j]);
    ByteWriter w;
    write_wire_public(w, *ctx_, *pub);
    delivery_bytes_ += w.size();
    std::shared_ptr<const WirePublic> shared = std::move(pub);
    for (std::size_t j = 0; j < n; ++j) sink(j, CessShare{j, std::move(item.shares[j]), shared});
  }

  CessContextPtr ctx_;
  const SharedKeyMaterial& keys_;
  OfflineParams params_;
  std::vector<Seed> seeds_;
  std::vector<Sha256> views_;
  std::vector<u64> bytes_;
  u64 delivery_bytes_ = 0;
  std::vector<u64> lambdas_;
};

inline OfflineResult offline_run(CessContextPtr ctx, const SharedKeyMaterial& keys, const OfflineParams& params,
                                 std::vector<Seed> seeds) {
  return OfflineRunner(std::move(ctx), keys, params, std::move(seeds)).run();
}

// ---- persistence ------------------------------------------------------------

inline constexpr char kOfflineMagic[8] = {'C', 'E', 'S', 'S', 'O', 'F', 'F', '1'};

inline void write_offline_bundle(ByteWriter& w, const CessContext& ctx, const OfflineBundle& b) {
  w.raw(ByteSpan(reinterpret_cast<const std::uint8_t*>(kOfflineMagic), sizeof(kOfflineMagic)));
  w.u32(static_cast<std::uint32_t>(b.params.parties));
  w.u32(static_cast<std::uint32_t>(b.params.masks));
  w.u32(static_cast<std::uint32_t>(b.params.triples));
  w.u32(static_cast<std::uint32_t>(b.params.width));
  w.u8(static_cast<std::uint8_t>(b.params.mode));
  w.u32(static_cast<std::uint32_t>(b.owner));
  w.u64(ctx.ring->degree());
  w.u64(ctx.ring->q());
  for (const auto& s : b.masks) write_cess_share(w, ctx, s);
  for (const auto& t : b.triples) {
    write_cess_share(w, ctx, t.a);
    write_cess_share(w, ctx, t.b);
    write_cess_share(w, ctx, t.c);
  }
}

inline OfflineBundle read_offline_bundle(ByteReader& r, const CessContext& ctx) {
  for (char c : kOfflineMagic) {
    if (r.u8() != static_cast<std::uint8_t>(c)) throw DecodeError("offline bundle: bad magic");
  }
  OfflineBundle b;
  b.params.parties = r.u32();
  b.params.masks = r.u32();
  b.params.triples = r.u32();
  b.params.width = r.u32();
  const auto mode = r.u8();
  if (mode > 1) throw DecodeError("offline bundle: unknown mode");
  b.params.mode = static_cast<OfflineMode>(mode);
  b.owner = r.u32();
  if (r.u64() != ctx.ring->degree() || r.u64() != ctx.ring->q()) throw ParamMismatch("offline bundle: ring mismatch");
  if (b.params.parties != ctx.parties() || b.owner >= b.params.parties) {
    throw ParamMismatch("offline bundle: party count mismatch");
  }
  auto read_owned = [&] {
    auto s = read_cess_share(r, ctx);
    if (s.owner != b.owner) throw DecodeError("offline bundle: record owner mismatch");
    return s;
  };
  for (std::size_t k = 0; k < b.params.masks; ++k) b.masks.push_back(read_owned());
  for (std::size_t t = 0; t < b.params.triples; ++t) {
    OfflineTriple tr;
    tr.a = read_owned();
    tr.b = read_owned();
    tr.c = read_owned();
    b.triples.push_back(std::move(tr));
  }
  r.expect_done();
  return b;
}

inline void save_offline_bundle(const std::string& path, const CessContext& ctx, const OfflineBundle& b) {
  ByteWriter w;
  write_offline_bundle(w, ctx, b);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  const auto& bytes = w.bytes();
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

inline Bytes read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return Bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

inline OfflineBundle load_offline_bundle(const std::string& path, const CessContext& ctx) {
  const Bytes data = read_file_bytes(path);
  ByteReader r(data);
  return read_offline_bundle(r, ctx);
}

}  // namespace cessmpc
