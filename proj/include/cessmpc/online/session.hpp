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

// Trusted setup of one deployment: ring and commitment CRS, per-server HE
// keys (secret halves escrowed with the STTP), the offline phase's shared
// key, and the signing PKI. Everything derives from one master seed so
// simulated and networked runs can be replayed.

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cessmpc/cess/cess.hpp"
#include "cessmpc/net/bulletin.hpp"
#include "cessmpc/offline/offline.hpp"
#include "cessmpc/online/circuit.hpp"
#include "cessmpc/sttp/sttp.hpp"

namespace cessmpc {

struct SessionParams {
  std::size_t degree = 1024;
  u64 modulus = 2013265921;
  std::size_t servers = 3;
  CommitParams commit;
  Seed master{};
};

struct Session {
  SessionParams params;
  Seed crs_seed{};
  CessContextPtr ctx;
  std::vector<KeyPair> server_keys;
  SharedKeyMaterial offline_keys;
  Pki pki;

  std::size_t servers() const { return params.servers; }

  Seed party_seed(PartyId id) const { return derive_seed(params.master, "party", id); }
  SigningKey signing_key(PartyId id) const { return SigningKey(derive_seed(params.master, "signing", id)); }

  std::vector<Seed> offline_seeds() const {
    std::vector<Seed> out;
    for (std::size_t j = 0; j < servers(); ++j) out.push_back(derive_seed(params.master, "offline-party", j));
    return out;
  }

  Escrow escrow() const {
    Escrow e;
    for (std::size_t j = 0; j < server_keys.size(); ++j) e.deposit(j, server_keys[j].sk);
    return e;
  }
};

inline std::vector<PartyId> session_parties(std::size_t servers) {
  std::vector<PartyId> ids;
  for (std::size_t j = 0; j < servers; ++j) ids.push_back(static_cast<PartyId>(j));
  ids.push_back(kSttpId);
  ids.push_back(kClientId);
  ids.push_back(kHubId);
  return ids;
}

inline Session make_session(const SessionParams& params) {
  if (params.servers < 1) throw std::invalid_argument("need at least one server");
  Session s;
  s.params = params;
  s.crs_seed = derive_seed(params.master, "crs");
  auto ring = make_ring(RingParams{params.degree, params.modulus, 0});
  auto ctx = std::make_shared<CessContext>();
  ctx->ring = ring;
  ctx->ck = make_commit_key(ring, params.commit, s.crs_seed);
  ctx->he = HeContext::create(ring, HeParams::for_ring(*ring, params.servers));
  for (std::size_t j = 0; j < params.servers; ++j) {
    s.server_keys.push_back(keygen(*ctx->he, derive_seed(params.master, "server-he", j)));
    ctx->server_pks.push_back(s.server_keys.back().pk);
  }
  s.ctx = ctx;
  s.offline_keys = shared_keygen(*ctx->he, params.servers, derive_seed(params.master, "offline-he"));
  for (auto id : session_parties(params.servers)) s.pki.add(id, s.signing_key(id).public_key());
  return s;
}

// ---- transcript header -------------------------------------------------------------

inline Bytes session_header(const Session& s, const Circuit& circuit) {
  using nlohmann::json;
  json j;
  j["format"] = "cessmpc-transcript-1";
  j["degree"] = s.params.degree;
  j["modulus"] = s.params.modulus;
  j["servers"] = s.params.servers;
  j["commit"] = {{"k", s.params.commit.k}, {"lambda", s.params.commit.lambda}, {"eta", s.params.commit.eta}};
  j["crs_seed"] = to_hex(s.crs_seed);
  const auto& hp = s.ctx->he->params();
  j["he"] = {{"primes", hp.primes}, {"eta", hp.eta}, {"smudge_bits", hp.smudge_bits}};
  json pks = json::array();
  for (const auto& pk : s.ctx->server_pks) {
    ByteWriter w;
    write_public_key(w, *s.ctx->he, pk);
    pks.push_back(to_hex(w.bytes()));
  }
  j["server_pks"] = pks;
  json pki = json::object();
  for (const auto& [id, key] : s.pki.keys()) pki[std::to_string(id)] = to_hex(key);
  j["pki"] = pki;
  j["circuit_sha256"] = to_hex(circuit_digest(circuit));
  const auto text = j.dump();
  return Bytes(text.begin(), text.end());
}

/// Public context recovered from a transcript header: enough to verify, not to decrypt.
struct PublicSetup {
  CessContextPtr ctx;
  Pki pki;
  Digest circuit{};
};

inline PublicSetup parse_session_header(ByteSpan header) {
  using nlohmann::json;
  PublicSetup out;
  try {
    const auto j = json::parse(header.begin(), header.end());
    if (j.at("format") != "cessmpc-transcript-1") throw DecodeError("unknown transcript format");
    RingParams rp{j.at("degree").get<std::size_t>(), j.at("modulus").get<u64>(), 0};
    auto ring = make_ring(rp);
    CommitParams cp;
    cp.k = j.at("commit").at("k").get<std::size_t>();
    cp.lambda = j.at("commit").at("lambda").get<std::size_t>();
    cp.eta = j.at("commit").at("eta").get<unsigned>();
    const auto crs = from_hex(j.at("crs_seed").get<std::string>());
    if (crs.size() != 32) throw DecodeError("bad CRS seed");
    Seed seed{};
    std::copy(crs.begin(), crs.end(), seed.begin());
    HeParams hp;
    hp.degree = rp.degree;
    hp.plain_modulus = rp.modulus;
    hp.primes = j.at("he").at("primes").get<std::vector<u64>>();
    hp.eta = j.at("he").at("eta").get<unsigned>();
    hp.smudge_bits = j.at("he").at("smudge_bits").get<unsigned>();
    auto ctx = std::make_shared<CessContext>();
    ctx->ring = ring;
    ctx->ck = make_commit_key(ring, cp, seed);
    ctx->he = HeContext::create(ring, hp);
    for (const auto& hex : j.at("server_pks")) {
      const auto bytes = from_hex(hex.get<std::string>());
      ByteReader r(bytes);
      ctx->server_pks.push_back(read_public_key(r, *ctx->he));
      r.expect_done();
    }
    if (ctx->server_pks.size() != j.at("servers").get<std::size_t>()) throw DecodeError("server key count mismatch");
    out.ctx = ctx;
    for (const auto& [id, hex] : j.at("pki").items()) {
      const auto bytes = from_hex(hex.get<std::string>());
      PublicKeyBytes pk{};
      if (bytes.size() != pk.size()) throw DecodeError("bad PKI key");
      std::copy(bytes.begin(), bytes.end(), pk.begin());
      out.pki.add(static_cast<PartyId>(std::stoul(id)), pk);
    }
    const auto cd = from_hex(j.at("circuit_sha256").get<std::string>());
    if (cd.size() != 32) throw DecodeError("bad circuit digest");
    std::copy(cd.begin(), cd.end(), out.circuit.begin());
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("transcript header: ") + e.what());
  }
  return out;
}

// ---- client package -------------------------------------------------------------------

/// What the offline executors hand the client: every server's share of the
/// input masks, and the public commitments and ciphertext digests of the
/// triples it re-broadcasts at setup.
struct ClientPackage {
  std::vector<std::vector<RingElement>> mask_shares;  // [mask][server]
  std::vector<std::array<std::vector<Commitment>, 3>> triple_comms;
  std::vector<std::array<Digest, 3>> triple_digests;
};

inline ClientPackage make_client_package(const CessContext& ctx, const std::vector<OfflineBundle>& bundles) {
  if (bundles.empty()) throw std::invalid_argument("no offline bundles");
  ClientPackage p;
  const auto& first = bundles[0];
  for (std::size_t i = 0; i < first.masks.size(); ++i) {
    std::vector<RingElement> shares;
    for (const auto& b : bundles) shares.push_back(b.masks[i].state.value);
    p.mask_shares.push_back(std::move(shares));
  }
  for (const auto& t : first.triples) {
    const CessShare* parts[3] = {&t.a, &t.b, &t.c};
    std::array<std::vector<Commitment>, 3> comms;
    std::array<Digest, 3> digests{};
    for (std::size_t k = 0; k < 3; ++k) {
      comms[k] = parts[k]->pub->comms;
      digests[k] = digest_ciphertexts(ctx, *parts[k]->pub);
    }
    p.triple_comms.push_back(std::move(comms));
    p.triple_digests.push_back(digests);
  }
  return p;
}

inline void write_client_package(ByteWriter& w, const CessContext& ctx, const ClientPackage& p) {
  w.str("CESSCLI1");
  w.u32(static_cast<std::uint32_t>(ctx.parties()));
  w.u32(static_cast<std::uint32_t>(p.mask_shares.size()));
  for (const auto& shares : p.mask_shares) {
    for (const auto& s : shares) write_ring(w, s);
  }
  w.u32(static_cast<std::uint32_t>(p.triple_comms.size()));
  for (std::size_t t = 0; t < p.triple_comms.size(); ++t) {
    for (std::size_t k = 0; k < 3; ++k) {
      for (const auto& c : p.triple_comms[t][k]) write_commitment(w, *ctx.ck, c);
      w.raw(p.triple_digests[t][k]);
    }
  }
}

inline ClientPackage read_client_package(ByteReader& r, const CessContext& ctx) {
  if (r.str() != "CESSCLI1") throw DecodeError("not a client package");
  const auto n = r.u32();
  if (n != ctx.parties()) throw DecodeError("client package: party count mismatch");
  ClientPackage p;
  const auto masks = r.u32();
  for (std::uint32_t i = 0; i < masks; ++i) {
    std::vector<RingElement> shares;
    for (std::uint32_t j = 0; j < n; ++j) shares.push_back(read_ring(r, ctx.ring));
    p.mask_shares.push_back(std::move(shares));
  }
  const auto triples = r.u32();
  for (std::uint32_t t = 0; t < triples; ++t) {
    std::array<std::vector<Commitment>, 3> comms;
    std::array<Digest, 3> digests{};
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::uint32_t j = 0; j < n; ++j) comms[k].push_back(read_commitment(r, *ctx.ck));
      const auto d = r.raw(32);
      std::copy(d.begin(), d.end(), digests[k].begin());
    }
    p.triple_comms.push_back(std::move(comms));
    p.triple_digests.push_back(digests);
  }
  return p;
}

inline void write_bytes_file(const std::string& path, ByteSpan data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace cessmpc
