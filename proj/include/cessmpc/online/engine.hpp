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

// Round-driven state machine of the online phase.
//
// Every participant runs the same engine over the bulletin: servers with
// their private shares and the per-server ciphertexts, the STTP and any
// auditor with commitments only. Each round's entries are consumed once the
// round closes; the engine then re-derives every public decision (failed
// openings, accusation validity, report resolution, threshold abort) so all
// participants agree on the next phase without trusting each other.
//
// Round schedule:
//   Setup     client posts COMMIT and CIPHERTEXT, shares go out privately
//   Open(s)   live servers post masked openings of layer s (or output proofs)
//   Accuse    after a failed opening: live servers post accusations
//   Decide    STTP posts KEY_RELEASE per newly flagged server, or OUTPUT = bottom
//   Report    live servers post the decrypted pairs of every flagged target
//   Final     STTP posts OUTPUT
// After a report round with no new flags the targets' shares are absorbed by
// the lowest live server and the interrupted stage is opened again.

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cessmpc/cess/cess.hpp"
#include "cessmpc/commit/linked_open.hpp"
#include "cessmpc/net/bulletin.hpp"
#include "cessmpc/offline/offline.hpp"
#include "cessmpc/online/circuit.hpp"
#include "cessmpc/online/messages.hpp"
#include "cessmpc/sttp/sttp.hpp"

namespace cessmpc {

enum class Phase : std::uint8_t { Setup, Open, Accuse, Decide, Report, Final, Done };

inline std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::Setup: return "setup";
    case Phase::Open: return "open";
    case Phase::Accuse: return "accuse";
    case Phase::Decide: return "decide";
    case Phase::Report: return "report";
    case Phase::Final: return "final";
    case Phase::Done: return "done";
  }
  return "?";
}

enum class EngineRole : std::uint8_t { Server, Sttp, Auditor };

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EntryVerdict {
  std::uint64_t seq = 0;
  bool accepted = true;
  std::string reason;
};

struct ObjectState {
  std::shared_ptr<const WirePublic> pub;
  ShareState mine;  // servers only
};

/// Everything the board showed for one Open round.
struct OpenRecord {
  struct Item {
    std::optional<Bytes> bytes;
    bool ok = false;
    Digest expected{};
  };
  std::uint64_t epoch = 0;
  std::size_t stage = 0;
  std::vector<std::uint32_t> keys;
  std::map<std::pair<std::size_t, std::uint32_t>, Item> items;
  std::map<std::pair<std::size_t, std::uint32_t>, MaskedOpen> masked;
  std::map<std::pair<std::size_t, std::uint32_t>, RingElement> output_messages;
  std::set<std::size_t> failed;

  std::vector<std::pair<std::size_t, std::uint32_t>> failures() const {
    std::vector<std::pair<std::size_t, std::uint32_t>> out;
    for (const auto& [key, item] : items) {
      if (!item.ok) out.push_back(key);
    }
    return out;
  }
};

struct EngineStats {
  std::size_t recoveries = 0;      // report rounds that ended in absorption
  std::size_t max_checks = 0;      // most commitment checks in one resolution
  std::size_t open_rounds = 0;
  std::size_t reopened_stages = 0;
};

class ProtocolEngine {
 public:
  ProtocolEngine(CessContextPtr ctx, Circuit circuit, EngineRole role, std::size_t self = 0)
      : ctx_(std::move(ctx)), circuit_(std::move(circuit)), plan_(plan_circuit(circuit_)), role_(role), self_(self) {
    n_ = ctx_->parties();
    if (n_ < 1) throw ProtocolError("no servers");
    if (role_ == EngineRole::Server && self_ >= n_) throw ProtocolError("server index out of range");
    check_circuit_noise(circuit_, plan_, *ctx_->he);
    for (std::size_t j = 0; j < n_; ++j) live_.insert(j);
  }

  // ---- setup ----------------------------------------------------------------------

  /// Servers: offline material for the triples this circuit consumes.
  void attach_bundle(const OfflineBundle& bundle) {
    if (role_ != EngineRole::Server || bundle.owner != self_) throw ProtocolError("bundle owner mismatch");
    if (bundle.triples.size() < plan_.triples()) {
      throw ProtocolError("triple exhaustion: circuit needs " + std::to_string(plan_.triples()) + " triples, bundle has " +
                          std::to_string(bundle.triples.size()));
    }
    for (std::size_t t = 0; t < plan_.triples(); ++t) {
      const auto& tr = bundle.triples[t];
      const CessShare* parts[3] = {&tr.a, &tr.b, &tr.c};
      for (std::size_t p = 0; p < 3; ++p) {
        objects_[triple_object(circuit_, t, p)] = ObjectState{parts[p]->pub, parts[p]->state};
      }
    }
    bundle_attached_ = true;
  }

  /// Servers: the client's private delivery of input shares.
  void attach_inputs(const InputDelivery& d) {
    if (role_ != EngineRole::Server) throw ProtocolError("only servers receive input shares");
    if (d.ids.size() != d.shares.size() || d.ids.size() != d.pubs.size()) throw ProtocolError("malformed input delivery");
    for (std::size_t i = 0; i < d.ids.size(); ++i) {
      if (!d.pubs[i].has_ciphertexts()) throw ProtocolError("input delivery without ciphertexts");
      pending_inputs_[d.ids[i]] = ObjectState{std::make_shared<const WirePublic>(d.pubs[i]), d.shares[i]};
    }
  }

  // ---- round processing -----------------------------------------------------------

  void process_round(std::uint64_t epoch, std::span<const Message> entries) {
    const Phase phase = phase_;
    round_phases_.emplace_back(epoch, phase);
    switch (phase) {
      case Phase::Setup: do_setup(entries); break;
      case Phase::Open: do_open(epoch, entries); break;
      case Phase::Accuse: do_accuse(entries); break;
      case Phase::Decide: do_decide(entries); break;
      case Phase::Report: do_report(entries); break;
      case Phase::Final: do_final(entries); break;
      case Phase::Done:
        for (const auto& e : entries) verdict(e, false, "entry after the output");
        break;
    }
  }

  // ---- state --------------------------------------------------------------------------

  Phase phase() const { return phase_; }
  std::size_t stage() const { return stage_; }
  std::size_t parties() const { return n_; }
  const Circuit& circuit() const { return circuit_; }
  const CircuitPlan& plan() const { return plan_; }
  const CessContext& context() const { return *ctx_; }
  EngineRole role() const { return role_; }
  std::size_t self() const { return self_; }

  const std::set<std::size_t>& live() const { return live_; }
  bool is_live(std::size_t j) const { return live_.count(j) != 0; }
  std::vector<std::size_t> cheat_list() const { return {cheat_.begin(), cheat_.end()}; }
  std::size_t designated() const {
    if (live_.empty()) throw ProtocolError("no live server");
    return *live_.begin();
  }

  const std::map<std::uint64_t, ObjectState>& objects() const { return objects_; }
  const std::optional<OpenRecord>& last_open() const { return last_open_; }
  const std::set<std::size_t>& targets() const { return targets_; }
  const std::map<std::size_t, FlagReason>& pending_flags() const { return newly_; }
  const std::map<std::size_t, SecretKey>& released_keys() const { return released_; }
  const std::vector<EntryVerdict>& verdicts() const { return verdicts_; }
  const std::vector<std::pair<std::uint64_t, Phase>>& round_phases() const { return round_phases_; }
  const EngineStats& stats() const { return stats_; }
  bool sttp_consistent() const { return sttp_consistent_; }

  bool finished() const { return phase_ == Phase::Done; }
  const std::optional<OutputRecord>& outcome() const { return outcome_; }
  const std::vector<RingElement>& output_values() const { return outputs_; }

  /// Decision the STTP must post in the current Decide round.
  Decision decision() const {
    std::set<std::size_t> fresh;
    for (const auto& [k, r] : newly_) fresh.insert(k);
    return sttp_decide(cheat_, fresh, n_);
  }

  FlagReason flag_reason(std::size_t k) const {
    auto it = newly_.find(k);
    return it == newly_.end() ? FlagReason::BadOpening : it->second;
  }

  /// The OUTPUT record the STTP must post now (Final, or Decide with abort).
  OutputRecord expected_output() const {
    OutputRecord o;
    if (phase_ == Phase::Decide) {
      std::set<std::size_t> all = cheat_;
      for (const auto& [k, r] : newly_) all.insert(k);
      o.ok = false;
      o.cheaters.assign(all.begin(), all.end());
      return o;
    }
    o.ok = true;
    o.cheaters.assign(cheat_.begin(), cheat_.end());
    o.values = outputs_;
    return o;
  }

  Digest commitments_digest() const {
    Sha256 h;
    for (const auto& [id, obj] : objects_) {
      ByteWriter w;
      w.u64(id);
      for (std::size_t j = 0; j < n_; ++j) {
        w.u8(obj.pub->retired(j) ? 1 : 0);
        if (!obj.pub->retired(j)) write_commitment(w, *ctx_->ck, obj.pub->comms[j]);
      }
      h.update(w.bytes());
    }
    return h.finish();
  }

  Digest ciphertexts_digest() const {
    Sha256 h;
    for (const auto& [id, obj] : objects_) {
      if (!obj.pub->has_ciphertexts()) continue;
      const auto d = digest_ciphertexts(*ctx_, *obj.pub);
      h.update(d);
    }
    return h.finish();
  }

  bool holds_plaintext_shares() const {
    for (const auto& [id, obj] : objects_) {
      if (obj.mine.value.valid() || obj.pub->has_ciphertexts()) return true;
    }
    return false;
  }

  // ---- server-side message production -----------------------------------------------

  /// Masked openings of the current layer, or output proofs in the output stage.
  ItemBatch make_open_items(const Seed& seed, std::uint64_t epoch) const {
    require_server();
    ItemBatch batch;
    batch.stage = static_cast<std::uint32_t>(stage_);
    if (stage_ <= plan_.layers) {
      for (auto g : plan_.stage_mults[stage_]) {
        const auto& gate = circuit_.gates[g];
        const auto t = static_cast<std::size_t>(plan_.triple_of_gate[g]);
        MaskedOpen m;
        m.gate = static_cast<std::uint32_t>(g);
        m.eps = share_sub(object(gate.a).mine, object(triple_object(circuit_, t, 0)).mine);
        m.delta = share_sub(object(gate.b).mine, object(triple_object(circuit_, t, 1)).mine);
        batch.items.push_back(encode_masked_open(m));
      }
    } else {
      const Seed round_seed = derive_seed(seed, "linked-open", epoch);
      for (std::size_t i = 0; i < plan_.outputs.size(); ++i) {
        const auto& obj = object(plan_.outputs[i]);
        OutputOpen o;
        o.index = static_cast<std::uint32_t>(i);
        o.proof = linked_open_prove(*ctx_->ck, obj.pub->comms[self_], obj.mine.value, obj.mine.rand,
                                    derive_seed(round_seed, "output", i));
        batch.items.push_back(encode_output_open(*ctx_->ck, o));
      }
    }
    return batch;
  }

  EntryKind open_kind() const { return stage_ <= plan_.layers ? EntryKind::Open : EntryKind::LinkedOpen; }

  /// One accusation per failed or missing item of another server.
  std::vector<Accusation> make_accusations() const {
    require_server();
    std::vector<Accusation> out;
    if (!last_open_) return out;
    for (const auto& [key, item] : last_open_->items) {
      if (item.ok || key.first == self_) continue;
      Accusation a;
      a.epoch = last_open_->epoch;
      a.accuser = static_cast<std::uint32_t>(self_);
      a.accused = static_cast<std::uint32_t>(key.first);
      a.item = key.second;
      if (item.bytes) a.message = *item.bytes;
      a.expected = item.expected;
      out.push_back(std::move(a));
    }
    return out;
  }

  /// Decrypts every live object's pair for each recovery target.
  std::vector<std::pair<std::uint32_t, Bytes>> make_report() const {
    require_server();
    std::vector<std::pair<std::uint32_t, Bytes>> out;
    const auto& he = *ctx_->he;
    for (auto k : targets_) {
      auto it = released_.find(k);
      if (it == released_.end()) throw ProtocolError("no released key for server " + std::to_string(k));
      std::vector<ObjectPair> pairs;
      pairs.reserve(objects_.size());
      for (const auto& [id, obj] : objects_) {
        ObjectPair p;
        p.id = id;
        p.pair.value = decrypt(he, it->second, obj.pub->cts_value[k]);
        for (const auto& ct : obj.pub->cts_rand[k]) p.pair.rand.r.push_back(decrypt(he, it->second, ct));
        pairs.push_back(std::move(p));
      }
      out.emplace_back(static_cast<std::uint32_t>(k), encode_report_body(pairs));
    }
    return out;
  }

 private:
  const ObjectState& object(std::uint64_t id) const {
    auto it = objects_.find(id);
    if (it == objects_.end()) throw ProtocolError("object " + std::to_string(id) + " is not live");
    return it->second;
  }

  void require_server() const {
    if (role_ != EngineRole::Server) throw ProtocolError("only servers produce protocol messages");
  }

  void verdict(const Message& e, bool ok, std::string reason = {}) {
    verdicts_.push_back({e.seq, ok, std::move(reason)});
  }

  bool is_server(PartyId id) const { return id < n_; }

  // ---- setup ----------------------------------------------------------------------

  void do_setup(std::span<const Message> entries) {
    const Message* commit_entry = nullptr;
    const Message* digest_entry = nullptr;
    for (const auto& e : entries) {
      if (e.author == kClientId && e.kind == EntryKind::Commit && !commit_entry) {
        commit_entry = &e;
      } else if (e.author == kClientId && e.kind == EntryKind::Ciphertext && !digest_entry) {
        digest_entry = &e;
      } else {
        verdict(e, e.kind == EntryKind::Silent, "unexpected entry in the setup round");
      }
    }
    if (!commit_entry || !digest_entry) throw ProtocolError("setup round lacks the client's commitments");

    SetupCommitments comms;
    SetupDigests digests;
    try {
      comms = decode_setup_commitments(*ctx_->ck, n_, commit_entry->payload);
      digests = decode_setup_digests(digest_entry->payload);
    } catch (const DecodeError& err) {
      throw ProtocolError(std::string("malformed setup entry: ") + err.what());
    }

    std::vector<std::uint64_t> expected;
    for (auto w : plan_.inputs) expected.push_back(w);
    for (std::size_t t = 0; t < plan_.triples(); ++t) {
      for (std::size_t p = 0; p < 3; ++p) expected.push_back(triple_object(circuit_, t, p));
    }
    if (comms.objects.size() != expected.size() || digests.size() != expected.size()) {
      throw ProtocolError("setup does not cover the circuit's inputs and triples");
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (comms.objects[i].first != expected[i] || digests[i].first != expected[i]) {
        throw ProtocolError("setup object order mismatch");
      }
    }

    if (role_ == EngineRole::Server) {
      if (!bundle_attached_ && plan_.triples() > 0) throw ProtocolError("server has no offline bundle");
      for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto id = expected[i];
        ObjectState obj;
        if (id < circuit_.wires) {
          auto it = pending_inputs_.find(id);
          if (it == pending_inputs_.end()) throw ProtocolError("missing input share for wire " + std::to_string(id));
          obj = it->second;
          if (!verify_open(*ctx_->ck, obj.pub->comms[self_], obj.mine.value, obj.mine.rand)) {
            throw ProtocolError("input share does not open the client's commitment");
          }
        } else {
          obj = object(id);
        }
        if (!same_commitments(obj.pub->comms, comms.objects[i].second)) {
          throw ProtocolError("posted commitments differ from the delivered ones for object " + std::to_string(id));
        }
        if (digest_ciphertexts(*ctx_, *obj.pub) != digests[i].second) {
          throw ProtocolError("posted ciphertext digest differs for object " + std::to_string(id));
        }
        objects_[id] = std::move(obj);
      }
      pending_inputs_.clear();
    } else {
      for (std::size_t i = 0; i < expected.size(); ++i) {
        auto pub = std::make_shared<WirePublic>();
        pub->comms = std::move(comms.objects[i].second);
        objects_[expected[i]] = ObjectState{std::move(pub), {}};
      }
    }
    verdict(*commit_entry, true);
    verdict(*digest_entry, true);
    enter_stage(1);
    phase_ = Phase::Open;
  }

  bool same_commitments(const std::vector<Commitment>& a, const std::vector<Commitment>& b) const {
    if (a.size() != b.size()) return false;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (serialize(*ctx_->ck, a[j]) != serialize(*ctx_->ck, b[j])) return false;
    }
    return true;
  }

  // ---- evaluation -------------------------------------------------------------------

  void enter_stage(std::size_t s) {
    stage_ = s;
    if (s > plan_.output_stage()) return;
    const std::size_t d = designated();
    const bool server = role_ == EngineRole::Server;
    for (auto gi : plan_.stage_linear[s]) {
      const auto& g = circuit_.gates[gi];
      const auto& a = object(g.a);
      ObjectState out;
      switch (g.kind) {
        case GateKind::Add:
        case GateKind::Sub: {
          const auto& b = object(g.b);
          const bool sub = g.kind == GateKind::Sub;
          out.pub = std::make_shared<const WirePublic>(pub_add(*ctx_, *a.pub, *b.pub, sub));
          if (server) out.mine = sub ? share_sub(a.mine, b.mine) : share_add(a.mine, b.mine);
          break;
        }
        case GateKind::AddConst: {
          const auto c = RingElement::constant(ctx_->ring, g.constant);
          out.pub = std::make_shared<const WirePublic>(pub_add_const(*ctx_, *a.pub, c, d));
          if (server) out.mine = share_add_const(a.mine, c, self_ == d);
          break;
        }
        case GateKind::MulConst:
          out.pub = std::make_shared<const WirePublic>(pub_scalar_mul(*ctx_, *a.pub, g.constant));
          if (server) out.mine = share_scalar_mul(a.mine, g.constant);
          break;
        default: throw ProtocolError("non-linear gate in a linear pass");
      }
      objects_[g.out] = std::move(out);
    }
  }

  void complete_stage(const OpenRecord& rec) {
    const std::size_t s = stage_;
    const std::size_t d = designated();
    const bool server = role_ == EngineRole::Server;
    if (s <= plan_.layers) {
      for (auto gi : plan_.stage_mults[s]) {
        const auto key = static_cast<std::uint32_t>(gi);
        RingElement eps(ctx_->ring), delta(ctx_->ring);
        for (auto k : live_) {
          const auto& m = rec.masked.at({k, key});
          eps += m.eps.value;
          delta += m.delta.value;
        }
        const auto t = static_cast<std::size_t>(plan_.triple_of_gate[gi]);
        const auto ida = triple_object(circuit_, t, 0), idb = triple_object(circuit_, t, 1),
                   idc = triple_object(circuit_, t, 2);
        const auto& a = object(ida);
        const auto& b = object(idb);
        const auto& c = object(idc);
        // z = c + eps b + delta a + eps delta
        WirePublic pub = pub_add(*ctx_, *c.pub, pub_mul_public(*ctx_, *b.pub, eps));
        pub = pub_add(*ctx_, pub, pub_mul_public(*ctx_, *a.pub, delta));
        const RingElement ed = eps * delta;
        pub = pub_add_const(*ctx_, pub, ed, d);
        ObjectState out;
        out.pub = std::make_shared<const WirePublic>(std::move(pub));
        if (server) {
          out.mine = share_add(share_add(c.mine, share_mul_public(b.mine, eps)), share_mul_public(a.mine, delta));
          out.mine = share_add_const(out.mine, ed, self_ == d);
        }
        objects_.erase(ida);
        objects_.erase(idb);
        objects_.erase(idc);
        objects_[circuit_.gates[gi].out] = std::move(out);
      }
    } else {
      outputs_.clear();
      for (std::size_t i = 0; i < plan_.outputs.size(); ++i) {
        RingElement sum(ctx_->ring);
        for (auto k : live_) sum += rec.output_messages.at({k, static_cast<std::uint32_t>(i)});
        outputs_.push_back(std::move(sum));
      }
    }
    for (auto it = objects_.begin(); it != objects_.end();) {
      if (it->first < circuit_.wires && plan_.last_stage[it->first] <= s) {
        it = objects_.erase(it);
      } else {
        ++it;
      }
    }
    enter_stage(s + 1);
  }

  Phase after_progress() const { return stage_ > plan_.output_stage() ? Phase::Final : Phase::Open; }

  // ---- Open -------------------------------------------------------------------------

  void do_open(std::uint64_t epoch, std::span<const Message> entries) {
    ++stats_.open_rounds;
    OpenRecord rec;
    rec.epoch = epoch;
    rec.stage = stage_;
    const bool output_stage = stage_ > plan_.layers;
    const EntryKind kind = output_stage ? EntryKind::LinkedOpen : EntryKind::Open;
    if (output_stage) {
      for (std::size_t i = 0; i < plan_.outputs.size(); ++i) rec.keys.push_back(static_cast<std::uint32_t>(i));
    } else {
      for (auto g : plan_.stage_mults[stage_]) rec.keys.push_back(static_cast<std::uint32_t>(g));
    }

    std::map<std::size_t, const Message*> batches;
    std::vector<const Message*> accusations;
    for (const auto& e : entries) {
      if (e.kind == EntryKind::Silent) {
        verdict(e, true, "deadline missed");
        continue;
      }
      if (!is_server(e.author) || !is_live(e.author)) {
        verdict(e, false, "author is not a live server");
        continue;
      }
      if (e.kind == kind && !batches.count(e.author)) {
        batches[e.author] = &e;
      } else if (e.kind == EntryKind::Accuse) {
        accusations.push_back(&e);
      } else {
        verdict(e, false, "unexpected entry in an open round");
      }
    }

    for (auto k : live_) {
      std::map<std::uint32_t, Bytes> posted;
      const Message* entry = nullptr;
      if (auto it = batches.find(k); it != batches.end()) {
        entry = it->second;
        try {
          auto batch = decode_item_batch(entry->payload);
          if (batch.stage == stage_) {
            for (auto& item : batch.items) {
              if (item.size() < 4) continue;
              const auto key = item_key(item);
              if (!posted.count(key)) posted.emplace(key, std::move(item));
            }
          }
        } catch (const DecodeError&) {
          posted.clear();
        }
      }
      bool all_ok = true;
      for (auto key : rec.keys) {
        OpenRecord::Item item;
        item.expected = expected_digest(k, key);
        if (auto it = posted.find(key); it != posted.end()) {
          item.bytes = it->second;
          item.ok = output_stage ? check_output_item(rec, k, key, *item.bytes) : check_masked_item(rec, k, key, *item.bytes);
        }
        if (!item.ok) {
          all_ok = false;
          rec.failed.insert(k);
        }
        rec.items[{k, key}] = std::move(item);
      }
      if (entry) verdict(*entry, all_ok, all_ok ? "" : "opening does not verify");
    }

    const auto previous = std::move(last_open_);
    for (const auto* e : accusations) judge_accusation(*e, rec, previous ? &*previous : nullptr);

    last_open_ = rec;
    if (!rec.failed.empty()) {
      phase_ = Phase::Accuse;
      return;
    }
    complete_stage(rec);
    last_open_->masked.clear();
    last_open_->output_messages.clear();
    phase_ = newly_.empty() ? after_progress() : Phase::Decide;
  }

  Digest expected_digest(std::size_t k, std::uint32_t key) const {
    ByteWriter w;
    if (stage_ <= plan_.layers) {
      const auto [ce, cd] = masked_commitments(k, key);
      write_commitment(w, *ctx_->ck, ce);
      write_commitment(w, *ctx_->ck, cd);
    } else {
      write_commitment(w, *ctx_->ck, object(plan_.outputs[key]).pub->comms[k]);
    }
    return sha256(w.bytes());
  }

  std::pair<Commitment, Commitment> masked_commitments(std::size_t k, std::uint32_t gate) const {
    const auto& g = circuit_.gates[gate];
    const auto t = static_cast<std::size_t>(plan_.triple_of_gate[gate]);
    const auto& x = object(g.a).pub->comms[k];
    const auto& y = object(g.b).pub->comms[k];
    const auto& a = object(triple_object(circuit_, t, 0)).pub->comms[k];
    const auto& b = object(triple_object(circuit_, t, 1)).pub->comms[k];
    return {comm_sub(x, a), comm_sub(y, b)};
  }

  bool check_masked_item(OpenRecord& rec, std::size_t k, std::uint32_t gate, ByteSpan bytes) const {
    try {
      auto m = decode_masked_open(*ctx_, bytes);
      if (m.gate != gate) return false;
      const auto [ce, cd] = masked_commitments(k, gate);
      if (!verify_open(*ctx_->ck, ce, m.eps.value, m.eps.rand)) return false;
      if (!verify_open(*ctx_->ck, cd, m.delta.value, m.delta.rand)) return false;
      rec.masked[{k, gate}] = std::move(m);
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }

  bool check_output_item(OpenRecord& rec, std::size_t k, std::uint32_t index, ByteSpan bytes) const {
    try {
      auto o = decode_output_open(*ctx_->ck, bytes);
      if (o.index != index) return false;
      if (!linked_open_verify(*ctx_->ck, object(plan_.outputs[index]).pub->comms[k], o.proof)) return false;
      rec.output_messages[{k, index}] = std::move(o.proof.message);
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }

  // ---- accusations ------------------------------------------------------------------

  void flag(std::size_t k, FlagReason reason) {
    if (cheat_.count(k)) return;
    newly_.emplace(k, reason);
  }

  void judge_accusation(const Message& e, const OpenRecord& current, const OpenRecord* previous) {
    Accusation acc;
    try {
      acc = decode_accusation(e.payload);
    } catch (const DecodeError&) {
      verdict(e, false, "malformed accusation");
      flag(e.author, FlagReason::FalseAccusation);
      return;
    }
    const OpenRecord* rec = nullptr;
    if (acc.epoch == current.epoch) rec = &current;
    if (previous && acc.epoch == previous->epoch) rec = previous;
    bool valid = false;
    if (rec && acc.accuser == e.author && acc.accused != acc.accuser) {
      auto it = rec->items.find({acc.accused, acc.item});
      if (it != rec->items.end()) {
        PostedItem posted{it->second.bytes, it->second.expected};
        const bool ok = it->second.ok;
        valid = validate_accusation(acc, posted, [ok](ByteSpan) { return ok; });
      }
    }
    verdict(e, valid, valid ? "" : "accusation is invalid");
    if (valid) {
      flag(acc.accused, FlagReason::BadOpening);
    } else {
      flag(e.author, FlagReason::FalseAccusation);
    }
  }

  void do_accuse(std::span<const Message> entries) {
    for (const auto& e : entries) {
      if (e.kind == EntryKind::Silent) {
        verdict(e, true, "deadline missed");
      } else if (!is_server(e.author) || !is_live(e.author)) {
        verdict(e, false, "author is not a live server");
      } else if (e.kind != EntryKind::Accuse) {
        verdict(e, false, "unexpected entry in an accusation round");
      } else {
        judge_accusation(e, *last_open_, nullptr);
      }
    }
    // Failures are public, so they flag the opener whether or not anyone accused.
    for (auto k : last_open_->failed) flag(k, FlagReason::BadOpening);
    phase_ = Phase::Decide;
  }

  // ---- STTP decision ----------------------------------------------------------------

  void do_decide(std::span<const Message> entries) {
    const Decision dec = decision();
    const auto expected = expected_output();
    std::set<std::size_t> released_now;
    bool output_seen = false;
    for (const auto& e : entries) {
      if (e.kind == EntryKind::Silent) {
        verdict(e, true, "deadline missed");
        continue;
      }
      if (e.author != kSttpId) {
        verdict(e, false, "only the STTP posts in a decision round");
        continue;
      }
      if (dec.abort) {
        bool ok = false;
        if (e.kind == EntryKind::Output && !output_seen) {
          try {
            ok = decode_output_record(ctx_->ring, e.payload) == expected;
          } catch (const DecodeError&) {
          }
          output_seen = true;
        }
        verdict(e, ok, ok ? "" : "STTP output differs from the threshold rule");
        if (!ok) sttp_consistent_ = false;
        continue;
      }
      bool ok = false;
      std::string why = "key release without a valid accusation";
      if (e.kind == EntryKind::KeyRelease) {
        try {
          auto kr = decode_key_release(*ctx_->he, e.payload);
          const bool wanted = newly_.count(kr.index) && !released_now.count(kr.index);
          if (wanted && kr.reason != newly_.at(kr.index)) {
            why = "key release gives the wrong reason";
          } else if (wanted && !secret_key_matches(*ctx_->he, ctx_->server_pks[kr.index], kr.sk)) {
            why = "released key does not match the server's public key";
          } else if (wanted) {
            ok = true;
            released_now.insert(kr.index);
            released_[kr.index] = std::move(kr.sk);
          }
        } catch (const DecodeError&) {
          why = "malformed key release";
        }
      }
      verdict(e, ok, ok ? "" : why);
      if (!ok) sttp_consistent_ = false;
    }

    for (const auto& [k, r] : newly_) {
      cheat_.insert(k);
      live_.erase(k);
    }
    if (dec.abort) {
      if (!output_seen) sttp_consistent_ = false;
      outcome_ = expected;
      newly_.clear();
      phase_ = Phase::Done;
      return;
    }
    for (auto k : dec.release) {
      if (!released_now.count(k)) sttp_consistent_ = false;
      targets_.insert(k);
    }
    newly_.clear();
    phase_ = Phase::Report;
  }

  // ---- recovery ---------------------------------------------------------------------

  bool report_opens(std::size_t k, ByteSpan body) const {
    try {
      const auto pairs = decode_report_body(*ctx_, body);
      if (pairs.size() != objects_.size()) return false;
      auto it = objects_.begin();
      for (const auto& p : pairs) {
        if (p.id != it->first) return false;
        if (!verify_open(*ctx_->ck, it->second.pub->comms[k], p.pair.value, p.pair.rand)) return false;
        ++it;
      }
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }

  void do_report(std::span<const Message> entries) {
    std::map<std::size_t, std::map<std::uint32_t, Bytes>> bodies;
    std::map<std::size_t, const Message*> report_entry;
    for (const auto& e : entries) {
      if (e.kind == EntryKind::Silent) {
        verdict(e, true, "deadline missed");
        continue;
      }
      if (!is_server(e.author) || !is_live(e.author) || e.kind != EntryKind::Report || report_entry.count(e.author)) {
        verdict(e, false, "unexpected entry in a report round");
        continue;
      }
      report_entry[e.author] = &e;
      try {
        for (auto& [target, body] : decode_report(e.payload)) bodies[e.author].emplace(target, std::move(body));
      } catch (const DecodeError&) {
        bodies[e.author].clear();
      }
    }

    std::map<std::size_t, Bytes> accepted;
    std::set<std::size_t> rejected_reporters;
    for (auto k : targets_) {
      std::vector<std::pair<std::size_t, std::optional<Bytes>>> reports;
      for (auto i : live_) {
        std::optional<Bytes> body;
        if (auto it = bodies.find(i); it != bodies.end()) {
          if (auto jt = it->second.find(static_cast<std::uint32_t>(k)); jt != it->second.end()) body = jt->second;
        }
        reports.emplace_back(i, std::move(body));
      }
      const auto res = resolve_reports(reports, [&](ByteSpan body) { return report_opens(k, body); });
      stats_.max_checks = std::max(stats_.max_checks, res.checks);
      for (auto i : res.flagged) {
        flag(i, FlagReason::BadReport);
        rejected_reporters.insert(i);
      }
      if (res.accepted) accepted[k] = *reports[*res.accepted].second;
    }
    for (const auto& [i, e] : report_entry) {
      const bool ok = !rejected_reporters.count(i);
      verdict(*e, ok, ok ? "" : "report rejected");
    }

    if (!newly_.empty()) {
      phase_ = Phase::Decide;
      return;
    }
    for (auto k : targets_) {
      auto it = accepted.find(k);
      if (it == accepted.end() || !report_opens(k, it->second)) {
        throw ProtocolError("commitment state diverged: no report opens server " + std::to_string(k) + "'s commitments");
      }
    }
    for (auto k : targets_) absorb(k, decode_report_body(*ctx_, accepted.at(k)));
    const bool interrupted = stage_ <= plan_.output_stage() && last_open_ && last_open_->stage == stage_ &&
                             !last_open_->failed.empty();
    if (interrupted) ++stats_.reopened_stages;
    targets_.clear();
    ++stats_.recoveries;
    phase_ = after_progress();
  }

  // The target's share becomes a public constant held by the designated server.
  void absorb(std::size_t k, const std::vector<ObjectPair>& pairs) {
    const std::size_t d = designated();
    auto it = objects_.begin();
    for (const auto& p : pairs) {
      auto& obj = it->second;
      WirePublic pub = pub_add_const(*ctx_, *obj.pub, p.pair.value, d);
      pub.retire(k);
      obj.pub = std::make_shared<const WirePublic>(std::move(pub));
      if (role_ == EngineRole::Server && self_ == d) obj.mine.value += p.pair.value;
      ++it;
    }
  }

  // ---- output -----------------------------------------------------------------------

  void do_final(std::span<const Message> entries) {
    const auto expected = expected_output();
    bool seen = false;
    for (const auto& e : entries) {
      if (e.kind == EntryKind::Silent) {
        verdict(e, true, "deadline missed");
        continue;
      }
      bool ok = false;
      if (e.author == kSttpId && e.kind == EntryKind::Output && !seen) {
        seen = true;
        try {
          ok = decode_output_record(ctx_->ring, e.payload) == expected;
        } catch (const DecodeError&) {
        }
        if (!ok) sttp_consistent_ = false;
      }
      verdict(e, ok, ok ? "" : "unexpected entry in the output round");
    }
    if (!seen) sttp_consistent_ = false;
    outcome_ = expected;
    phase_ = Phase::Done;
  }

  CessContextPtr ctx_;
  Circuit circuit_;
  CircuitPlan plan_;
  EngineRole role_;
  std::size_t self_;
  std::size_t n_ = 0;

  Phase phase_ = Phase::Setup;
  std::size_t stage_ = 0;
  std::set<std::size_t> live_;
  std::set<std::size_t> cheat_;
  std::map<std::size_t, FlagReason> newly_;
  std::set<std::size_t> targets_;
  std::map<std::size_t, SecretKey> released_;

  std::map<std::uint64_t, ObjectState> objects_;
  std::map<std::uint64_t, ObjectState> pending_inputs_;
  bool bundle_attached_ = false;

  std::optional<OpenRecord> last_open_;
  std::vector<RingElement> outputs_;
  std::optional<OutputRecord> outcome_;
  std::vector<EntryVerdict> verdicts_;
  std::vector<std::pair<std::uint64_t, Phase>> round_phases_;
  EngineStats stats_;
  bool sttp_consistent_ = true;
};

}  // namespace cessmpc
