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

// cessmpc command line: offline setup, the four online roles, auditing,
// model training and benchmarks.
//
// With --transport sim, run-client drives every party in one process. With
// --transport tcp, run-sttp hosts the round hub and the STTP, and each server
// and the client connect to it as separate processes.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "cessmpc/audit/audit.hpp"
#include "cessmpc/mlapp/bench.hpp"

namespace cessmpc::cli {
namespace {

using nlohmann::json;

struct Common {
  std::string transport = "sim";
  std::uint64_t seed = 1;
  int latency_ms = 0;
  int timeout_ms = 2000;
  std::string metrics_out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--transport", c.transport, "sim or tcp")->check(CLI::IsMember({"sim", "tcp"}));
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--latency-ms", c.latency_ms, "latency injected after every round");
  app->add_option("--timeout-ms", c.timeout_ms, "per-round timeout before a party is marked silent (tcp)");
  app->add_option("--metrics-out", c.metrics_out, "write JSON metrics here");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) return;
  write_text(path, j.dump(2) + "\n");
}

Seed seed_from_hex(const std::string& hex) {
  const auto b = from_hex(hex);
  if (b.size() != 32) throw std::runtime_error("bad seed in key file");
  Seed s{};
  std::copy(b.begin(), b.end(), s.begin());
  return s;
}

// ---- setup directory ---------------------------------------------------------------
//
// session.json        public header (also the transcript header)
// circuit.txt         the circuit the offline material was sized for
// <party>.key         signing and protocol seeds of one party
// server<j>.bundle    offline bundle of server j
// sttp.escrow         sealed decryption keys, sttp.sealkey opens it
// client.package      mask shares and triple publics for the client

std::string key_path(const std::string& dir, PartyId id) { return dir + "/" + party_name(id) + ".key"; }

void write_party_key(const std::string& dir, const Session& s, PartyId id) {
  json j{{"id", id},
         {"signing_seed", to_hex(derive_seed(s.params.master, "signing", id))},
         {"party_seed", to_hex(s.party_seed(id))}};
  write_text(key_path(dir, id), j.dump(2) + "\n");
}

struct PartyKey {
  SigningKey signing;
  Seed seed;
};

PartyKey read_party_key(const std::string& dir, PartyId id) {
  const auto j = json::parse(read_text(key_path(dir, id)));
  if (j.at("id").get<PartyId>() != id) throw std::runtime_error("key file belongs to another party");
  return {SigningKey(seed_from_hex(j.at("signing_seed").get<std::string>())),
          seed_from_hex(j.at("party_seed").get<std::string>())};
}

struct LoadedSetup {
  Bytes header;
  PublicSetup pub;
  Circuit circuit;
};

LoadedSetup load_setup(const std::string& dir, const std::string& circuit_path) {
  LoadedSetup ls;
  ls.header = read_file_bytes(dir + "/session.json");
  ls.pub = parse_session_header(ls.header);
  const auto path = circuit_path.empty() ? dir + "/circuit.txt" : circuit_path;
  ls.circuit = parse_circuit(read_text(path), ls.pub.ctx->ring->q());
  if (circuit_digest(ls.circuit) != ls.pub.circuit) throw std::runtime_error("circuit does not match the session");
  return ls;
}

std::set<PartyId> online_parties(std::size_t servers) {
  std::set<PartyId> ids;
  for (auto id : session_parties(servers)) {
    if (id != kHubId) ids.insert(id);
  }
  return ids;
}

// ---- inputs and outputs --------------------------------------------------------------

/// One line per circuit input: a single residue (all slots) or N residues.
std::vector<RingElement> read_inputs(const std::string& path, const Circuit& c, const RingPtr& ring) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<RingElement> out;
  std::string line;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<u64> v;
    u64 x = 0;
    while (ls >> x) v.push_back(x % ring->q());
    if (v.empty()) continue;
    if (v.size() == 1) {
      out.push_back(RingElement::constant(ring, v[0]));
    } else if (v.size() == ring->degree()) {
      out.push_back(slot_encode(ring, v));
    } else {
      throw std::runtime_error("input line " + std::to_string(out.size() + 1) + ": need 1 or N values");
    }
  }
  if (out.size() != c.inputs) throw std::runtime_error("input file has the wrong number of lines");
  return out;
}

json output_json(const std::optional<OutputRecord>& o) {
  if (!o) return json{{"ok", false}, {"error", "no output"}};
  json values = json::array();
  for (const auto& v : o->values) values.push_back(slot_decode(v));
  return json{{"ok", o->ok}, {"cheaters", o->cheaters}, {"outputs", values}};
}

std::vector<AdversarySpec> parse_adversaries(const std::vector<std::string>& specs) {
  // server:behaviour[:gate]
  std::vector<AdversarySpec> out;
  for (const auto& s : specs) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() < 2 || parts.size() > 3) throw std::runtime_error("adversary spec is server:behaviour[:gate]");
    AdversarySpec a;
    a.server = std::stoul(parts[0]);
    a.behaviour = parse_behaviour(parts[1]);
    if (parts.size() == 3) a.gate = static_cast<std::uint32_t>(std::stoul(parts[2]));
    a.target = a.server == 0 ? 1 : 0;
    out.push_back(a);
  }
  return out;
}

void save_transcripts(const std::string& path, const std::vector<Transcript>& ts) {
  if (path.empty()) return;
  if (ts.size() == 1) {
    save_transcript(path, ts[0]);
    return;
  }
  for (std::size_t i = 0; i < ts.size(); ++i) save_transcript(path + "." + std::to_string(i), ts[i]);
}

// ---- run-offline ----------------------------------------------------------------------

struct OfflineArgs {
  Common common;
  std::string circuit, model, out = "setup";
  std::size_t servers = 3, degree = 1024;
};

int cmd_offline(const OfflineArgs& a) {
  Circuit circuit;
  SessionParams sp;
  sp.degree = a.degree;
  sp.servers = a.servers;
  sp.master = seed_from_u64(a.common.seed);
  if (!a.model.empty()) {
    const auto mf = ml::load_model(a.model);
    if (mf.codec.modulus != sp.modulus) throw std::runtime_error("model modulus differs from the ring modulus");
    circuit = ml::build_dot_circuit(mf.model.dims(), sp.modulus);
  } else if (!a.circuit.empty()) {
    circuit = parse_circuit(read_text(a.circuit), sp.modulus);
  } else {
    throw std::runtime_error("run-offline needs --circuit or --model");
  }
  const Session session = make_session(sp);
  const auto t0 = std::chrono::steady_clock::now();
  const auto offline =
      offline_run(session.ctx, session.offline_keys, offline_params_for(circuit, sp.servers), session.offline_seeds());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::filesystem::create_directories(a.out);
  const auto header = session_header(session, circuit);
  write_bytes_file(a.out + "/session.json", header);
  write_text(a.out + "/circuit.txt", format_circuit(circuit));
  for (std::size_t j = 0; j < sp.servers; ++j) {
    save_offline_bundle(a.out + "/server" + std::to_string(j) + ".bundle", *session.ctx, offline.bundles[j]);
  }
  for (auto id : session_parties(sp.servers)) write_party_key(a.out, session, id);
  const auto seal_seed = derive_seed(sp.master, "escrow-seal");
  Escrow::SealKey seal_key{};
  std::copy(seal_seed.begin(), seal_seed.end(), seal_key.begin());
  write_bytes_file(a.out + "/sttp.escrow", session.escrow().seal(*session.ctx->he, seal_key, derive_seed(sp.master, "escrow-nonce")));
  write_text(a.out + "/sttp.sealkey", to_hex(seal_key) + "\n");
  ByteWriter pkg;
  write_client_package(pkg, *session.ctx, make_client_package(*session.ctx, offline.bundles));
  write_bytes_file(a.out + "/client.package", pkg.bytes());

  json m{{"offline_seconds", secs},
         {"rounds", offline.metrics.rounds},
         {"broadcast_bytes", offline.metrics.broadcast_bytes},
         {"delivery_bytes", offline.metrics.delivery_bytes},
         {"masks", offline_params_for(circuit, sp.servers).masks},
         {"triples", offline_params_for(circuit, sp.servers).triples}};
  write_json(a.common.metrics_out, m);
  std::cout << "setup written to " << a.out << " (" << circuit.multiplications() << " multiplications, " << secs
            << " s)\n";
  return 0;
}

// ---- run-client -------------------------------------------------------------------------

struct ClientArgs {
  Common common;
  std::string setup = "setup", circuit, inputs, model, data, hub, transcript_out, output_out;
  std::size_t servers = 3, degree = 1024;
  std::vector<std::string> adversaries;
};

int cmd_client_logreg(const ClientArgs& a) {
  const auto mf = ml::load_model(a.model);
  const auto data = ml::load_csv(a.data, mf.model.dims());
  json report;
  std::vector<int> labels;
  if (a.common.transport == "sim") {
    ml::MpcConfig cfg;
    cfg.session.degree = a.degree;
    cfg.session.servers = a.servers;
    cfg.session.modulus = mf.codec.modulus;
    cfg.session.master = seed_from_u64(a.common.seed);
    cfg.latency = std::chrono::milliseconds(a.common.latency_ms);
    cfg.adversaries = parse_adversaries(a.adversaries);
    const auto res = ml::mpc_logreg(mf.model, mf.codec, data.x, cfg);
    if (!res.ok) throw std::runtime_error("protocol aborted");
    labels = res.labels;
    save_transcripts(a.transcript_out, res.transcripts);
    json m = metrics_json(res.metrics);
    m["offline_seconds"] = res.offline_seconds;
    m["amortized_seconds"] = res.amortized_seconds();
    m["chunks"] = res.chunks;
    write_json(a.common.metrics_out, m);
  } else {
    const auto ls = load_setup(a.setup, "");
    const auto& ring = ls.pub.ctx->ring;
    if (ls.circuit != ml::build_dot_circuit(mf.model.dims(), ring->q())) {
      throw std::runtime_error("setup was not made for this model");
    }
    const auto inputs = ml::logreg_inputs(mf.model, mf.codec, data.x, ring);
    const auto key = read_party_key(a.setup, kClientId);
    const auto pkg_bytes = read_file_bytes(a.setup + "/client.package");
    ByteReader r(pkg_bytes);
    ClientNode client(ls.pub.ctx, ls.circuit, inputs, read_client_package(r, *ls.pub.ctx), key.seed);
    run_tcp_party(client, key.signing, a.hub);
    if (!client.result() || !client.result()->ok) throw std::runtime_error("protocol aborted");
    const auto slots = slot_decode(client.result()->values.at(0));
    labels = ml::client_postprocess(std::vector<u64>(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(data.rows())),
                                    mf.codec);
  }
  report["labels"] = labels;
  report["accuracy"] = ml::accuracy(labels, data.y);
  report["rows"] = data.rows();
  std::cout << report.dump() << "\n";
  write_json(a.output_out, report);
  return 0;
}

int cmd_client(const ClientArgs& a) {
  if (!a.model.empty()) return cmd_client_logreg(a);
  if (a.inputs.empty()) throw std::runtime_error("run-client needs --inputs (or --model and --data)");
  if (a.common.transport == "sim") {
    SessionParams sp;
    sp.degree = a.degree;
    sp.servers = a.servers;
    sp.master = seed_from_u64(a.common.seed);
    if (a.circuit.empty()) throw std::runtime_error("sim transport needs --circuit");
    const auto circuit = parse_circuit(read_text(a.circuit), sp.modulus);
    const auto ring = make_ring(RingParams{sp.degree, sp.modulus, 0});
    const auto inputs = read_inputs(a.inputs, circuit, ring);
    ProtocolOptions opts;
    opts.adversaries = parse_adversaries(a.adversaries);
    opts.sim.latency = std::chrono::milliseconds(a.common.latency_ms);
    const auto run = run_protocol(sp, circuit, inputs, opts);
    if (!a.transcript_out.empty()) save_transcript(a.transcript_out, run.transcript);
    write_json(a.common.metrics_out, metrics_json(run.metrics));
    const auto out = output_json(run.output);
    std::cout << out.dump() << "\n";
    write_json(a.output_out, out);
    return run.output && run.output->ok ? 0 : 3;
  }
  const auto ls = load_setup(a.setup, a.circuit);
  const auto inputs = read_inputs(a.inputs, ls.circuit, ls.pub.ctx->ring);
  const auto key = read_party_key(a.setup, kClientId);
  const auto pkg_bytes = read_file_bytes(a.setup + "/client.package");
  ByteReader r(pkg_bytes);
  ClientNode client(ls.pub.ctx, ls.circuit, inputs, read_client_package(r, *ls.pub.ctx), key.seed);
  run_tcp_party(client, key.signing, a.hub);
  const auto out = output_json(client.result());
  std::cout << out.dump() << "\n";
  write_json(a.output_out, out);
  return client.result() && client.result()->ok ? 0 : 3;
}

// ---- run-server ---------------------------------------------------------------------------

struct ServerArgs {
  Common common;
  std::string setup = "setup", circuit, offline, hub, behaviour = "honest";
  std::size_t index = 0;
  std::optional<std::uint32_t> gate;
};

int cmd_server(const ServerArgs& a) {
  if (a.common.transport != "tcp") throw std::runtime_error("run-server is a tcp role; sim runs every party in run-client");
  const auto ls = load_setup(a.setup, a.circuit);
  const auto id = static_cast<PartyId>(a.index);
  const auto key = read_party_key(a.setup, id);
  const auto bundle = load_offline_bundle(
      a.offline.empty() ? a.setup + "/server" + std::to_string(a.index) + ".bundle" : a.offline, *ls.pub.ctx);
  std::unique_ptr<ServerNode> node;
  const auto behaviour = parse_behaviour(a.behaviour);
  if (behaviour == Behaviour::Honest) {
    node = std::make_unique<ServerNode>(ls.pub.ctx, ls.circuit, a.index, bundle, key.seed);
  } else {
    AdversarySpec spec{a.index, behaviour, a.gate, 1, a.index == 0 ? 1u : 0u};
    node = std::make_unique<AdversarialServer>(ls.pub.ctx, ls.circuit, bundle, key.seed, spec);
  }
  run_tcp_party(*node, key.signing, a.hub);
  std::cout << party_name(id) << " done\n";
  return 0;
}

// ---- run-sttp (and the round hub) --------------------------------------------------------

struct SttpArgs {
  Common common;
  std::string setup = "setup", circuit, escrow, seal_key, listen = "127.0.0.1:7400", transcript_out;
};

int cmd_sttp(const SttpArgs& a) {
  if (a.common.transport != "tcp") throw std::runtime_error("run-sttp is a tcp role; sim runs every party in run-client");
  const auto ls = load_setup(a.setup, a.circuit);
  const auto& ctx = ls.pub.ctx;
  Escrow::SealKey seal{};
  const auto sk_hex = read_text(a.seal_key.empty() ? a.setup + "/sttp.sealkey" : a.seal_key);
  const auto sk_bytes = from_hex(sk_hex.substr(0, sk_hex.find_first_of("\r\n")));
  if (sk_bytes.size() != seal.size()) throw std::runtime_error("bad seal key");
  std::copy(sk_bytes.begin(), sk_bytes.end(), seal.begin());
  const auto escrow =
      Escrow::unseal(*ctx->he, seal, read_file_bytes(a.escrow.empty() ? a.setup + "/sttp.escrow" : a.escrow));

  const auto sttp_key = read_party_key(a.setup, kSttpId);
  const auto hub_key = read_party_key(a.setup, kHubId);
  RoundHub hub(ls.pub.pki, hub_key.signing);
  TcpHub tcp_hub(a.listen);
  const std::string addr = "127.0.0.1:" + std::to_string(tcp_hub.port());
  std::cout << "hub listening on port " << tcp_hub.port() << std::endl;

  ProtocolEngine observer(ctx, ls.circuit, EngineRole::Auditor);
  HubOptions opts;
  opts.timeout = std::chrono::milliseconds(a.common.timeout_ms);
  opts.latency = std::chrono::milliseconds(a.common.latency_ms);
  opts.label = [&] { return std::string(phase_name(observer.phase())); };
  opts.observe = [&](const RoundOutput& out) {
    if (!observer.finished()) observer.process_round(out.epoch, out.posted);
  };

  SttpNode sttp(ctx, ls.circuit, escrow);
  std::string sttp_error;
  std::thread sttp_thread([&] {
    try {
      run_tcp_party(sttp, sttp_key.signing, addr);
    } catch (const std::exception& e) {
      sttp_error = e.what();
    }
  });
  HubResult served;
  try {
    served = tcp_hub.serve(online_parties(ctx->parties()), hub, opts);
  } catch (...) {
    sttp_thread.join();
    throw;
  }
  sttp_thread.join();
  if (!sttp_error.empty()) throw std::runtime_error("sttp: " + sttp_error);

  Transcript t{ls.header, served.entries};
  if (!a.transcript_out.empty()) save_transcript(a.transcript_out, t);
  write_json(a.common.metrics_out, metrics_json(served.metrics));
  const auto& outcome = sttp.engine().outcome();
  json summary{{"outcome", outcome && outcome->ok ? "ok" : "abort"},
               {"cheaters", sttp.engine().cheat_list()},
               {"rounds", served.metrics.rounds},
               {"silent_marks", served.silent_marks}};
  std::cout << summary.dump() << "\n";
  return 0;
}

// ---- run-audit ----------------------------------------------------------------------------

int cmd_audit(const std::string& transcript, const std::string& circuit_path, const std::string& out) {
  const auto t = load_transcript(transcript);
  const auto pub = parse_session_header(t.header);
  const auto circuit = parse_circuit(read_text(circuit_path), pub.ctx->ring->q());
  const auto report = audit(t, circuit);
  const auto j = audit_json(report);
  std::cout << j.dump(2) << "\n";
  write_json(out, j);
  return report.status() == "incomplete" ? 2 : 0;
}

// ---- train ---------------------------------------------------------------------------------

struct TrainArgs {
  std::string dataset = "iris", data_dir = "data", model_out = "model.txt", test_out;
  std::uint64_t split_seed = 1;
  ml::TrainConfig train;
};

int cmd_train(const TrainArgs& a) {
  const auto lc = a.dataset == "iris" ? ml::iris_case(a.data_dir) : ml::breast_cancer_case(a.data_dir, a.split_seed);
  const ml::FixedPointCodec codec;
  ml::save_model(a.model_out, lc.model, codec);
  if (!a.test_out.empty()) {
    std::ofstream out(a.test_out);
    ml::write_csv(out, lc.test);
  }
  json j{{"train_rows", lc.train.rows()},
         {"test_rows", lc.test.rows()},
         {"train_accuracy", ml::accuracy(ml::float_predictions(lc.model, lc.train.x), lc.train.y)},
         {"test_accuracy", ml::accuracy(ml::float_predictions(lc.model, lc.test.x), lc.test.y)}};
  std::cout << j.dump() << "\n";
  return 0;
}

// ---- bench ---------------------------------------------------------------------------------

int cmd_bench(const Common& c, ml::BenchConfig cfg) {
  cfg.seed = c.seed;
  cfg.latency = std::chrono::milliseconds(c.latency_ms);
  cfg.transport = c.transport == "tcp" ? ml::Transport::Tcp : ml::Transport::Sim;
  const auto report = ml::bench(cfg);
  write_json(c.metrics_out, report);
  json brief = report;
  brief.erase("metrics");
  for (const char* k : {"honest", "recovery"}) {
    if (brief.contains(k)) brief[k].erase("metrics");
  }
  std::cout << brief.dump(2) << "\n";
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Robust verifiable MPC with an STTP: offline setup, online roles, audit and benchmarks"};
  app.require_subcommand(1);

  OfflineArgs off;
  auto* c_off = app.add_subcommand("run-offline", "run the offline phase and write a setup directory");
  add_common(c_off, off.common);
  c_off->add_option("--circuit", off.circuit, "circuit file");
  c_off->add_option("--model", off.model, "size the setup for this logistic-regression model instead");
  c_off->add_option("--out", off.out, "setup directory");
  c_off->add_option("--servers", off.servers, "number of servers")->check(CLI::Range(1, 64));
  c_off->add_option("--degree", off.degree, "ring degree N (slot count)");

  ClientArgs cl;
  auto* c_cl = app.add_subcommand("run-client", "supply inputs and read the output");
  add_common(c_cl, cl.common);
  c_cl->add_option("--setup", cl.setup, "setup directory (tcp)");
  c_cl->add_option("--circuit", cl.circuit, "circuit file");
  c_cl->add_option("--inputs", cl.inputs, "input file: one line per input, 1 or N residues");
  c_cl->add_option("--model", cl.model, "logistic-regression model file");
  c_cl->add_option("--data", cl.data, "CSV rows to classify");
  c_cl->add_option("--hub,--servers", cl.hub, "hub address host:port (tcp)");
  c_cl->add_option("--parties", cl.servers, "number of servers (sim)");
  c_cl->add_option("--degree", cl.degree, "ring degree N (sim)");
  c_cl->add_option("--adversary", cl.adversaries, "server:behaviour[:gate] (sim)");
  c_cl->add_option("--transcript-out", cl.transcript_out, "write the bulletin transcript (sim)");
  c_cl->add_option("--output-out", cl.output_out, "write the output as JSON");

  ServerArgs sv;
  auto* c_sv = app.add_subcommand("run-server", "one computing server (tcp)");
  add_common(c_sv, sv.common);
  c_sv->add_option("--index", sv.index, "server index")->required();
  c_sv->add_option("--setup", sv.setup, "setup directory");
  c_sv->add_option("--offline", sv.offline, "offline bundle (default: from the setup directory)");
  c_sv->add_option("--circuit", sv.circuit, "circuit file (default: from the setup directory)");
  c_sv->add_option("--hub,--peers", sv.hub, "hub address host:port")->required();
  c_sv->add_option("--behaviour", sv.behaviour, "honest or a misbehaviour, for testing");
  c_sv->add_option("--gate", sv.gate, "gate the misbehaviour targets");

  SttpArgs st;
  auto* c_st = app.add_subcommand("run-sttp", "the STTP and the round hub (tcp)");
  add_common(c_st, st.common);
  c_st->add_option("--setup", st.setup, "setup directory");
  c_st->add_option("--circuit", st.circuit, "circuit file (default: from the setup directory)");
  c_st->add_option("--escrow", st.escrow, "sealed escrow (default: from the setup directory)");
  c_st->add_option("--seal-key", st.seal_key, "escrow seal key file");
  c_st->add_option("--listen", st.listen, "hub listen address host:port");
  c_st->add_option("--transcript-out", st.transcript_out, "write the bulletin transcript");

  std::string au_transcript, au_circuit, au_out;
  auto* c_au = app.add_subcommand("run-audit", "verify a transcript and recompute the cheat list");
  c_au->add_option("--transcript", au_transcript, "transcript file")->required();
  c_au->add_option("--circuit", au_circuit, "circuit file")->required();
  c_au->add_option("--out", au_out, "write the report as JSON");

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "train a logistic-regression model on a fixture dataset");
  c_tr->add_option("--dataset", tr.dataset, "iris or breast-cancer")->check(CLI::IsMember({"iris", "breast-cancer"}));
  c_tr->add_option("--data-dir", tr.data_dir, "directory with the fixture CSVs");
  c_tr->add_option("--model-out", tr.model_out, "model file to write");
  c_tr->add_option("--test-out", tr.test_out, "write the test split as CSV");
  c_tr->add_option("--split-seed", tr.split_seed, "breast-cancer shuffle seed");
  c_tr->add_option("--lr", tr.train.learning_rate, "learning rate");
  c_tr->add_option("--epochs", tr.train.epochs, "gradient-descent epochs");

  Common bc;
  ml::BenchConfig bcfg;
  auto* c_b = app.add_subcommand("bench", "run a benchmark scenario");
  add_common(c_b, bc);
  c_b->add_option("--scenario", bcfg.scenario, "scenario")->check(CLI::IsMember(ml::bench_scenarios()));
  c_b->add_option("--degree", bcfg.degree, "ring degree N (slot count)");
  c_b->add_option("--servers", bcfg.servers, "number of servers");
  c_b->add_flag("--reduced", bcfg.reduced, "Network-A 64-16-16-4 instead of 784-128-128-10");
  c_b->add_option("--data-dir", bcfg.data_dir, "directory with the fixture CSVs");
  c_b->add_option("--split-seed", bcfg.split_seed, "breast-cancer shuffle seed");

  CLI11_PARSE(app, argc, argv);
  if (*c_off) return cmd_offline(off);
  if (*c_cl) return cmd_client(cl);
  if (*c_sv) return cmd_server(sv);
  if (*c_st) return cmd_sttp(st);
  if (*c_au) return cmd_audit(au_transcript, au_circuit, au_out);
  if (*c_tr) return cmd_train(tr);
  if (*c_b) return cmd_bench(bc, bcfg);
  return 1;
}

}  // namespace
}  // namespace cessmpc::cli

int main(int argc, char** argv) {
  try {
    return cessmpc::cli::run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
