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

// TCP transport. A hub process sequences rounds for a star of party
// connections: each party sends one SUBMIT per epoch (or BYE once it is
// done), the hub closes the round through RoundHub and answers every live
// connection with ROUND, which doubles as the epoch barrier.
//
// Frames are 4-byte big-endian lengths followed by a one-byte type.

#pragma once

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <netinet/in.h>
#include <netinet/tcp.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cessmpc/net/participant.hpp"
#include "cessmpc/net/round.hpp"

namespace cessmpc {

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FrameType : std::uint8_t { Hello = 1, Submit = 2, Bye = 3, Round = 4 };

using Clock = std::chrono::steady_clock;

namespace tcp {

struct Endpoint {
  std::string host;
  std::string port;
};

inline Endpoint parse_endpoint(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon + 1 == addr.size()) throw NetError("address must be host:port, got " + addr);
  Endpoint e{addr.substr(0, colon), addr.substr(colon + 1)};
  if (e.host.empty()) e.host = "127.0.0.1";
  return e;
}

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)), buf_(std::move(o.buf_)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
      buf_ = std::move(o.buf_);
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool open() const { return fd_ >= 0; }
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  void send_frame(ByteSpan payload) {
    Bytes out;
    put_frame(out, payload);
    std::size_t sent = 0;
    while (sent < out.size()) {
      const auto n = ::send(fd_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw NetError(std::string("send failed: ") + std::strerror(errno));
      sent += static_cast<std::size_t>(n);
    }
  }

  /// Reads whatever is available; false on orderly shutdown.
  bool fill() {
    std::uint8_t tmp[65536];
    for (;;) {
      const auto n = ::recv(fd_, tmp, sizeof tmp, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) throw NetError(std::string("recv failed: ") + std::strerror(errno));
      if (n == 0) return false;
      buf_.insert(buf_.end(), tmp, tmp + n);
      return true;
    }
  }

  std::optional<Bytes> next_frame() {
    if (buf_.size() < 4) return std::nullopt;
    const auto n = read_be32(buf_.data());
    if (buf_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
    Bytes frame(buf_.begin() + 4, buf_.begin() + 4 + n);
    buf_.erase(buf_.begin(), buf_.begin() + 4 + n);
    return frame;
  }

  /// Blocks until one frame arrives or the deadline passes.
  std::optional<Bytes> recv_frame(Clock::time_point deadline) {
    for (;;) {
      if (auto f = next_frame()) return f;
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
      if (left <= 0) return std::nullopt;
      pollfd p{fd_, POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(std::min<long long>(left, 1 << 30)));
      if (r < 0 && errno == EINTR) continue;
      if (r < 0) throw NetError("poll failed");
      if (r == 0) continue;
      if (!fill()) throw NetError("connection closed by peer");
    }
  }

 private:
  int fd_ = -1;
  Bytes buf_;
};

inline void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

inline Socket listen_on(const std::string& addr) {
  const auto ep = parse_endpoint(addr);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), ep.port.c_str(), &hints, &res) != 0 || !res) throw NetError("cannot resolve " + addr);
  Socket s(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
  int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const bool ok = s.open() && ::bind(s.fd(), res->ai_addr, res->ai_addrlen) == 0 && ::listen(s.fd(), 64) == 0;
  ::freeaddrinfo(res);
  if (!ok) throw NetError("cannot listen on " + addr + ": " + std::strerror(errno));
  return s;
}

inline std::uint16_t local_port(const Socket& s) {
  sockaddr_in a{};
  socklen_t len = sizeof a;
  ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&a), &len);
  return ntohs(a.sin_port);
}

inline Socket connect_to(const std::string& addr, std::chrono::milliseconds patience) {
  const auto ep = parse_endpoint(addr);
  const auto deadline = Clock::now() + patience;
  for (;;) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(ep.host.c_str(), ep.port.c_str(), &hints, &res) == 0 && res) {
      Socket s(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
      const bool ok = s.open() && ::connect(s.fd(), res->ai_addr, res->ai_addrlen) == 0;
      ::freeaddrinfo(res);
      if (ok) {
        set_nodelay(s.fd());
        return s;
      }
    }
    if (Clock::now() >= deadline) throw NetError("cannot connect to " + addr);
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

inline Bytes hello_message(PartyId id) {
  ByteWriter w;
  w.str("cessmpc-hello-v1");
  w.u32(id);
  return std::move(w).take();
}

inline Bytes encode_submit(std::uint64_t epoch, const std::vector<Message>& msgs) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(FrameType::Submit));
  w.u64(epoch);
  w.u32(static_cast<std::uint32_t>(msgs.size()));
  for (const auto& m : msgs) w.blob(encode_message(m));
  return std::move(w).take();
}

inline std::vector<Message> read_messages(ByteReader& r) {
  const auto n = r.u32();
  if (n > r.remaining() / 4) throw DecodeError("frame: bad message count");
  std::vector<Message> out;
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(decode_message(r.blob()));
  return out;
}

inline Bytes encode_round(const RoundOutput& out, PartyId to) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(FrameType::Round));
  w.u64(out.epoch);
  w.u32(static_cast<std::uint32_t>(out.posted.size()));
  for (const auto& m : out.posted) w.blob(encode_message(m));
  auto it = out.inboxes.find(to);
  const std::size_t k = it == out.inboxes.end() ? 0 : it->second.size();
  w.u32(static_cast<std::uint32_t>(k));
  for (std::size_t i = 0; i < k; ++i) w.blob(encode_message(it->second[i]));
  return std::move(w).take();
}

}  // namespace tcp

struct HubOptions {
  std::chrono::milliseconds timeout{2000};  // per round
  std::chrono::milliseconds latency{0};
  std::chrono::milliseconds join_timeout{60000};
  std::uint64_t max_rounds = 10000;
  std::function<std::string()> label;                 // phase of the round about to close
  std::function<void(const RoundOutput&)> observe;    // called after each round closes
};

struct HubResult {
  std::vector<Message> entries;
  Metrics metrics;
  std::size_t silent_marks = 0;
};

/// Star sequencer. Bind first (port 0 picks a free port), then serve.
class TcpHub {
 public:
  explicit TcpHub(const std::string& listen_addr) : listener_(tcp::listen_on(listen_addr)) {}

  std::uint16_t port() const { return tcp::local_port(listener_); }

  HubResult serve(const std::set<PartyId>& expected, RoundHub& hub, const HubOptions& opts = {}) {
    std::map<PartyId, tcp::Socket> conns = join(expected, hub.bulletin().pki(), opts.join_timeout);
    HubResult res;
    std::set<PartyId> active = expected;
    for (std::uint64_t epoch = 0; !active.empty(); ++epoch) {
      if (epoch >= opts.max_rounds) throw NetError("protocol did not finish within the round limit");
      const auto t0 = Clock::now();
      const auto deadline = t0 + opts.timeout;
      std::set<PartyId> pending = active;
      std::map<PartyId, std::vector<Message>> submitted;
      std::set<PartyId> silent;
      while (!pending.empty()) {
        std::vector<pollfd> fds;
        std::vector<PartyId> ids;
        for (auto id : pending) {
          // frames may already be buffered
          if (take_frames(id, conns.at(id), epoch, pending, active, submitted, res.metrics)) break;
          fds.push_back({conns.at(id).fd(), POLLIN, 0});
          ids.push_back(id);
        }
        if (pending.empty()) break;
        if (fds.size() != pending.size()) continue;
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
        if (left <= 0) break;
        const int r = ::poll(fds.data(), fds.size(), static_cast<int>(left));
        if (r < 0 && errno == EINTR) continue;
        if (r < 0) throw NetError("poll failed");
        for (std::size_t i = 0; i < fds.size(); ++i) {
          if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
          auto& sock = conns.at(ids[i]);
          bool alive = false;
          try {
            alive = sock.fill();
          } catch (const NetError&) {
          }
          if (!alive) {
            // dropped connection: silent now, gone afterwards
            pending.erase(ids[i]);
            active.erase(ids[i]);
            silent.insert(ids[i]);
            sock.close();
          }
        }
      }
      for (auto id : pending) silent.insert(id);
      if (active.empty() && submitted.empty()) break;
      const std::string phase = opts.label ? opts.label() : "";
      const auto out = hub.close_round(epoch, submitted, silent);
      res.silent_marks += silent.size();
      if (opts.observe) opts.observe(out);
      inject_latency(opts.latency);
      std::set<PartyId> lost;
      for (auto id : active) {
        try {
          conns.at(id).send_frame(tcp::encode_round(out, id));
        } catch (const NetError&) {
          lost.insert(id);
        }
      }
      for (auto id : lost) active.erase(id);
      const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
      res.metrics.count_round(phase.empty() ? (epoch == 0 ? "setup" : "done") : phase, secs);
    }
    res.entries = hub.bulletin().entries();
    return res;
  }

 private:
  std::map<PartyId, tcp::Socket> join(const std::set<PartyId>& expected, const Pki& pki,
                                      std::chrono::milliseconds patience) {
    std::map<PartyId, tcp::Socket> conns;
    std::vector<tcp::Socket> fresh;
    const auto deadline = Clock::now() + patience;
    while (conns.size() < expected.size()) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
      if (left <= 0) throw NetError("timed out waiting for parties to connect");
      std::vector<pollfd> fds{{listener_.fd(), POLLIN, 0}};
      for (auto& s : fresh) fds.push_back({s.fd(), POLLIN, 0});
      if (::poll(fds.data(), fds.size(), static_cast<int>(left)) < 0 && errno != EINTR) throw NetError("poll failed");
      if (fds[0].revents & POLLIN) {
        const int fd = ::accept(listener_.fd(), nullptr, nullptr);
        if (fd >= 0) {
          tcp::set_nodelay(fd);
          fresh.emplace_back(fd);
        }
      }
      for (std::size_t i = 1; i < fds.size(); ++i) {
        if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
        auto& s = fresh[i - 1];
        if (!s.fill()) {
          s.close();
          continue;
        }
        if (auto f = s.next_frame()) {
          std::optional<PartyId> who;
          try {
            ByteReader r(*f);
            if (r.u8() == static_cast<std::uint8_t>(FrameType::Hello)) {
              const auto id = r.u32();
              const auto sig = r.raw(crypto_sign_BYTES);
              auto it = pki.keys().find(id);
              if (expected.count(id) && !conns.count(id) && it != pki.keys().end() &&
                  verify_signature(it->second, tcp::hello_message(id), sig)) {
                who = id;
              }
            }
          } catch (const DecodeError&) {
          }
          if (who) {
            conns.emplace(*who, std::move(s));
          } else {
            s.close();
          }
        }
      }
      std::erase_if(fresh, [](const tcp::Socket& s) { return !s.open(); });
    }
    return conns;
  }

  // Consumes buffered frames of one party; true if `pending` changed.
  static bool take_frames(PartyId id, tcp::Socket& sock, std::uint64_t epoch, std::set<PartyId>& pending,
                          std::set<PartyId>& active, std::map<PartyId, std::vector<Message>>& submitted,
                          Metrics& metrics) {
    while (auto f = sock.next_frame()) {
      try {
        ByteReader r(*f);
        const auto type = r.u8();
        const auto e = r.u64();
        if (e != epoch) continue;  // late frame from a round already closed
        if (type == static_cast<std::uint8_t>(FrameType::Bye)) {
          pending.erase(id);
          active.erase(id);
          return true;
        }
        if (type != static_cast<std::uint8_t>(FrameType::Submit)) continue;
        auto msgs = tcp::read_messages(r);
        std::erase_if(msgs, [&](const Message& m) { return m.author != id || m.epoch != epoch; });
        for (const auto& m : msgs) metrics.count_message(m);
        ++metrics.parties[id].rounds;
        submitted[id] = std::move(msgs);
        pending.erase(id);
        return true;
      } catch (const DecodeError&) {
      }
    }
    return false;
  }

  tcp::Socket listener_;
};

struct TcpPartyOptions {
  std::chrono::milliseconds connect_timeout{30000};
  std::chrono::milliseconds round_timeout{120000};  // how long to wait for the hub's ROUND
};

/// Drives one participant against a hub until it finishes.
inline void run_tcp_party(Participant& party, const SigningKey& key, const std::string& hub_addr,
                          const TcpPartyOptions& opts = {}) {
  auto sock = tcp::connect_to(hub_addr, opts.connect_timeout);
  {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(FrameType::Hello));
    w.u32(party.id());
    w.raw(key.sign(tcp::hello_message(party.id())));
    sock.send_frame(w.bytes());
  }
  std::vector<Message> prev, inbox;
  for (std::uint64_t epoch = 0;; ++epoch) {
    if (party.finished()) {
      ByteWriter w;
      w.u8(static_cast<std::uint8_t>(FrameType::Bye));
      w.u64(epoch);
      sock.send_frame(w.bytes());
      return;
    }
    std::vector<Message> signed_msgs;
    for (auto& s : party.step(epoch, prev, inbox)) signed_msgs.push_back(sign_submission(key, party.id(), epoch, std::move(s)));
    sock.send_frame(tcp::encode_submit(epoch, signed_msgs));
    for (;;) {
      auto f = sock.recv_frame(Clock::now() + opts.round_timeout);
      if (!f) throw NetError("hub did not close round " + std::to_string(epoch));
      ByteReader r(*f);
      if (r.u8() != static_cast<std::uint8_t>(FrameType::Round)) continue;
      if (r.u64() != epoch) continue;
      prev = tcp::read_messages(r);
      inbox = tcp::read_messages(r);
      break;
    }
  }
}

}  // namespace cessmpc
