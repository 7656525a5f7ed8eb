#pragma once

// Random schema-valid protocol messages for round-trip properties.

#include <random>
#include <string>

#include "crackmesh/engine/digest.hpp"
#include "crackmesh/protocol/messages.hpp"

namespace crackmesh::testing {

class MessageGenerator {
 public:
  explicit MessageGenerator(unsigned seed) : rng_(seed) {}

  protocol::Message next() {
    switch (rng_() % 10) {
      case 0: return make_register();
      case 1: return protocol::RegisterAck{protocol::kProtocolVersion, text()};
      case 2: return make_assign();
      case 3: return protocol::TaskAccept{id()};
      case 4: return protocol::Progress{id(), id(), real()};
      case 5: {
        auto algo = algorithm();
        return protocol::Cracked{id(), engine::digest(algo, bytes()).str(), bytes()};
      }
      case 6: {
        protocol::TaskDone d{id(), static_cast<protocol::TaskOutcome>(rng_() % 3), std::nullopt};
        if (rng_() % 2) d.detail = text();
        return d;
      }
      case 7: return protocol::ErrorMessage{text(), text()};
      case 8: return protocol::Ping{};
      default: return protocol::Pong{};
    }
  }

 private:
  std::uint64_t id() {
    // mix small values and values past 2^53
    return rng_() % 3 == 0 ? (std::uint64_t{rng_()} << 32 | rng_()) : rng_() % 1000;
  }
  double real() { return std::uniform_real_distribution<double>(0, 1e12)(rng_); }
  HashAlgorithm algorithm() { return kAllAlgorithms[rng_() % 3]; }

  std::string text() {
    static const char* kAlphabet = "abcXYZ019 _-\"\\/{}:,\xc3\xa9";
    std::string s;
    auto n = rng_() % 12;
    for (unsigned i = 0; i < n; ++i) {
      auto c = kAlphabet[rng_() % 20];
      s += c;
      if (c == '\xc3') s += '\xa9';
    }
    return s;
  }

  // arbitrary bytes, including NUL and non-UTF-8
  std::string bytes() {
    std::string s;
    auto n = rng_() % 16;
    for (unsigned i = 0; i < n; ++i) s += static_cast<char>(rng_() % 256);
    return s;
  }

  std::vector<std::string> names() {
    std::vector<std::string> out;
    auto n = 1 + rng_() % 3;
    for (unsigned i = 0; i < n; ++i) out.push_back(text());
    return out;
  }

  protocol::Message make_register() {
    protocol::Register r;
    r.v = static_cast<int>(rng_() % 3);
    r.agent_name = text();
    r.os = text();
    r.arch = text();
    r.engine = rng_() % 2 ? EngineKind::kBuiltin : EngineKind::kExternal;
    for (auto a : kAllAlgorithms) {
      if (rng_() % 2) r.benchmark[a] = real();
    }
    return r;
  }

  protocol::Message make_assign() {
    protocol::TaskAssign m;
    m.task_id = id();
    m.job_id = id();
    m.algorithm = algorithm();
    auto nh = 1 + rng_() % 4;
    for (unsigned i = 0; i < nh; ++i) m.hashes.push_back(engine::digest(m.algorithm, bytes()));
    switch (rng_() % 4) {
      case 0: {
        unsigned len = 1 + rng_() % 32;
        m.attack = BruteForce{1, len};
        BigInt total = keyspace_size(len);
        BigInt start = total * (rng_() % 1000) / 1000;
        m.keyspace = protocol::KeyspaceBounds{len, start, total};
        break;
      }
      case 1:
        m.attack = Dictionary{names()};
        m.wordlists = std::get<Dictionary>(m.attack).wordlists;
        break;
      case 2:
        m.attack = RuleBased{names(), names()};
        m.rules = std::get<RuleBased>(m.attack).rules;
        if (rng_() % 2) m.wordlists = names();
        break;
      default:
        m.attack = Combinator{text(), text()};
        break;
    }
    return m;
  }

  std::mt19937 rng_;
};

}  // namespace crackmesh::testing
