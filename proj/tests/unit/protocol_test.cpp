#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "crackmesh/common/error.hpp"
#include "crackmesh/engine/digest.hpp"
#include "crackmesh/protocol/codec.hpp"
#include "message_gen.hpp"

namespace crackmesh::protocol {
namespace {

using nlohmann::json;

ErrorCode decode_error(std::string_view frame, std::string* field = nullptr) {
  try {
    decode(frame);
  } catch (const Error& e) {
    if (field) *field = e.field();
    return e.code();
  }
  ADD_FAILURE() << "decoded: " << frame;
  return ErrorCode::kStorage;
}

TEST(CodecTest, PingIsMinimal) { EXPECT_EQ(encode(Ping{}), R"({"type":"ping"})"); }

TEST(CodecTest, RegisterCarriesSchemaFields) {
  Register r;
  r.agent_name = "rpi5";
  r.os = "linux";
  r.arch = "aarch64";
  r.benchmark = {{HashAlgorithm::kMd5, 1.5e6}, {HashAlgorithm::kSha256, 3e5}};
  auto j = json::parse(encode(r));
  EXPECT_EQ(j["type"], "register");
  EXPECT_EQ(j["v"], 1);
  EXPECT_EQ(j["agent_name"], "rpi5");
  EXPECT_EQ(j["os"], "linux");
  EXPECT_EQ(j["arch"], "aarch64");
  EXPECT_EQ(j["engine"], "builtin");
  EXPECT_EQ(j["benchmark"]["md5"], 1.5e6);
  EXPECT_EQ(j["benchmark"]["sha256"], 3e5);
}

TEST(CodecTest, KeyspaceBoundsAreDecimalStrings) {
  TaskAssign m;
  m.task_id = 4;
  m.job_id = 2;
  m.attack = BruteForce{2, 2};
  m.hashes = {engine::digest(HashAlgorithm::kMd5, "zq")};
  m.keyspace = KeyspaceBounds{2, 0, keyspace_size(2)};
  auto j = json::parse(encode(m));
  EXPECT_EQ(j["keyspace"]["start"], "0");
  EXPECT_EQ(j["keyspace"]["end"], "9025");
  EXPECT_EQ(j["attack"]["mode"], "brute");
  EXPECT_EQ(std::get<TaskAssign>(decode(encode(m))), m);
}

TEST(CodecTest, CrackedPlaintextTravelsAsHex) {
  Cracked c{1, engine::digest(HashAlgorithm::kMd5, std::string("\0\xff", 2)).str(),
            std::string("\0\xff", 2)};
  auto j = json::parse(encode(c));
  EXPECT_EQ(j["plaintext_hex"], "00ff");
  EXPECT_EQ(std::get<Cracked>(decode(encode(c))), c);
}

TEST(CodecTest, TypedErrors) {
  EXPECT_EQ(decode_error(R"({"type":"warp"})"), ErrorCode::kUnknownType);
  EXPECT_EQ(decode_error("not json"), ErrorCode::kMalformedFrame);
  EXPECT_EQ(decode_error("[1,2]"), ErrorCode::kMalformedFrame);
  EXPECT_EQ(decode_error(R"({"kind":"ping"})"), ErrorCode::kMalformedFrame);

  std::string field;
  TaskAssign base;
  base.task_id = 1;
  base.job_id = 1;
  base.attack = Dictionary{{"w"}};
  base.hashes = {engine::digest(HashAlgorithm::kMd5, "a")};
  auto assign = json::parse(encode(base));
  assign.erase("hashes");
  EXPECT_EQ(decode_error(assign.dump(), &field), ErrorCode::kSchemaViolation);
  EXPECT_EQ(field, "hashes");

  EXPECT_EQ(decode_error(R"({"type":"progress","task_id":1,"tried":-4,"speed_hps":1})", &field),
            ErrorCode::kSchemaViolation);
  EXPECT_EQ(field, "tried");
  EXPECT_EQ(decode_error(R"({"type":"task_done","task_id":1,"outcome":"meh"})", &field),
            ErrorCode::kSchemaViolation);
  EXPECT_EQ(field, "outcome");
  EXPECT_EQ(decode_error(R"({"type":"task_assign","task_id":1,"job_id":1,"algorithm":"md5",)"
                         R"("attack":{"mode":"brute","min_len":1},"hashes":[]})",
                         &field),
            ErrorCode::kSchemaViolation);
  EXPECT_EQ(field, "attack.max_len");
  EXPECT_EQ(decode_error(R"({"type":"register_ack","node_id":"a"})", &field),
            ErrorCode::kSchemaViolation);
  EXPECT_EQ(field, "v");
}

TEST(CodecTest, RoundTripRandomMessages) {
  testing::MessageGenerator gen(1234);
  for (int i = 0; i < 2000; ++i) {
    auto m = gen.next();
    auto frame = encode(m);
    auto back = decode(frame);
    ASSERT_EQ(back, m) << frame;
    EXPECT_EQ(message_type(back), json::parse(frame)["type"].get<std::string>());
  }
}

TEST(CodecTest, RandomBytesNeverCrash) {
  std::mt19937 rng(99);
  testing::MessageGenerator gen(5);
  for (int i = 0; i < 1000; ++i) {
    std::string frame;
    if (i % 2 == 0) {
      auto n = rng() % 64;
      for (unsigned k = 0; k < n; ++k) frame += static_cast<char>(rng() % 256);
    } else {
      // mutate a valid frame
      frame = encode(gen.next());
      auto pos = rng() % frame.size();
      frame[pos] = static_cast<char>(rng() % 256);
    }
    try {
      decode(frame);
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == ErrorCode::kMalformedFrame || e.code() == ErrorCode::kUnknownType ||
                  e.code() == ErrorCode::kSchemaViolation);
    }
  }
}

}  // namespace
}  // namespace crackmesh::protocol
