#include <gtest/gtest.h>

#include <set>

#include "crackmesh/common/error.hpp"
#include "crackmesh/coordinator/coordinator.hpp"
#include "crackmesh/coordinator/planner.hpp"
#include "crackmesh/coordinator/store.hpp"
#include "crackmesh/engine/digest.hpp"
#include "fake_link.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace crackmesh {
namespace {

using coordinator::Coordinator;
using coordinator::CoordinatorConfig;
using coordinator::Store;
using testing::ScriptedAgent;
namespace proto = protocol;

const std::map<HashAlgorithm, double> kPower3{{HashAlgorithm::kMd5, 3000.0},
                                              {HashAlgorithm::kSha1, 3000.0},
                                              {HashAlgorithm::kSha256, 3000.0}};
const std::map<HashAlgorithm, double> kPower1{{HashAlgorithm::kMd5, 1000.0},
                                              {HashAlgorithm::kSha1, 1000.0},
                                              {HashAlgorithm::kSha256, 1000.0}};

HexDigest md5(const std::string& s) { return engine::digest(HashAlgorithm::kMd5, s); }

std::vector<HexDigest> md5_all(const std::vector<std::string>& words) {
  std::vector<HexDigest> out;
  for (const auto& w : words) out.push_back(md5(w));
  return out;
}

std::vector<WordlistMeta> fixture_wordlists() {
  return {{"rockyou", "/nonexistent/rockyou", 1000, 9000},
          {"d1", "/x/d1", 1000, 1},
          {"d2", "/x/d2", 500, 1},
          {"d3", "/x/d3", 100, 1},
          {"left", "/x/left", 10, 1},
          {"right", "/x/right", 10, 1}};
}

// ----------------------------------------------------------------- Store

TEST(StoreTest, UsersTokensAndConflicts) {
  Store store(":memory:");
  auto alice = store.create_user("alice", "cred-a", coordinator::Role::kUser);
  auto root = store.create_user("root", "cred-r", coordinator::Role::kAdmin);
  EXPECT_NE(alice, root);
  try {
    store.create_user("alice", "x", coordinator::Role::kUser);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConflict);
  }
  EXPECT_EQ(store.find_user_by_name("root")->role, coordinator::Role::kAdmin);
  EXPECT_EQ(store.find_user(alice)->credential, "cred-a");
  EXPECT_FALSE(store.find_user(999).has_value());
  EXPECT_EQ(store.list_users().size(), 2u);

  store.put_token({"tok", alice, 1234, false});
  EXPECT_EQ(store.find_token("tok")->user_id, alice);
  store.revoke_token("tok");
  EXPECT_TRUE(store.find_token("tok")->revoked);
  EXPECT_FALSE(store.find_token("nope").has_value());
}

TEST(StoreTest, JobsTasksAndCrackedRoundTrip) {
  Store store(":memory:");
  Job job;
  job.owner = 1;
  job.mode = BruteForce{2, 3};
  job.hashes = md5_all({"ab", "cd"});
  job.requested_nodes = {"A", "B"};
  job.status = JobStatus::kRunning;
  job.created_at = 42;
  job.id = store.insert_job(job);
  auto jobs = store.load_jobs();
  ASSERT_EQ(jobs.size(), 1u);
  EXPECT_EQ(jobs[0].mode, job.mode);
  EXPECT_EQ(jobs[0].hashes, job.hashes);
  EXPECT_EQ(jobs[0].requested_nodes, job.requested_nodes);
  EXPECT_EQ(jobs[0].status, JobStatus::kRunning);
  EXPECT_FALSE(jobs[0].finished_at.has_value());

  TaskAssignment t;
  t.task_id = 7;
  t.job_id = job.id;
  t.node_id = "A";
  t.payload = KeyspaceSlice{job.hashes, BigInt(10), testing::pow95(3), 3};
  t.status = TaskStatus::kRunning;
  t.wave = 3;
  t.replaces = 5;
  t.tried = 99;
  store.upsert_task(t);
  t.status = TaskStatus::kExhausted;
  store.upsert_task(t);
  auto tasks = store.load_tasks();
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_EQ(tasks[0].payload, t.payload);
  EXPECT_EQ(tasks[0].status, TaskStatus::kExhausted);
  EXPECT_EQ(tasks[0].replaces, std::optional<TaskId>(5));

  std::string binary("a\0\xff", 3);
  EXPECT_TRUE(store.insert_cracked({job.id, job.hashes[0], binary, "A", 100}));
  EXPECT_FALSE(store.insert_cracked({job.id, job.hashes[0], binary, "B", 200}));
  auto cracked = store.load_cracked();
  ASSERT_EQ(cracked.size(), 1u);
  EXPECT_EQ(cracked[0].plaintext, binary);
  EXPECT_EQ(cracked[0].node_id, "A");
}

// --------------------------------------------------------------- Planner

std::vector<NodeProfile> two_nodes(double a = 3.0, double b = 1.0) {
  NodeProfile na{"A", "A", "linux", "x86_64", EngineKind::kBuiltin,
                 {{HashAlgorithm::kMd5, a}}, true, 0};
  NodeProfile nb{"B", "B", "linux", "x86_64", EngineKind::kBuiltin,
                 {{HashAlgorithm::kMd5, b}}, true, 0};
  return {na, nb};
}

Job job_of(AttackMode mode, std::vector<HexDigest> hashes) {
  Job j;
  j.id = 1;
  j.mode = std::move(mode);
  j.hashes = std::move(hashes);
  j.requested_nodes = {"A", "B"};
  return j;
}

TEST(PlannerTest, SingleWordlistSplitsHashesSixTwo) {
  auto job = job_of(Dictionary{{"rockyou"}}, md5_all(testing::numbered_words(8, "p")));
  auto plan = coordinator::plan_job(job, two_nodes(), fixture_wordlists(), 1);
  ASSERT_EQ(plan.assignments.size(), 2u);
  EXPECT_EQ(plan.assignments[0].node_id, "A");
  EXPECT_EQ(std::get<HashSlice>(plan.assignments[0].payload).hashes.size(), 6u);
  EXPECT_EQ(std::get<HashSlice>(plan.assignments[1].payload).hashes.size(), 2u);
  EXPECT_EQ(plan.assignments[0].task_id, 1u);
  EXPECT_EQ(plan.assignments[1].task_id, 2u);
}

TEST(PlannerTest, BruteLengthThreeTilesKeyspace) {
  auto job = job_of(BruteForce{3, 3}, {md5("abc")});
  auto plan = coordinator::plan_job(job, two_nodes(1, 1), {}, 1);
  ASSERT_EQ(plan.assignments.size(), 2u);
  std::vector<std::pair<testing::Int, testing::Int>> ranges;
  for (const auto& t : plan.assignments) {
    const auto& k = std::get<KeyspaceSlice>(t.payload);
    EXPECT_EQ(k.length, 3u);
    EXPECT_EQ(t.wave, 3u);
    ranges.emplace_back(k.start, k.end);
  }
  EXPECT_TRUE(testing::tiles(ranges, testing::pow95(3)));
}

TEST(PlannerTest, BruteWavesPerLengthAscending) {
  auto job = job_of(BruteForce{1, 3}, {md5("abc")});
  auto plan = coordinator::plan_job(job, two_nodes(), {}, 10);
  std::vector<unsigned> waves;
  for (const auto& t : plan.assignments) waves.push_back(t.wave);
  EXPECT_TRUE(std::is_sorted(waves.begin(), waves.end()));
  EXPECT_EQ(waves.front(), 1u);
  EXPECT_EQ(waves.back(), 3u);
  for (std::size_t i = 0; i < plan.assignments.size(); ++i)
    EXPECT_EQ(plan.assignments[i].task_id, 10 + i);
}

TEST(PlannerTest, CombinatorGoesWholeToStrongest) {
  auto job = job_of(Combinator{"left", "right"}, {md5("ab")});
  auto plan = coordinator::plan_job(job, two_nodes(), fixture_wordlists(), 1);
  ASSERT_EQ(plan.assignments.size(), 1u);
  EXPECT_EQ(plan.assignments[0].node_id, "A");
}

TEST(PlannerTest, SeveralWordlistsFollowDictionaryDistribution) {
  auto hashes = md5_all({"x", "y", "z"});
  auto job = job_of(Dictionary{{"d1", "d2", "d3"}}, hashes);
  auto plan = coordinator::plan_job(job, two_nodes(), fixture_wordlists(), 1);
  ASSERT_EQ(plan.assignments.size(), 2u);
  const auto& a = std::get<WordlistSlice>(plan.assignments[0].payload);
  const auto& b = std::get<WordlistSlice>(plan.assignments[1].payload);
  EXPECT_EQ(a.wordlists, std::vector<WordlistId>{"d1"});
  EXPECT_EQ(b.wordlists, (std::vector<WordlistId>{"d3", "d2"}));
  EXPECT_EQ(a.hashes, hashes);
  EXPECT_EQ(b.hashes, hashes);
}

TEST(PlannerTest, PowerUnknownAndNoEligibleNodes) {
  auto nodes = two_nodes();
  auto job = job_of(BruteForce{1, 1}, {md5("a")});
  job.algorithm = HashAlgorithm::kSha1;
  job.hashes = {engine::digest(HashAlgorithm::kSha1, "a")};
  try {
    coordinator::plan_job(job, nodes, {}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPowerUnknown);
  }
  job.algorithm = HashAlgorithm::kMd5;
  for (auto& n : nodes) n.connected = false;
  try {
    coordinator::plan_job(job, nodes, {}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoEligibleNodes);
  }
}

TEST(PlannerTest, ReplanResplitsLostRange) {
  TaskAssignment lost;
  lost.task_id = 4;
  lost.job_id = 1;
  lost.wave = 3;
  lost.payload = KeyspaceSlice{{md5("abc")}, BigInt(100), BigInt(1000), 3};
  auto out = coordinator::replan_lost(lost, {md5("abc")}, {{"A", 1.0}, {"C", 1.0}}, 50);
  ASSERT_EQ(out.size(), 2u);
  std::vector<std::pair<testing::Int, testing::Int>> ranges;
  for (const auto& t : out) {
    EXPECT_EQ(t.replaces, std::optional<TaskId>(4));
    const auto& k = std::get<KeyspaceSlice>(t.payload);
    ranges.emplace_back(k.start - 100, k.end - 100);
  }
  EXPECT_TRUE(testing::tiles(ranges, 900));
}

// ----------------------------------------------------------- Coordinator

class CoordinatorTest : public ::testing::Test {
 protected:
  CoordinatorTest() : coord(store, config(), [this] { return now; }) {
    coord.set_wordlists(fixture_wordlists());
    owner = store.create_user("alice", "c", coordinator::Role::kUser);
  }

  static CoordinatorConfig config() {
    CoordinatorConfig c;
    c.accept_timeout = std::chrono::milliseconds(10'000);
    c.heartbeat_interval = std::chrono::milliseconds(10'000);
    return c;
  }

  JobRequest request(AttackMode mode, std::vector<HexDigest> hashes,
                     std::vector<NodeId> nodes = {"A", "B"}) {
    return JobRequest{owner, HashAlgorithm::kMd5, std::move(mode), std::move(hashes),
                      std::move(nodes)};
  }

  static void accept_all(ScriptedAgent& agent, const std::vector<proto::TaskAssign>& tasks) {
    for (const auto& t : tasks) agent.say(proto::TaskAccept{t.task_id});
  }

  TimestampMs now = 1'700'000'000'000;
  Store store{":memory:"};
  Coordinator coord;
  UserId owner = 0;
};

TEST_F(CoordinatorTest, RegistrationIsAcknowledged) {
  ScriptedAgent a(coord, "A", kPower3);
  auto msgs = a.link->take();
  ASSERT_EQ(msgs.size(), 1u);
  EXPECT_EQ(std::get<proto::RegisterAck>(msgs[0]).node_id, "A");
  auto nodes = coord.nodes();
  ASSERT_EQ(nodes.size(), 1u);
  EXPECT_EQ(nodes[0].os, "linux");
  EXPECT_EQ(nodes[0].power.at(HashAlgorithm::kMd5), 3000.0);
}

TEST_F(CoordinatorTest, VersionMismatchClosesConnection) {
  auto link = std::make_shared<testing::RecordingLink>();
  auto conn = coord.agent_connected(link);
  proto::Register reg;
  reg.v = 2;
  reg.agent_name = "X";
  coord.agent_frame(conn, proto::encode(reg));
  auto msgs = link->take();
  ASSERT_EQ(msgs.size(), 1u);
  EXPECT_EQ(std::get<proto::ErrorMessage>(msgs[0]).code, "version_mismatch");
  EXPECT_TRUE(link->closed());
  EXPECT_TRUE(coord.nodes().empty());
}

TEST_F(CoordinatorTest, TaskTrafficBeforeRegistrationIsRejected) {
  auto link = std::make_shared<testing::RecordingLink>();
  auto conn = coord.agent_connected(link);
  coord.agent_frame(conn, proto::encode(proto::TaskAccept{1}));
  coord.agent_frame(conn, "not json");
  coord.agent_frame(conn, proto::encode(proto::Ping{}));
  auto msgs = link->take();
  ASSERT_EQ(msgs.size(), 3u);
  EXPECT_EQ(std::get<proto::ErrorMessage>(msgs[0]).code, "not_registered");
  EXPECT_EQ(std::get<proto::ErrorMessage>(msgs[1]).code, "malformed_frame");
  EXPECT_TRUE(std::holds_alternative<proto::Pong>(msgs[2]));
}

TEST_F(CoordinatorTest, DictionaryJobRunsToCompletion) {
  ScriptedAgent a(coord, "A", kPower3), b(coord, "B", kPower1);
  auto words = testing::numbered_words(8, "p");
  auto job = coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all(words)));
  EXPECT_EQ(job.status, JobStatus::kDistributing);

  auto ta = a.assignments(), tb = b.assignments();
  ASSERT_EQ(ta.size(), 1u);
  ASSERT_EQ(tb.size(), 1u);
  EXPECT_EQ(ta[0].hashes.size(), 6u);
  EXPECT_EQ(tb[0].hashes.size(), 2u);
  EXPECT_EQ(ta[0].attack, AttackMode{Dictionary{{"rockyou"}}});

  accept_all(a, ta);
  EXPECT_EQ(coord.job(job.id)->status, JobStatus::kDistributing);
  accept_all(b, tb);
  EXPECT_EQ(coord.job(job.id)->status, JobStatus::kRunning);

  auto crack = [&](ScriptedAgent& ag, TaskId t, const std::string& w) {
    ag.say(proto::Cracked{t, md5(w).str(), w});
  };
  std::set<std::string> a_words, b_words;
  for (const auto& w : words) {
    auto h = md5(w);
    bool on_a = std::find(ta[0].hashes.begin(), ta[0].hashes.end(), h) != ta[0].hashes.end();
    (on_a ? a_words : b_words).insert(w);
  }
  for (const auto& w : a_words) crack(a, ta[0].task_id, w);
  a.say(proto::TaskDone{ta[0].task_id, proto::TaskOutcome::kAllCracked, {}});
  // one task finished early; the sibling keeps the job Running
  EXPECT_EQ(coord.job(job.id)->status, JobStatus::kRunning);
  for (const auto& w : b_words) crack(b, tb[0].task_id, w);
  crack(b, tb[0].task_id, *b_words.begin());  // replay duplicate
  b.say(proto::TaskDone{tb[0].task_id, proto::TaskOutcome::kAllCracked, {}});

  auto done = coord.job(job.id);
  EXPECT_EQ(done->status, JobStatus::kCompleted);
  EXPECT_TRUE(done->finished_at.has_value());
  auto results = coord.results(job.id);
  EXPECT_EQ(results.size(), 8u);
  EXPECT_EQ(store.load_cracked().size(), 8u);
  for (const auto& r : results) EXPECT_EQ(md5(r.plaintext), r.hash);
}

TEST_F(CoordinatorTest, UnverifiableCrackIsRejectedAndFlagged) {
  ScriptedAgent a(coord, "A", kPower3);
  auto job = coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all({"secret"}), {"A"}));
  auto ta = a.assignments();
  ASSERT_EQ(ta.size(), 1u);
  a.say(proto::Cracked{ta[0].task_id, md5("secret").str(), "wrong"});
  a.say(proto::Cracked{ta[0].task_id, md5("other").str(), "other"});
  EXPECT_TRUE(coord.results(job.id).empty());
  auto admin = coord.admin_statistics();
  ASSERT_EQ(admin.nodes.size(), 1u);
  EXPECT_EQ(admin.nodes[0].suspect_incidents, 2u);
}

TEST_F(CoordinatorTest, AllTasksFailedFailsJob) {
  ScriptedAgent a(coord, "A", kPower3), b(coord, "B", kPower1);
  auto job = coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all({"x", "y"})));
  for (auto* ag : {&a, &b})
    for (const auto& t : ag->assignments()) {
      ag->say(proto::TaskAccept{t.task_id});
      ag->say(proto::TaskDone{t.task_id, proto::TaskOutcome::kFailed, "boom"});
    }
  EXPECT_EQ(coord.job(job.id)->status, JobStatus::kFailed);
  EXPECT_FALSE(coord.job(job.id)->partial_results);
}

TEST_F(CoordinatorTest, ExhaustedTasksWithSomeFailuresComplete) {
  ScriptedAgent a(coord, "A", kPower3), b(coord, "B", kPower1);
  auto job = coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all({"x", "y"})));
  auto ta = a.assignments(), tb = b.assignments();
  a.say(proto::TaskDone{ta[0].task_id, proto::TaskOutcome::kExhausted, {}});
  b.say(proto::TaskDone{tb[0].task_id, proto::TaskOutcome::kFailed, {}});
  EXPECT_EQ(coord.job(job.id)->status, JobStatus::kCompleted);
}

TEST_F(CoordinatorTest, LostBruteRangeIsResplitAndTiles) {
  ScriptedAgent a(coord, "A", kPower1), b(coord, "B", kPower1), c(coord, "C", kPower1);
  auto job = coord.submit_job(request(BruteForce{3, 3}, {md5("~~~")}, {"A", "B", "C"}));
  auto ta = a.assignments(), tb = b.assignments(), tc = c.assignments();
  accept_all(a, ta);
  accept_all(b, tb);
  accept_all(c, tc);
  b.drop();
  auto extra_a = a.assignments();
  auto extra_c = c.assignments();
  EXPECT_TRUE(extra_a.empty());  // A is still busy with its own range
  EXPECT_TRUE(extra_c.empty());

  auto tasks = coord.tasks(job.id);
  std::size_t lost = 0, replacements = 0;
  for (const auto& t : tasks) {
    if (t.status == TaskStatus::kLost) ++lost;
    if (t.replaces) {
      ++replacements;
      EXPECT_EQ(*t.replaces, tb[0].task_id);
      EXPECT_NE(t.node_id, "B");
    }
  }
  EXPECT_EQ(lost, 1u);
  EXPECT_EQ(replacements, 2u);

  std::vector<std::pair<testing::Int, testing::Int>> leaves;
  for (const auto& t : tasks) {
    if (t.status == TaskStatus::kLost) continue;
    const auto& k = std::get<KeyspaceSlice>(t.payload);
    leaves.emplace_back(k.start, k.end);
  }
  EXPECT_TRUE(testing::tiles(leaves, testing::pow95(3)));

  // finishing the original tasks releases the queued replacements
  a.say(proto::TaskDone{ta[0].task_id, proto::TaskOutcome::kExhausted, {}});
  c.say(proto::TaskDone{tc[0].task_id, proto::TaskOutcome::kExhausted, {}});
  auto ra = a.assignments(), rc = c.assignments();
  ASSERT_EQ(ra.size(), 1u);
  ASSERT_EQ(rc.size(), 1u);
  a.say(proto::TaskAccept{ra[0].task_id});
  c.say(proto::TaskAccept{rc[0].task_id});
  a.say(proto::Cracked{ra[0].task_id, md5("~~~").str(), "~~~"});
  a.say(proto::TaskDone{ra[0].task_id, proto::TaskOutcome::kAllCracked, {}});
  c.say(proto::TaskDone{rc[0].task_id, proto::TaskOutcome::kExhausted, {}});
  EXPECT_EQ(coord.job(job.id)->status, JobStatus::kCompleted);
}

TEST_F(CoordinatorTest, LastNodeDyingFailsJobKeepingResults) {
  ScriptedAgent a(coord, "A", kPower3);
  auto job = coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all({"x", "y"}), {"A"}));
  auto ta = a.assignments();
  a.say(proto::TaskAccept{ta[0].task_id});
  a.say(proto::Cracked{ta[0].task_id, md5("x").str(), "x"});
  a.drop();
  auto j = coord.job(job.id);
  EXPECT_EQ(j->status, JobStatus::kFailed);
  EXPECT_TRUE(j->partial_results);
  EXPECT_EQ(coord.results(job.id).size(), 1u);
}

TEST_F(CoordinatorTest, CrackedTargetsAreNotReplanned) {
  ScriptedAgent a(coord, "A", kPower3), b(coord, "B", kPower1);
  auto job = coord.submit_job(request(BruteForce{2, 2}, {md5("zz")}));
  auto ta = a.assignments(), tb = b.assignments();
  accept_all(a, ta);
  accept_all(b, tb);
  b.say(proto::Cracked{tb[0].task_id, md5("zz").str(), "zz"});
  b.drop();
  for (const auto& t : coord.tasks(job.id)) EXPECT_FALSE(t.replaces.has_value());
  a.say(proto::TaskDone{ta[0].task_id, proto::TaskOutcome::kExhausted, {}});
  EXPECT_EQ(coord.job(job.id)->status, JobStatus::kCompleted);
}

TEST_F(CoordinatorTest, DisconnectAfterCompletionHasNoEffect) {
  ScriptedAgent a(coord, "A", kPower3);
  auto job = coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all({"x"}), {"A"}));
  auto ta = a.assignments();
  a.say(proto::TaskDone{ta[0].task_id, proto::TaskOutcome::kExhausted, {}});
  ASSERT_EQ(coord.job(job.id)->status, JobStatus::kCompleted);
  auto before = coord.tasks(job.id);
  a.drop();
  EXPECT_EQ(coord.job(job.id)->status, JobStatus::kCompleted);
  EXPECT_EQ(coord.tasks(job.id).size(), before.size());
}

TEST_F(CoordinatorTest, AcceptTimeoutIsTreatedAsNodeFailure) {
  ScriptedAgent a(coord, "A", kPower3), b(coord, "B", kPower1);
  auto job = coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all({"x", "y", "z", "w"})));
  auto ta = a.assignments(), tb = b.assignments();
  a.say(proto::TaskAccept{ta[0].task_id});
  now += 5'000;
  a.say(proto::Ping{});
  b.say(proto::Ping{});
  coord.tick();
  EXPECT_FALSE(b.link->closed());
  now += 6'000;
  a.say(proto::Ping{});
  b.say(proto::Ping{});
  coord.tick();
  EXPECT_TRUE(b.link->closed());
  EXPECT_FALSE(a.link->closed());
  bool replaced = false;
  for (const auto& t : coord.tasks(job.id))
    if (t.replaces == tb[0].task_id) replaced = t.node_id == "A";
  EXPECT_TRUE(replaced);
}

TEST_F(CoordinatorTest, MissedHeartbeatsDisconnect) {
  ScriptedAgent a(coord, "A", kPower3), b(coord, "B", kPower1);
  now += 15'000;
  a.say(proto::Ping{});
  coord.tick();
  EXPECT_FALSE(b.link->closed());
  now += 6'000;
  a.say(proto::Ping{});
  coord.tick();
  EXPECT_TRUE(b.link->closed());
  auto nodes = coord.nodes();
  ASSERT_EQ(nodes.size(), 1u);
  EXPECT_EQ(nodes[0].node_id, "A");
}

TEST_F(CoordinatorTest, BusyAgentIsRetriedAfterItsPreviousTask) {
  ScriptedAgent a(coord, "A", kPower3);
  auto job = coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all({"x"}), {"A"}));
  auto first = a.assignments();
  ASSERT_EQ(first.size(), 1u);
  a.say(proto::ErrorMessage{"busy", "task 99 in progress"});
  EXPECT_TRUE(a.assignments().empty());
  a.say(proto::TaskDone{99, proto::TaskOutcome::kExhausted, {}});
  auto again = a.assignments();
  ASSERT_EQ(again.size(), 1u);
  EXPECT_EQ(again[0].task_id, first[0].task_id);
  a.say(proto::TaskAccept{again[0].task_id});
  EXPECT_EQ(coord.job(job.id)->status, JobStatus::kRunning);
}

TEST_F(CoordinatorTest, ReRegistrationSupersedesOldConnection) {
  ScriptedAgent a(coord, "A", kPower3);
  auto job = coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all({"x"}), {"A"}));
  auto ta = a.assignments();
  a.say(proto::TaskAccept{ta[0].task_id});
  ScriptedAgent a2(coord, "A", kPower3);
  EXPECT_TRUE(a.link->closed());
  auto again = a2.assignments();
  ASSERT_EQ(again.size(), 1u);
  EXPECT_EQ(again[0].hashes, ta[0].hashes);
  // the old socket closing later changes nothing
  a.drop();
  EXPECT_EQ(coord.nodes().size(), 1u);
  a2.say(proto::TaskDone{again[0].task_id, proto::TaskOutcome::kExhausted, {}});
  EXPECT_EQ(coord.job(job.id)->status, JobStatus::kCompleted);
}

TEST_F(CoordinatorTest, BruteWavesAdvanceByLength) {
  ScriptedAgent a(coord, "A", kPower3);
  auto job = coord.submit_job(request(BruteForce{1, 2}, {md5("zz")}, {"A"}));
  auto w1 = a.assignments();
  ASSERT_EQ(w1.size(), 1u);
  EXPECT_EQ(w1[0].keyspace->length, 1u);
  a.say(proto::TaskDone{w1[0].task_id, proto::TaskOutcome::kExhausted, {}});
  EXPECT_EQ(coord.job(job.id)->status, JobStatus::kRunning);
  auto w2 = a.assignments();
  ASSERT_EQ(w2.size(), 1u);
  EXPECT_EQ(w2[0].keyspace->length, 2u);
  EXPECT_EQ(w2[0].keyspace->end, testing::pow95(2));
  a.say(proto::Cracked{w2[0].task_id, md5("zz").str(), "zz"});
  a.say(proto::TaskDone{w2[0].task_id, proto::TaskOutcome::kAllCracked, {}});
  EXPECT_EQ(coord.job(job.id)->status, JobStatus::kCompleted);
}

TEST_F(CoordinatorTest, InterleavedJobsNeverShareTaskIds) {
  ScriptedAgent a(coord, "A", kPower3), b(coord, "B", kPower1);
  auto j1 = coord.submit_job(request(BruteForce{2, 2}, {md5("ab")}));
  auto j2 = coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all({"x", "y", "z"})));
  std::set<TaskId> ids;
  std::size_t total = 0;
  for (auto id : {j1.id, j2.id})
    for (const auto& t : coord.tasks(id)) {
      ids.insert(t.task_id);
      ++total;
      EXPECT_EQ(t.job_id, id);
    }
  EXPECT_EQ(ids.size(), total);
}

TEST_F(CoordinatorTest, RejectedSubmissionPersistsNothing) {
  ScriptedAgent a(coord, "A", kPower3);
  EXPECT_THROW(coord.submit_job(request(Dictionary{{"rockyou"}}, {}, {"A"})), Error);
  EXPECT_THROW(coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all({"x"}), {"Z"})), Error);
  EXPECT_TRUE(store.load_jobs().empty());
}

TEST_F(CoordinatorTest, UiSubscribersSeeStatusCrackedAndProgress) {
  ScriptedAgent a(coord, "A", kPower3);
  auto job = coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all({"x"}), {"A"}));
  auto ui = std::make_shared<testing::RecordingLink>();
  coord.ui_subscribe(job.id, ui);
  auto ta = a.assignments();
  a.say(proto::TaskAccept{ta[0].task_id});
  a.say(proto::Progress{ta[0].task_id, 10, 5.0});
  a.say(proto::Cracked{ta[0].task_id, md5("x").str(), "x"});
  a.say(proto::TaskDone{ta[0].task_id, proto::TaskOutcome::kAllCracked, {}});
  std::vector<std::string> types;
  for (const auto& f : ui->take_raw()) types.push_back(nlohmann::json::parse(f).at("type"));
  EXPECT_EQ(types, (std::vector<std::string>{"status", "status", "progress", "cracked", "status",
                                             "status"}));
}

TEST_F(CoordinatorTest, JobStatisticsReportRecovery) {
  ScriptedAgent a(coord, "A", kPower3);
  auto words = testing::numbered_words(8, "s");
  auto job = coord.submit_job(request(Dictionary{{"rockyou"}}, md5_all(words), {"A"}));
  auto ta = a.assignments();
  a.say(proto::TaskAccept{ta[0].task_id});
  for (int i = 0; i < 5; ++i) a.say(proto::Cracked{ta[0].task_id, md5(words[i]).str(), words[i]});
  a.say(proto::Progress{ta[0].task_id, 700, 1234.5});
  now += 2'500;
  auto s = coord.job_statistics(job.id);
  EXPECT_EQ(s.cracked_count, 5u);
  EXPECT_EQ(s.total_hashes, 8u);
  EXPECT_DOUBLE_EQ(s.recovery_pct, 62.5);
  EXPECT_DOUBLE_EQ(s.elapsed_s, 2.5);
  ASSERT_EQ(s.per_node.size(), 1u);
  EXPECT_EQ(s.per_node[0].tried, 700u);
  EXPECT_DOUBLE_EQ(s.per_node[0].speed_hps, 1234.5);
  EXPECT_THROW(coord.job_statistics(999), Error);
}

TEST_F(CoordinatorTest, UserModeSharesAndFreshAdminTotals) {
  auto fresh = coord.admin_statistics();
  EXPECT_EQ(fresh.usage.total_jobs, 0u);
  EXPECT_EQ(fresh.usage.cracked_total, 0u);
  for (const auto& [k, v] : fresh.usage.by_status) EXPECT_EQ(v, 0u);
  for (const auto& [k, v] : fresh.usage.mode_share) EXPECT_EQ(v, 0.0);

  ScriptedAgent a(coord, "A", kPower3);
  for (int i = 0; i < 2; ++i) {
    for (AttackMode mode : {AttackMode{Dictionary{{"rockyou"}}}, AttackMode{BruteForce{1, 1}}}) {
      auto job = coord.submit_job(request(mode, md5_all({"q" + std::to_string(i)}), {"A"}));
      for (const auto& t : a.assignments())
        a.say(proto::TaskDone{t.task_id, proto::TaskOutcome::kExhausted, {}});
      ASSERT_EQ(coord.job(job.id)->status, JobStatus::kCompleted);
    }
  }
  auto u = coord.user_statistics(owner);
  EXPECT_EQ(u.usage.total_jobs, 4u);
  EXPECT_EQ(u.usage.by_status.at("completed"), 4u);
  EXPECT_DOUBLE_EQ(u.usage.mode_share.at("dictionary"), 50.0);
  EXPECT_DOUBLE_EQ(u.usage.mode_share.at("brute"), 50.0);
  EXPECT_DOUBLE_EQ(u.usage.algorithm_share.at("md5"), 100.0);
  ASSERT_EQ(u.usage.activity.size(), 1u);
  EXPECT_EQ(u.usage.activity[0].jobs, 4u);
  EXPECT_THROW(coord.user_statistics(12345), Error);
}

TEST(CoordinatorRecoveryTest, RestartReplansInFlightTasks) {
  testing::TempDir dir;
  const auto db = (dir.path() / "store.db").string();
  TimestampMs now = 1'000;
  JobId done_id = 0, live_id = 0;
  TaskId lost_task = 0;
  {
    Store store(db);
    Coordinator coord(store, {}, [&] { return now; });
    coord.set_wordlists(fixture_wordlists());
    ScriptedAgent a(coord, "A", kPower3);
    auto done = coord.submit_job({1, HashAlgorithm::kMd5, Dictionary{{"rockyou"}}, md5_all({"x"}), {"A"}});
    auto t = a.assignments();
    a.say(proto::Cracked{t[0].task_id, md5("x").str(), "x"});
    a.say(proto::TaskDone{t[0].task_id, proto::TaskOutcome::kAllCracked, {}});
    auto live = coord.submit_job({1, HashAlgorithm::kMd5, BruteForce{2, 2}, md5_all({"ab"}), {"A"}});
    auto t2 = a.assignments();
    a.say(proto::TaskAccept{t2[0].task_id});
    done_id = done.id;
    live_id = live.id;
    lost_task = t2[0].task_id;
  }
  Store store(db);
  Coordinator coord(store, {}, [&] { return now; });
  coord.set_wordlists(fixture_wordlists());
  coord.recover();
  EXPECT_EQ(coord.job(done_id)->status, JobStatus::kCompleted);
  EXPECT_EQ(coord.results(done_id).size(), 1u);
  EXPECT_EQ(coord.job(live_id)->status, JobStatus::kRunning);
  auto tasks = coord.tasks(live_id);
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_EQ(tasks[0].status, TaskStatus::kLost);
  EXPECT_TRUE(coord.nodes().empty());
  EXPECT_EQ(coord.nodes(false).size(), 1u);

  ScriptedAgent a(coord, "A", kPower3);
  auto re = a.assignments();
  ASSERT_EQ(re.size(), 1u);
  EXPECT_GT(re[0].task_id, lost_task);
  auto after = coord.tasks(live_id);
  ASSERT_EQ(after.size(), 2u);
  EXPECT_EQ(after[1].replaces, std::optional<TaskId>(lost_task));
  a.say(proto::Cracked{re[0].task_id, md5("ab").str(), "ab"});
  a.say(proto::TaskDone{re[0].task_id, proto::TaskOutcome::kAllCracked, {}});
  EXPECT_EQ(coord.job(live_id)->status, JobStatus::kCompleted);
}

}  // namespace
}  // namespace crackmesh
