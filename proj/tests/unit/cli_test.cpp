#include <gtest/gtest.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <sstream>
#include <thread>

#include "crackmesh/api/auth.hpp"
#include "crackmesh/api/service.hpp"
#include "crackmesh/cli/cli.hpp"
#include "crackmesh/distribution/distribution.hpp"
#include "crackmesh/engine/digest.hpp"
#include "crackmesh/net/client.hpp"
#include "crackmesh/net/server.hpp"
#include "fake_link.hpp"
#include "test_support.hpp"

namespace crackmesh {
namespace {

using namespace std::chrono_literals;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string golden(const std::string& name) {
  std::ifstream in(std::string(CRACKMESH_GOLDEN_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(EstimateCommandTest, BruteFourAtOneMegahash) {
  auto r = cli({"estimate", "--mode", "brute", "--length", "4", "--hps", "1000000"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "81.450625 s (1m 21s)\n");
}

TEST(EstimateCommandTest, RulesThousandLinesSixtyFourRules) {
  auto r = cli({"estimate", "--mode", "rules", "--lines", "1000", "--rules", "64", "--hps", "1000"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "64 s (1m 4s)\n");
}

TEST(EstimateCommandTest, OtherModesAndScientificRates) {
  EXPECT_EQ(cli({"estimate", "--mode", "dictionary", "--lines", "1000", "--hps", "500"}).out,
            "2 s (2s)\n");
  EXPECT_EQ(cli({"estimate", "--mode", "combinator", "--left-lines", "100", "--right-lines", "200",
                 "--hps", "1e3"})
                .out,
            "20 s (20s)\n");
  EXPECT_EQ(cli({"estimate", "--mode", "brute", "--length", "1", "--hps", "9.5e1"}).out,
            "1 s (1s)\n");
}

TEST(EstimateCommandTest, OutputMatchesLibraryBitForBit) {
  for (unsigned len = 1; len <= 10; ++len) {
    double hps = 1234.5 * len;
    auto expect = distribution::estimate_time(distribution::BruteEstimate{len}, hps);
    auto r = cli({"estimate", "--mode", "brute", "--length", std::to_string(len), "--hps",
                  cli::format_seconds(hps)});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(std::stod(r.out.substr(0, r.out.find(' '))), expect);
  }
}

TEST(EstimateCommandTest, UsageErrorsNameTheFlag) {
  auto r = cli({"estimate", "--mode", "brute", "--hps", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--length"), std::string::npos);
  r = cli({"estimate", "--mode", "brute", "--length", "2", "--hps", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--hps"), std::string::npos);
  r = cli({"estimate", "--mode", "nope", "--hps", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--mode"), std::string::npos);
}

TEST(HumanizeTest, Ranges) {
  EXPECT_EQ(cli::humanize_duration(0.0001), "<1ms");
  EXPECT_EQ(cli::humanize_duration(0.25), "250ms");
  EXPECT_EQ(cli::humanize_duration(1.5), "1.5s");
  EXPECT_EQ(cli::humanize_duration(3600), "1h");
  EXPECT_EQ(cli::humanize_duration(90061), "1d 1h 1m 1s");
  EXPECT_EQ(cli::humanize_duration(1e12), "3.17e+04 years");
}

TEST(CliTest, HelpTextIsStable) {
  EXPECT_EQ(cli({"--help"}).out, golden("help_main.txt"));
  for (const char* sub : {"coordinator", "agent", "submit", "login", "estimate"}) {
    auto r = cli({sub, "--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, golden(std::string("help_") + sub + ".txt")) << sub;
  }
}

TEST(CliTest, SubmitWithoutAlgorithmNamesFlag) {
  auto r = cli({"submit", "--token", "t", "--mode", "dictionary", "--wordlists", "w", "--nodes",
                "a", "--hashes", "x"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--algorithm"), std::string::npos);
}

TEST(CliTest, MissingSubcommandAndBadFlagsAreUsageErrors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  auto r = cli({"agent", "--coordinator", "http://x:1", "--name", "a"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--coordinator"), std::string::npos);
  r = cli({"agent", "--coordinator", "ws://x:1", "--name", "a", "--engine", "external"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--engine-path"), std::string::npos);
  r = cli({"agent", "--coordinator", "ws://x:1", "--name", "a", "--power", "md5=fast"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--power"), std::string::npos);
  r = cli({"coordinator", "--listen", "nowhere"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--listen"), std::string::npos);
}

TEST(CliTest, NetworkFailureExitsThree) {
  auto r = cli({"submit", "--server", "http://127.0.0.1:1", "--token", "t", "--algorithm", "md5",
                "--mode", "dictionary", "--wordlists", "w", "--nodes", "a", "--hashes", "x"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(cli({"login", "--server", "http://127.0.0.1:1", "--username", "u", "--password", "p"})
                .code,
            3);
}

class SubmitCommandTest : public ::testing::Test {
 protected:
  SubmitCommandTest()
      : coord(store),
        auth(store, api::AuthConfig::minimal()),
        service(coord, auth),
        server(coord, service, {"127.0.0.1", 0, 1}) {
    coord.set_wordlists({{"rockyou", "/x/rockyou", 1000, 1}});
    auth.create_user("alice", "pw", coordinator::Role::kUser);
    url = "http://127.0.0.1:" + std::to_string(server.port());
  }

  coordinator::Store store{":memory:"};
  coordinator::Coordinator coord;
  api::AuthService auth;
  api::ApiService service;
  net::Server server;
  testing::ScriptedAgent a{coord, "n1", {{HashAlgorithm::kMd5, 3.0}}};
  testing::ScriptedAgent b{coord, "n2", {{HashAlgorithm::kMd5, 1.0}}};
  std::string url;
  testing::TempDir dir;
};

TEST_F(SubmitCommandTest, LoginThenSubmitUploadsFile) {
  auto login = cli({"login", "--server", url, "--username", "alice", "--password", "pw"});
  ASSERT_EQ(login.code, 0) << login.err;
  auto token = login.out.substr(0, login.out.size() - 1);
  std::string hashes;
  for (int i = 0; i < 8; ++i) hashes += engine::digest(HashAlgorithm::kMd5, "p" + std::to_string(i)).str() + "\n";
  auto file = dir.write("h.txt", hashes);
  auto r = cli({"submit", "--server", url, "--token", token, "--algorithm", "md5", "--mode",
                "dictionary", "--wordlists", "rockyou", "--nodes", "n1,n2", "--hashes-file",
                file.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto id = std::stoull(r.out);
  auto job = coord.job(id);
  ASSERT_TRUE(job);
  EXPECT_EQ(job->hashes.size(), 8u);
  EXPECT_EQ(job->requested_nodes, (std::vector<NodeId>{"n1", "n2"}));
}

TEST_F(SubmitCommandTest, ApiRejectionExitsNonZero) {
  auto token = auth.login("alice", "pw").token;
  auto r = cli({"submit", "--server", url, "--token", token, "--algorithm", "md5", "--mode",
                "dictionary", "--wordlists", "rockyou", "--nodes", "n1", "--hashes", ""});
  EXPECT_EQ(r.code, 2);  // both hash sources empty
  r = cli({"submit", "--server", url, "--token", token, "--algorithm", "md5", "--mode",
           "dictionary", "--wordlists", "rockyou", "--nodes", "n1", "--hashes", "zz"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("422"), std::string::npos);
  EXPECT_NE(r.err.find("field hashes"), std::string::npos);
  r = cli({"submit", "--server", url, "--token", "bogus", "--algorithm", "md5", "--mode",
           "brute", "--min-len", "2", "--nodes", "n1", "--hashes",
           engine::digest(HashAlgorithm::kMd5, "ab").str()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("401"), std::string::npos);
}

TEST(CoordinatorCommandTest, ServesUntilInterrupted) {
  testing::TempDir dir;
  std::filesystem::create_directories(dir.path() / "wl");
  dir.write("wl/rockyou.txt", "a\nb\n");
  int pipefd[2];
  ASSERT_EQ(pipe(pipefd), 0);
  pid_t pid = fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    dup2(pipefd[1], STDOUT_FILENO);
    close(pipefd[0]);
    auto store = (dir.path() / "db.sqlite").string();
    auto wl = (dir.path() / "wl").string();
    execl(CRACKMESH_CLI_PATH, "crackmesh", "coordinator", "--listen", "127.0.0.1:0", "--store",
          store.c_str(), "--wordlist-dir", wl.c_str(), "--admin-user", "root", "--admin-password",
          "pw", "--log-level", "warn", nullptr);
    _exit(127);
  }
  close(pipefd[1]);
  std::string line;
  char c;
  while (read(pipefd[0], &c, 1) == 1 && c != '\n') line += c;
  close(pipefd[0]);
  auto port = line.substr(line.rfind(':') + 1);
  ASSERT_FALSE(port.empty()) << line;
  std::string base = "http://127.0.0.1:" + port;
  auto login = net::http_request(base, "POST", "/auth/login", {{"Content-Type", "application/json"}},
                                 R"({"username":"root","password":"pw"})");
  EXPECT_EQ(login.status, 200);
  auto token = nlohmann::json::parse(login.body)["token"].get<std::string>();
  auto wl = net::http_request(base, "GET", "/wordlists", {{"Authorization", "Bearer " + token}}, "");
  EXPECT_NE(wl.body.find("rockyou"), std::string::npos);
  kill(pid, SIGINT);
  int status = 0;
  waitpid(pid, &status, 0);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}

}  // namespace
}  // namespace crackmesh
