#include <gtest/gtest.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <nlohmann/json.hpp>

#include <thread>

#include "crackmesh/agent/agent.hpp"
#include "crackmesh/api/auth.hpp"
#include "crackmesh/api/service.hpp"
#include "crackmesh/common/error.hpp"
#include "crackmesh/engine/digest.hpp"
#include "crackmesh/net/client.hpp"
#include "crackmesh/net/server.hpp"
#include "crackmesh/net/url.hpp"
#include "test_support.hpp"

namespace crackmesh {
namespace {

using namespace std::chrono_literals;
using nlohmann::json;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;

TEST(UrlTest, ParsesSchemesPortsAndTargets) {
  auto ws = net::parse_url("ws://coord.local:9000/ws/agent");
  EXPECT_EQ(ws.scheme, "ws");
  EXPECT_EQ(ws.host, "coord.local");
  EXPECT_EQ(ws.port, 9000);
  EXPECT_EQ(ws.target, "/ws/agent");
  auto http = net::parse_url("http://127.0.0.1");
  EXPECT_EQ(http.port, 80);
  EXPECT_EQ(http.target, "/");
  EXPECT_EQ(net::parse_url("http://h:1?x=1").target, "/?x=1");
  EXPECT_THROW(net::parse_url("ftp://h"), Error);
  EXPECT_THROW(net::parse_url("h:80"), Error);
  EXPECT_THROW(net::parse_url("http://h:99999"), Error);
  auto listen = net::parse_listen(":8080");
  EXPECT_EQ(listen.host, "0.0.0.0");
  EXPECT_EQ(listen.port, 8080);
  EXPECT_EQ(net::parse_listen("127.0.0.1:0").host, "127.0.0.1");
  EXPECT_THROW(net::parse_listen("8080"), Error);
}

TEST(ConnectorTest, UnreachableCoordinatorYieldsNull) {
  // Bind then release a port so nothing listens on it.
  boost::asio::io_context ioc;
  tcp::acceptor probe(ioc, {boost::asio::ip::make_address("127.0.0.1"), 0});
  auto port = probe.local_endpoint().port();
  probe.close();
  net::WebSocketConnector c("ws://127.0.0.1:" + std::to_string(port) + "/ws/agent", 1s);
  EXPECT_EQ(c.connect({}), nullptr);
  EXPECT_THROW(net::http_request("http://127.0.0.1:" + std::to_string(port), "GET", "/", {}, ""),
               Error);
}

class ServerTest : public ::testing::Test {
 protected:
  ServerTest()
      : coord(store, config()),
        auth(store, api::AuthConfig::minimal()),
        service(coord, auth, {web.path()}),
        server(coord, service, {"127.0.0.1", 0, 2}) {
    web.write("index.html", "<html>ui</html>");
    words = testing::numbered_words(1000);
    dir.write_lines("rockyou.txt", words);
    coord.set_wordlists({{"rockyou", (dir.path() / "rockyou.txt").string(), 1000, 0}});
    auth.create_user("alice", "pw", coordinator::Role::kUser);
    base = "http://127.0.0.1:" + std::to_string(server.port());
    ws_url = "ws://127.0.0.1:" + std::to_string(server.port()) + "/ws/agent";
  }

  ~ServerTest() override {
    for (auto& t : agents) t.request_stop();
    agents.clear();
    server.stop();
  }

  static coordinator::CoordinatorConfig config() {
    coordinator::CoordinatorConfig c;
    c.heartbeat_interval = 500ms;
    return c;
  }

  void start_agent(const std::string& name, double power) {
    agent::AgentConfig cfg;
    cfg.coordinator_url = ws_url;
    cfg.agent_name = name;
    cfg.wordlist_dir = dir.path();
    cfg.advertised_power = std::map<HashAlgorithm, double>{{HashAlgorithm::kMd5, power}};
    cfg.reconnect_initial = 20ms;
    cfg.reconnect_max = 200ms;
    cfg.heartbeat_interval = 500ms;
    connectors.push_back(std::make_unique<net::WebSocketConnector>(ws_url));
    runtimes.push_back(std::make_unique<agent::Agent>(cfg, *connectors.back()));
    agents.emplace_back([a = runtimes.back().get()](std::stop_token s) { a->run(s); });
  }

  bool wait_nodes(std::size_t n) {
    auto deadline = std::chrono::steady_clock::now() + 5s;
    while (std::chrono::steady_clock::now() < deadline) {
      if (coord.nodes().size() == n) return true;
      std::this_thread::sleep_for(10ms);
    }
    return false;
  }

  net::HttpResult call(const std::string& method, const std::string& target,
                       const std::string& body = {}) {
    std::map<std::string, std::string> h{{"Content-Type", "application/json"}};
    if (!token.empty()) h["Authorization"] = "Bearer " + token;
    return net::http_request(base, method, target, h, body);
  }

  testing::TempDir dir;
  testing::TempDir web;
  coordinator::Store store{":memory:"};
  coordinator::Coordinator coord;
  api::AuthService auth;
  api::ApiService service;
  net::Server server;
  std::vector<std::string> words;
  std::string base, ws_url, token;
  std::vector<std::unique_ptr<net::WebSocketConnector>> connectors;
  std::vector<std::unique_ptr<agent::Agent>> runtimes;
  std::vector<std::jthread> agents;
};

TEST_F(ServerTest, ServesStaticAndApiOverHttp) {
  auto index = call("GET", "/");
  EXPECT_EQ(index.status, 200);
  EXPECT_EQ(index.body, "<html>ui</html>");
  EXPECT_EQ(call("GET", "/nodes").status, 401);
  auto login = call("POST", "/auth/login", R"({"username":"alice","password":"pw"})");
  ASSERT_EQ(login.status, 200);
  token = json::parse(login.body)["token"];
  EXPECT_EQ(call("GET", "/nodes").body, "[]");
}

TEST_F(ServerTest, DictionaryJobOverRealSockets) {
  start_agent("A", 3000);
  start_agent("B", 1000);
  ASSERT_TRUE(wait_nodes(2));
  token = json::parse(call("POST", "/auth/login", R"({"username":"alice","password":"pw"})").body)["token"];

  json hashes = json::array();
  for (int i = 0; i < 8; ++i) hashes.push_back(engine::digest(HashAlgorithm::kMd5, words[100 * i + 7]).str());
  json body = {{"algorithm", "md5"},
               {"attack", {{"mode", "dictionary"}, {"wordlists", {"rockyou"}}}},
               {"node_ids", {"A", "B"}},
               {"hashes", hashes}};
  auto submitted = call("POST", "/jobs", body.dump());
  ASSERT_EQ(submitted.status, 201) << submitted.body;
  JobId id = json::parse(submitted.body)["job_id"];

  ASSERT_TRUE(coord.wait_for_terminal(id, 10s));
  auto detail = json::parse(call("GET", "/jobs/" + std::to_string(id)).body);
  EXPECT_EQ(detail["status"], "completed");
  EXPECT_EQ(detail["stats"]["cracked_count"], 8);
  auto csv = call("GET", "/jobs/" + std::to_string(id) + "/results.csv");
  EXPECT_EQ(std::count(csv.body.begin(), csv.body.end(), '\n'), 9);
}

TEST_F(ServerTest, UiSocketStreamsJobEvents) {
  start_agent("A", 1000);
  ASSERT_TRUE(wait_nodes(1));
  token = json::parse(call("POST", "/auth/login", R"({"username":"alice","password":"pw"})").body)["token"];
  // The subscribe snapshot covers a job that finished before the socket opened.
  json body = {{"algorithm", "md5"},
               {"attack", {{"mode", "dictionary"}, {"wordlists", {"rockyou"}}}},
               {"node_ids", {"A"}},
               {"hashes", {engine::digest(HashAlgorithm::kMd5, words[999]).str()}}};
  JobId id = json::parse(call("POST", "/jobs", body.dump()).body)["job_id"];

  boost::asio::io_context ioc;
  tcp::resolver resolver(ioc);
  websocket::stream<tcp::socket> ws(ioc);
  boost::asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server.port())));
  ws.handshake("127.0.0.1", "/ws/ui?job=" + std::to_string(id) + "&token=" + token);
  std::set<std::string> types;
  std::string last_status;
  beast::flat_buffer buf;
  while (last_status != "completed") {
    ws.read(buf);
    auto ev = json::parse(beast::buffers_to_string(buf.data()));
    buf.consume(buf.size());
    types.insert(ev["type"].get<std::string>());
    EXPECT_EQ(ev["job_id"], id);
    if (ev["type"] == "status") last_status = ev["status"];
  }
  EXPECT_TRUE(types.count("status"));
  ws.close(websocket::close_code::normal);
}

TEST_F(ServerTest, UiSocketRejectsMissingToken) {
  boost::asio::io_context ioc;
  tcp::resolver resolver(ioc);
  websocket::stream<tcp::socket> ws(ioc);
  boost::asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server.port())));
  beast::error_code ec;
  ws.handshake("127.0.0.1", "/ws/ui?job=1", ec);
  EXPECT_TRUE(ec);
  auto raw = net::http_request(base, "GET", "/ws/ui?job=1",
                               {{"Connection", "Upgrade"},
                                {"Upgrade", "websocket"},
                                {"Sec-WebSocket-Version", "13"},
                                {"Sec-WebSocket-Key", "dGhlIHNhbXBsZSBub25jZQ=="}},
                               "");
  EXPECT_EQ(raw.status, 401);
  EXPECT_EQ(json::parse(raw.body)["code"], "unauthorized");
}

TEST_F(ServerTest, PingingAgentOutlivesHeartbeatWindow) {
  start_agent("A", 1000);
  ASSERT_TRUE(wait_nodes(1));
  for (int i = 0; i < 15; ++i) {
    coord.tick();
    std::this_thread::sleep_for(100ms);
  }
  EXPECT_EQ(coord.nodes().size(), 1u);
}

}  // namespace
}  // namespace crackmesh
