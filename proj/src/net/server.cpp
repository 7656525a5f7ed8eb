#include "crackmesh/net/server.hpp"

#include <spdlog/spdlog.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <algorithm>
#include <atomic>
#include <deque>
#include <list>
#include <mutex>
#include <thread>
#include <vector>

#include "crackmesh/common/error.hpp"

namespace crackmesh::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

api::HttpRequest to_api(const http::request<http::string_body>& req) {
  api::HttpRequest out;
  out.method = std::string(req.method_string());
  out.target = std::string(req.target());
  for (const auto& field : req) {
    std::string name(field.name_string());
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.headers[name] = std::string(field.value());
  }
  out.body = req.body();
  return out;
}

http::response<http::string_body> to_beast(const api::HttpResponse& r, unsigned version,
                                           bool keep_alive) {
  http::response<http::string_body> res{static_cast<http::status>(r.status), version};
  res.set(http::field::server, "crackmesh");
  res.set(http::field::content_type, r.content_type);
  for (const auto& [k, v] : r.headers) res.set(k, v);
  res.keep_alive(keep_alive);
  res.body() = r.body;
  res.prepare_payload();
  return res;
}

}  // namespace

class WsSession;

struct Server::Impl {
  coordinator::Coordinator& coordinator;
  const api::ApiService& api;
  ServerOptions options;
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::vector<std::thread> threads;
  std::mutex mu;
  std::list<std::weak_ptr<WsSession>> sessions;
  std::atomic<bool> stopped{false};
  std::uint16_t port = 0;

  Impl(coordinator::Coordinator& c, const api::ApiService& a, ServerOptions o)
      : coordinator(c), api(a), options(std::move(o)) {}

  void accept();
  void track(const std::shared_ptr<WsSession>& s);
};

/// One upgraded websocket. It is also the coordinator's Link for the
/// connection, so outbound frames are queued onto the session's strand.
class WsSession : public coordinator::Link, public std::enable_shared_from_this<WsSession> {
 public:
  enum class Kind { kAgent, kUi };

  WsSession(tcp::socket socket, Server::Impl& server, Kind kind, JobId job)
      : ws_(std::move(socket)), server_(server), kind_(kind), job_(job) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(server_.options.max_frame_bytes);
    ws_.text(true);
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  void send(std::string frame) override {
    asio::post(ws_.get_executor(), [self = shared_from_this(), f = std::move(frame)]() mutable {
      if (self->closing_) return;
      self->queue_.push_back(std::move(f));
      if (self->queue_.size() == 1) self->write_next();
    });
  }

  void close() override {
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->closing_) return;
      self->closing_ = true;
      if (self->queue_.empty()) self->do_close();
    });
  }

  /// Called on server stop: the coordinator forgets the link now, the
  /// socket is torn down on the strand.
  void shutdown() {
    detach();
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      beast::error_code ec;
      beast::get_lowest_layer(self->ws_).socket().close(ec);
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec || server_.stopped) return;
    if (kind_ == Kind::kAgent) {
      conn_ = server_.coordinator.agent_connected(shared_from_this());
    } else {
      conn_ = server_.coordinator.ui_subscribe(job_, shared_from_this());
    }
    attached_ = true;
    server_.track(shared_from_this());
    read_next();
  }

  void read_next() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      detach();
      return;
    }
    auto frame = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (kind_ == Kind::kAgent) server_.coordinator.agent_frame(conn_, frame);
    read_next();
  }

  void write_next() {
    ws_.async_write(asio::buffer(queue_.front()),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      queue_.clear();
      detach();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) {
      write_next();
    } else if (closing_) {
      do_close();
    }
  }

  void do_close() {
    ws_.async_close(websocket::close_code::normal,
                    [self = shared_from_this()](beast::error_code) {});
  }

  void detach() {
    if (!attached_.exchange(false)) return;
    if (kind_ == Kind::kAgent) {
      server_.coordinator.agent_disconnected(conn_);
    } else {
      server_.coordinator.ui_unsubscribe(conn_);
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  Server::Impl& server_;
  Kind kind_;
  JobId job_;
  coordinator::ConnectionId conn_ = 0;
  std::atomic<bool> attached_{false};
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closing_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Server::Impl& server)
      : stream_(std::move(socket)), server_(server) {}

  void run() {
    asio::dispatch(stream_.get_executor(),
                   beast::bind_front_handler(&HttpSession::read_next, shared_from_this()));
  }

 private:
  void read_next() {
    parser_.emplace();
    parser_->body_limit(server_.options.max_body_bytes);
    stream_.expires_after(std::chrono::seconds(60));
    http::async_read(stream_, buffer_, *parser_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) return shutdown();
    if (ec == http::error::body_limit) {
      api::HttpResponse r;
      r.status = 413;
      r.body = R"({"code":"bad_request","message":"request body too large"})";
      return respond(r, 11, false);
    }
    if (ec) return;
    auto req = parser_->release();
    if (websocket::is_upgrade(req)) return upgrade(std::move(req));

    auto request = to_api(req);
    auto response = server_.api.handle(request);
    spdlog::debug("http {} {} -> {}", request.method, request.target, response.status);
    respond(response, req.version(), req.keep_alive());
  }

  void upgrade(http::request<http::string_body> req) {
    auto request = to_api(req);
    auto path = request.path();
    stream_.expires_never();
    if (path == "/ws/agent") {
      std::make_shared<WsSession>(stream_.release_socket(), server_, WsSession::Kind::kAgent, 0)
          ->run(std::move(req));
      return;
    }
    if (path == "/ws/ui") {
      JobId job = 0;
      try {
        job = server_.api.authorize_ui(request);
      } catch (const std::exception& e) {
        return respond(api::error_response(e), req.version(), false);
      }
      std::make_shared<WsSession>(stream_.release_socket(), server_, WsSession::Kind::kUi, job)
          ->run(std::move(req));
      return;
    }
    api::HttpResponse r;
    r.status = 404;
    r.body = R"({"code":"not_found","message":"no websocket endpoint here"})";
    respond(r, req.version(), false);
  }

  void respond(const api::HttpResponse& r, unsigned version, bool keep_alive) {
    auto res = std::make_shared<http::response<http::string_body>>(to_beast(r, version, keep_alive));
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (res->keep_alive()) {
                          self->read_next();
                        } else {
                          self->shutdown();
                        }
                      });
  }

  void shutdown() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  Server::Impl& server_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
};

void Server::Impl::accept() {
  acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (stopped) return;
    if (!ec) std::make_shared<HttpSession>(std::move(socket), *this)->run();
    accept();
  });
}

void Server::Impl::track(const std::shared_ptr<WsSession>& s) {
  std::lock_guard lock(mu);
  sessions.remove_if([](const auto& w) { return w.expired(); });
  sessions.push_back(s);
}

Server::Server(coordinator::Coordinator& coordinator, const api::ApiService& api,
               ServerOptions options)
    : impl_(std::make_unique<Impl>(coordinator, api, std::move(options))) {
  auto& o = impl_->options;
  try {
    tcp::endpoint ep{asio::ip::make_address(o.address), o.port};
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen(asio::socket_base::max_listen_connections);
    impl_->port = impl_->acceptor.local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorCode::kNetwork,
                "cannot listen on " + o.address + ":" + std::to_string(o.port) + ": " + e.what(),
                "listen");
  }
  impl_->accept();
  for (unsigned i = 0; i < std::max(1u, o.threads); ++i)
    impl_->threads.emplace_back([this] { impl_->ioc.run(); });
  spdlog::info("listening on {}:{}", o.address, port());
}

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->port; }

void Server::stop() {
  if (impl_->stopped.exchange(true)) return;
  asio::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
  });
  std::list<std::weak_ptr<WsSession>> sessions;
  {
    std::lock_guard lock(impl_->mu);
    sessions.swap(impl_->sessions);
  }
  for (auto& w : sessions)
    if (auto s = w.lock()) s->shutdown();
  impl_->ioc.stop();
  for (auto& t : impl_->threads) t.join();
  impl_->threads.clear();
}

}  // namespace crackmesh::net
