#include "crackmesh/net/client.hpp"

#include <spdlog/spdlog.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <deque>
#include <future>
#include <thread>

#include "crackmesh/common/error.hpp"
#include "crackmesh/net/url.hpp"

namespace crackmesh::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class WsChannel : public agent::AgentChannel {
 public:
  explicit WsChannel(agent::ChannelHandlers handlers) : handlers_(std::move(handlers)) {}

  ~WsChannel() override {
    close();
    if (thread_.joinable()) {
      if (done_.wait_for(std::chrono::seconds(2)) != std::future_status::ready) ioc_.stop();
      thread_.join();
    }
  }

  /// Blocks until the websocket handshake finishes or fails.
  bool open(const Endpoint& ep, std::chrono::milliseconds timeout) {
    std::promise<beast::error_code> handshake;
    auto result = handshake.get_future();
    host_ = ep.host + ":" + std::to_string(ep.port);
    target_ = ep.target == "/" ? "/ws/agent" : ep.target;
    resolver_.async_resolve(
        ep.host, std::to_string(ep.port),
        [this, timeout, &handshake](beast::error_code ec, tcp::resolver::results_type results) {
          if (ec) return handshake.set_value(ec);
          beast::get_lowest_layer(ws_).expires_after(timeout);
          beast::get_lowest_layer(ws_).async_connect(
              results, [this, timeout, &handshake](beast::error_code ec, const tcp::endpoint&) {
                if (ec) return handshake.set_value(ec);
                beast::get_lowest_layer(ws_).expires_never();
                auto opts = websocket::stream_base::timeout::suggested(beast::role_type::client);
                opts.handshake_timeout = timeout;
                ws_.set_option(opts);
                ws_.text(true);
                ws_.read_message_max(64u << 20);
                ws_.async_handshake(host_, target_, [this, &handshake](beast::error_code ec) {
                  handshake.set_value(ec);
                  if (!ec) read_next();
                });
              });
        });
    std::promise<void> finished;
    done_ = finished.get_future();
    thread_ = std::thread([this, f = std::move(finished)]() mutable {
      ioc_.run();
      f.set_value();
    });
    auto ec = result.get();
    if (ec) {
      spdlog::debug("connect to {}{} failed: {}", host_, target_, ec.message());
      open_ = false;
      return false;
    }
    return true;
  }

  bool send(const std::string& frame) override {
    if (!open_) return false;
    asio::post(ioc_, [this, frame] {
      if (closing_) return;
      queue_.push_back(frame);
      if (queue_.size() == 1) write_next();
    });
    return true;
  }

  void close() override {
    if (!open_.exchange(false)) return;
    local_close_ = true;
    asio::post(ioc_, [this] {
      closing_ = true;
      if (queue_.empty()) do_close();
    });
  }

 private:
  void read_next() {
    ws_.async_read(buffer_, [this](beast::error_code ec, std::size_t) {
      if (ec) return closed();
      auto frame = beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      if (handlers_.on_frame) handlers_.on_frame(std::move(frame));
      read_next();
    });
  }

  void write_next() {
    ws_.async_write(asio::buffer(queue_.front()), [this](beast::error_code ec, std::size_t) {
      if (ec) {
        queue_.clear();
        beast::error_code ignored;
        beast::get_lowest_layer(ws_).socket().close(ignored);
        return;
      }
      queue_.pop_front();
      if (!queue_.empty()) {
        write_next();
      } else if (closing_) {
        do_close();
      }
    });
  }

  void do_close() {
    ws_.async_close(websocket::close_code::normal, [this](beast::error_code) {
      beast::error_code ignored;
      beast::get_lowest_layer(ws_).socket().close(ignored);
    });
  }

  void closed() {
    open_ = false;
    if (!local_close_.exchange(true) && handlers_.on_closed) handlers_.on_closed();
  }

  agent::ChannelHandlers handlers_;
  asio::io_context ioc_;
  tcp::resolver resolver_{ioc_};
  websocket::stream<beast::tcp_stream> ws_{ioc_};
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closing_ = false;
  std::atomic<bool> open_{true};
  std::atomic<bool> local_close_{false};
  std::string host_;
  std::string target_;
  std::thread thread_;
  std::future<void> done_;
};

Error network_error(const std::string& what, const beast::error_code& ec) {
  return Error(ErrorCode::kNetwork, what + ": " + ec.message(), "server");
}

}  // namespace

WebSocketConnector::WebSocketConnector(std::string url, std::chrono::milliseconds connect_timeout)
    : url_(std::move(url)), timeout_(connect_timeout) {
  auto ep = parse_url(url_);
  if (ep.scheme != "ws") {
    throw Error(ErrorCode::kInvalidArgument, "agent needs a ws:// coordinator URL", "coordinator");
  }
}

std::unique_ptr<agent::AgentChannel> WebSocketConnector::connect(agent::ChannelHandlers handlers) {
  auto channel = std::make_unique<WsChannel>(std::move(handlers));
  if (!channel->open(parse_url(url_), timeout_)) return nullptr;
  return channel;
}

HttpResult http_request(const std::string& base_url, const std::string& method,
                        const std::string& target, const std::map<std::string, std::string>& headers,
                        const std::string& body, std::chrono::milliseconds timeout) {
  auto ep = parse_url(base_url);
  if (ep.scheme != "http") {
    throw Error(ErrorCode::kInvalidArgument, "server URL must be http://", "server");
  }
  asio::io_context ioc;
  beast::tcp_stream stream(ioc);
  beast::error_code ec;
  auto run = [&] {
    ioc.run();
    ioc.restart();
    if (ec == beast::error::timeout) throw network_error("request to " + base_url + " timed out", ec);
  };

  tcp::resolver resolver(ioc);
  auto results = resolver.resolve(ep.host, std::to_string(ep.port), ec);
  if (ec) throw network_error("cannot resolve " + ep.host, ec);
  stream.expires_after(timeout);
  stream.async_connect(results, [&](beast::error_code e, const tcp::endpoint&) { ec = e; });
  run();
  if (ec) throw network_error("cannot connect to " + base_url, ec);

  auto verb = http::string_to_verb(method);
  http::request<http::string_body> req{verb, target, 11};
  req.set(http::field::host, ep.host + ":" + std::to_string(ep.port));
  req.set(http::field::user_agent, "crackmesh");
  for (const auto& [k, v] : headers) req.set(k, v);
  req.body() = body;
  req.prepare_payload();
  http::async_write(stream, req, [&](beast::error_code e, std::size_t) { ec = e; });
  run();
  if (ec) throw network_error("cannot send request", ec);

  beast::flat_buffer buffer;
  http::response_parser<http::string_body> parser;
  parser.body_limit(256u << 20);
  http::async_read(stream, buffer, parser, [&](beast::error_code e, std::size_t) { ec = e; });
  run();
  if (ec) throw network_error("cannot read response", ec);
  auto res = parser.release();
  stream.socket().shutdown(tcp::socket::shutdown_both, ec);

  HttpResult out;
  out.status = static_cast<int>(res.result_int());
  out.content_type = std::string(res[http::field::content_type]);
  out.body = std::move(res.body());
  return out;
}

}  // namespace crackmesh::net
