// Copyright 2026 The humi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <chrono>
#include <deque>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <utility>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "humi/error.h"
#include "humi/preview_server.h"
#include "humi/version.h"

namespace humi::preview {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Json = nlohmann::json;

namespace {

class Connection {
 public:
  virtual ~Connection() = default;
  virtual void Shutdown() = 0;
};

}  // namespace

namespace detail {

struct ServerState {
  ServerState(PreviewService& s, ServerOptions o)
      : service(s), options(std::move(o)) {}

  PreviewService& service;
  ServerOptions options;
  std::unique_ptr<net::io_context> ioc;
  std::optional<net::thread_pool> pool;
  std::optional<tcp::acceptor> acceptor;
  std::vector<std::thread> threads;
  std::atomic<bool> running{false};
  std::atomic<int> live{0};
  uint16_t port = 0;

  std::mutex mutex;
  std::vector<std::weak_ptr<Connection>> connections;
  std::set<std::string> sessions;

  void Track(const std::shared_ptr<Connection>& c) {
    std::lock_guard lock(mutex);
    std::erase_if(connections, [](const auto& w) { return w.expired(); });
    connections.push_back(c);
  }
  void SessionOpened(const std::string& id) {
    std::lock_guard lock(mutex);
    sessions.insert(id);
  }
  void SessionClosed(const std::string& id) {
    {
      std::lock_guard lock(mutex);
      sessions.erase(id);
    }
    service.CloseSession(id);
  }
  void DoAccept();
};

}  // namespace detail

namespace {

using ImplPtr = detail::ServerState*;

class WsConnection : public Connection,
                     public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, ImplPtr impl)
      : ws_(std::move(socket)), impl_(impl),
        queue_(impl->options.queue_capacity) {
    ++impl_->live;
    if (impl_->options.send_buffer_bytes > 0) {
      beast::error_code ec;
      ws_.next_layer().socket().set_option(
          net::socket_base::send_buffer_size(impl_->options.send_buffer_bytes),
          ec);
    }
  }
  ~WsConnection() override { --impl_->live; }

  void Run(http::request<http::string_body> req) {
    ws_.set_option(
        websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.set_option(websocket::stream_base::decorator(
        [](websocket::response_type& res) {
          res.set(http::field::server, std::string("humi/") + kVersion);
        }));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->OnClosed();
      self->DoRead();
    });
  }

  void Shutdown() override {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->closed_ || self->closing_) return;
      self->closing_ = true;
      self->ws_.async_close(websocket::close_code::going_away,
                            [self](beast::error_code) { self->OnClosed(); });
    });
  }

 private:
  void DoRead() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec,
                                                        size_t) {
      self->OnRead(ec);
    });
  }

  void OnRead(beast::error_code ec) {
    if (ec) return OnClosed();
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    Json message;
    try {
      message = Json::parse(text);
    } catch (const Json::parse_error&) {
      Write(impl_->service.HandleText(text).dump());
      return DoRead();
    }
    if (auto dropped = queue_.Push(std::move(message))) {
      if (!dropped->empty()) impl_->service.NoteDropped(*dropped);
    }
    MaybeProcess();
    DoRead();
  }

  void MaybeProcess() {
    if (busy_ || closed_ || queue_.empty() ||
        outbox_.size() >= impl_->options.outbox_capacity) {
      return;
    }
    Json message = *queue_.Pop();
    busy_ = true;
    net::post(*impl_->pool, [self = shared_from_this(),
                             message = std::move(message)] {
      Json reply = self->impl_->service.Handle(message);
      net::post(self->ws_.get_executor(),
                [self, message = std::move(message),
                 reply = std::move(reply)] { self->OnReply(message, reply); });
    });
  }

  void OnReply(const Json& message, const Json& reply) {
    busy_ = false;
    const std::string type = message.is_object() && message.contains("type") &&
                                     message["type"].is_string()
                                 ? message["type"].get<std::string>()
                                 : std::string();
    if (reply.value("type", std::string()) == "state" &&
        reply["session"].is_string()) {
      const std::string id = reply["session"].get<std::string>();
      if (type == "open") {
        sessions_.insert(id);
        impl_->SessionOpened(id);
        if (closed_) CloseSessions();
      } else if (type == "close") {
        sessions_.erase(id);
        impl_->SessionClosed(id);
      }
    }
    Write(reply.dump());
    MaybeProcess();
  }

  void Write(std::string text) {
    if (closed_ || closing_) return;
    outbox_.push_back(std::move(text));
    if (!writing_) DoWrite();
  }

  void DoWrite() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, size_t) {
                      self->writing_ = false;
                      self->outbox_.pop_front();
                      if (ec) return self->OnClosed();
                      if (!self->outbox_.empty() && !self->closing_) {
                        self->DoWrite();
                      }
                      self->MaybeProcess();
                    });
  }

  void OnClosed() {
    if (closed_) return;
    closed_ = true;
    CloseSessions();
  }

  void CloseSessions() {
    for (const auto& id : sessions_) impl_->SessionClosed(id);
    sessions_.clear();
  }

  websocket::stream<beast::tcp_stream> ws_;
  ImplPtr impl_;
  beast::flat_buffer buffer_;
  MessageQueue queue_;
  std::deque<std::string> outbox_;
  std::set<std::string> sessions_;
  bool busy_ = false;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
};

class HttpConnection : public Connection,
                       public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, ImplPtr impl)
      : stream_(std::move(socket)), impl_(impl) {
    ++impl_->live;
  }
  ~HttpConnection() override { --impl_->live; }

  void Run() {
    net::dispatch(stream_.get_executor(),
                  [self = shared_from_this()] { self->DoRead(); });
  }

  void Shutdown() override {
    net::post(stream_.get_executor(), [self = shared_from_this()] {
      if (self->upgraded_) return;
      beast::error_code ec;
      self->stream_.socket().shutdown(tcp::socket::shutdown_both, ec);
      self->stream_.close();
    });
  }

 private:
  void DoRead() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec,
                                                 size_t) { self->OnRead(ec); });
  }

  void OnRead(beast::error_code ec) {
    if (ec) return Close();
    if (websocket::is_upgrade(req_)) {
      upgraded_ = true;
      stream_.expires_never();
      auto ws = std::make_shared<WsConnection>(stream_.release_socket(), impl_);
      impl_->Track(ws);
      ws->Run(std::move(req_));
      return;
    }
    const std::string target(req_.target());
    if (target == "/health") {
      if (req_.method() != http::verb::get) {
        return Reply(http::status::method_not_allowed,
                     ErrorBody("method_not_allowed", "use GET"));
      }
      return Reply(http::status::ok, impl_->service.Health());
    }
    if (target == "/solve") {
      if (req_.method() != http::verb::post) {
        return Reply(http::status::method_not_allowed,
                     ErrorBody("method_not_allowed", "use POST"));
      }
      net::post(*impl_->pool, [self = shared_from_this()] {
        auto [status, body] = self->SolveBody();
        net::post(self->stream_.get_executor(),
                  [self, status = status, body = std::move(body)] {
                    self->Reply(status, body);
                  });
      });
      return;
    }
    Reply(http::status::not_found,
          ErrorBody("not_found", "no route for '" + target + "'"));
  }

  static Json ErrorBody(const std::string& code, const std::string& message,
                        const std::string& path = {}) {
    Json e = {{"code", code}, {"message", message}};
    if (!path.empty()) e["path"] = path;
    return {{"error", e}};
  }

  std::pair<http::status, Json> SolveBody() const {
    try {
      const Json request = Json::parse(req_.body(), nullptr, false);
      if (request.is_discarded()) {
        return {http::status::bad_request,
                ErrorBody("bad_message", "request body is not JSON")};
      }
      return {http::status::ok, impl_->service.Solve(request)};
    } catch (const ParseError& e) {
      return {http::status::bad_request,
              ErrorBody("bad_message", e.what(), e.path())};
    } catch (const Error& e) {
      return {http::status::bad_request, ErrorBody("invalid", e.what())};
    }
  }

  void Reply(http::status status, const Json& body) {
    auto res = std::make_shared<http::response<http::string_body>>(
        status, req_.version());
    res->set(http::field::server, std::string("humi/") + kVersion);
    res->set(http::field::content_type, "application/json");
    res->keep_alive(req_.keep_alive());
    res->body() = body.dump() + "\n";
    res->prepare_payload();
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec,
                                                       size_t) {
                        if (ec || !res->keep_alive()) return self->Close();
                        self->DoRead();
                      });
  }

  void Close() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  ImplPtr impl_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  bool upgraded_ = false;
};

}  // namespace

void detail::ServerState::DoAccept() {
  acceptor->async_accept(
      net::make_strand(*ioc), [this](beast::error_code ec, tcp::socket socket) {
        if (!running) return;
        if (!ec) {
          auto c = std::make_shared<HttpConnection>(std::move(socket), this);
          Track(c);
          c->Run();
        }
        DoAccept();
      });
}

PreviewServer::PreviewServer(PreviewService& service, ServerOptions options)
    : impl_(std::make_unique<detail::ServerState>(service, std::move(options))) {
  if (impl_->options.queue_capacity == 0 ||
      impl_->options.outbox_capacity == 0 || impl_->options.io_threads < 1) {
    throw InvalidArgument("server queues and thread counts must be positive");
  }
}

PreviewServer::~PreviewServer() { Stop(); }

void PreviewServer::Start() {
  detail::ServerState& im = *impl_;
  if (im.running) return;
  const std::string where =
      im.options.address + ":" + std::to_string(im.options.port);
  beast::error_code ec;
  const auto address = net::ip::make_address(im.options.address, ec);
  if (ec) throw InvalidArgument("bad listen address '" + im.options.address + "'");
  im.ioc = std::make_unique<net::io_context>();
  im.acceptor.emplace(*im.ioc);
  const tcp::endpoint endpoint(address, im.options.port);
  im.acceptor->open(endpoint.protocol(), ec);
  if (!ec) im.acceptor->set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) im.acceptor->bind(endpoint, ec);
  if (!ec) im.acceptor->listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    im.acceptor.reset();
    throw IoError(where, "cannot listen: " + ec.message());
  }
  im.port = im.acceptor->local_endpoint().port();
  const int workers = im.options.worker_threads > 0
                          ? im.options.worker_threads
                          : static_cast<int>(std::max(
                                2u, std::thread::hardware_concurrency()));
  im.pool.emplace(workers);
  im.running = true;
  im.DoAccept();
  for (int i = 0; i < im.options.io_threads; ++i) {
    im.threads.emplace_back([&im] { im.ioc->run(); });
  }
}

uint16_t PreviewServer::port() const { return impl_->port; }

void PreviewServer::Stop() {
  detail::ServerState& im = *impl_;
  if (!im.running.exchange(false)) return;
  net::post(*im.ioc, [&im] {
    beast::error_code ec;
    im.acceptor->close(ec);
  });
  std::vector<std::shared_ptr<Connection>> live;
  {
    std::lock_guard lock(im.mutex);
    for (const auto& w : im.connections) {
      if (auto c = w.lock()) live.push_back(std::move(c));
    }
    im.connections.clear();
  }
  for (const auto& c : live) c->Shutdown();
  live.clear();
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::seconds(1);
  while (im.live > 0 && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  im.pool->join();
  im.ioc->stop();
  for (auto& t : im.threads) t.join();
  im.threads.clear();
  // drops pending handlers, and with them any connection still open
  im.acceptor.reset();
  im.ioc.reset();
  std::set<std::string> left;
  {
    std::lock_guard lock(im.mutex);
    left.swap(im.sessions);
  }
  for (const auto& id : left) im.service.CloseSession(id);
}

}  // namespace humi::preview
