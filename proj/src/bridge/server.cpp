#include "tamp/bridge/server.hpp"

#include <sys/socket.h>

#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "tamp/bridge/session.hpp"

namespace tamp::bridge {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

// Runs one async operation to completion on a connection-private context.
// Other handlers (e.g. the websocket idle timer) may stay pending.
template <typename Initiate>
beast::error_code run_async(asio::io_context& ioc, Initiate&& initiate) {
  beast::error_code result = asio::error::operation_aborted;
  bool done = false;
  initiate([&](beast::error_code ec, std::size_t = 0) {
    result = ec;
    done = true;
  });
  ioc.restart();
  while (!done && ioc.run_one() > 0) {
  }
  return done ? result : beast::error_code(asio::error::operation_aborted);
}

std::string mime_type(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

constexpr const char* kPlaceholder =
    "<!doctype html><title>demo service</title><p>No UI directory configured "
    "(--static-dir). Connect a websocket client to this address; the message "
    "format is in docs/protocol.md.</p>\n";

}  // namespace

struct Server::Impl {
  ServerOptions opt;
  DemoWriter writer;
  asio::io_context accept_ioc;
  tcp::acceptor acceptor{accept_ioc};
  std::thread accept_thread;
  std::atomic<bool> stopping{false};
  std::atomic<std::uint64_t> next_seed;
  std::atomic<std::uint64_t> next_id{0};

  std::mutex mu;
  std::condition_variable cv;
  std::set<asio::io_context*> live;
  std::size_t active = 0;

  explicit Impl(ServerOptions o)
      : opt(std::move(o)), writer(opt.demos_path), next_seed(opt.seed_base) {}

  void accept_loop() {
    while (!stopping) {
      auto ioc = std::make_shared<asio::io_context>();
      beast::error_code ec;
      tcp::socket sock(*ioc);
      acceptor.accept(sock, ec);
      if (ec) {
        if (stopping) break;
        continue;
      }
      {
        std::lock_guard lock(mu);
        live.insert(ioc.get());
        ++active;
      }
      std::thread([this, ioc, s = std::move(sock)]() mutable {
        try {
          serve(*ioc, std::move(s));
        } catch (const std::exception& e) {
          std::cerr << "connection error: " << e.what() << '\n';
        }
        std::lock_guard lock(mu);
        live.erase(ioc.get());
        --active;
        cv.notify_all();
      }).detach();
    }
  }

  void serve(asio::io_context& ioc, tcp::socket sock) {
    beast::tcp_stream stream(std::move(sock));
    beast::flat_buffer buf;
    http::request<http::string_body> req;
    stream.expires_after(std::chrono::seconds(30));
    auto ec = run_async(ioc, [&](auto h) { http::async_read(stream, buf, req, h); });
    if (ec || stopping) return;
    if (websocket::is_upgrade(req)) {
      stream.expires_never();
      websocket::stream<beast::tcp_stream> ws(std::move(stream));
      websocket::stream_base::timeout t;
      t.handshake_timeout = std::chrono::seconds(30);
      t.idle_timeout = std::chrono::milliseconds(static_cast<long>(opt.idle_timeout_s * 1000));
      t.keep_alive_pings = false;
      ws.set_option(t);
      ec = run_async(ioc, [&](auto h) { ws.async_accept(req, h); });
      if (!ec) session_loop(ioc, ws);
      return;
    }
    auto res = static_response(req);
    run_async(ioc, [&](auto h) { http::async_write(stream, res, h); });
    stream.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  http::response<http::string_body> static_response(const http::request<http::string_body>& req) {
    auto reply = [&](http::status status, std::string type, std::string body) {
      http::response<http::string_body> res{status, req.version()};
      res.set(http::field::content_type, type);
      res.body() = std::move(body);
      res.prepare_payload();
      res.keep_alive(false);
      return res;
    };
    if (req.method() != http::verb::get) {
      return reply(http::status::method_not_allowed, "text/plain", "GET only\n");
    }
    std::string target(req.target());
    target = target.substr(0, target.find('?'));
    if (target.empty() || target.back() == '/') target += "index.html";
    if (target.find("..") != std::string::npos) {
      return reply(http::status::bad_request, "text/plain", "bad path\n");
    }
    if (opt.static_dir.empty()) {
      if (target == "/index.html") return reply(http::status::ok, "text/html", kPlaceholder);
      return reply(http::status::not_found, "text/plain", "not found\n");
    }
    std::filesystem::path p = std::filesystem::path(opt.static_dir) / target.substr(1);
    std::ifstream in(p, std::ios::binary);
    if (!in || std::filesystem::is_directory(p)) {
      return reply(http::status::not_found, "text/plain", "not found\n");
    }
    std::ostringstream body;
    body << in.rdbuf();
    return reply(http::status::ok, mime_type(p), body.str());
  }

  Message handle(std::optional<DemoSession>& session, const Message& msg) {
    auto need = [&]() -> DemoSession& {
      if (!session) throw SessionError("no_session", "send start first");
      return *session;
    };
    if (auto* m = std::get_if<Start>(&msg)) {
      if (session && session->status() != Status::kAbandoned) {
        throw SessionError("session_state", "this connection already has a session");
      }
      std::uint64_t seed = m->seed ? *m->seed : next_seed++;
      session.emplace("s" + std::to_string(next_id++), seed);
      return session->snapshot();
    }
    if (auto* m = std::get_if<Input>(&msg)) return need().apply(*m);
    if (auto* m = std::get_if<ActionMsg>(&msg)) return need().apply(*m);
    if (auto* m = std::get_if<Finish>(&msg)) {
      auto demo = need().finish(m->outcome);
      if (demo) writer.append(*demo);
      session.reset();
      return Finish{demo ? "saved" : "discarded"};
    }
    throw SessionError("bad_message", "clients send start, input, action or finish");
  }

  void session_loop(asio::io_context& ioc, websocket::stream<beast::tcp_stream>& ws) {
    std::optional<DemoSession> session;
    beast::flat_buffer buf;
    while (!stopping) {
      buf.clear();
      auto ec = run_async(ioc, [&](auto h) { ws.async_read(buf, h); });
      if (ec) break;  // closed, idle timeout or shutdown
      Message reply;
      try {
        reply = handle(session, parse(beast::buffers_to_string(buf.data())));
      } catch (const ProtocolError& e) {
        reply = ErrorMsg{"bad_message", e.what()};
      } catch (const SessionError& e) {
        reply = ErrorMsg{e.code(), e.what()};
      } catch (const std::exception& e) {
        reply = ErrorMsg{"internal", e.what()};
      }
      ws.text(true);
      ec = run_async(ioc, [&](auto h) { ws.async_write(asio::buffer(serialize(reply)), h); });
      if (ec) break;
    }
    if (session) session->abandon();
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() { stop(); }

unsigned short Server::start() {
  auto& a = impl_->acceptor;
  tcp::endpoint ep(asio::ip::make_address(impl_->opt.host), impl_->opt.port);
  a.open(ep.protocol());
  a.set_option(asio::socket_base::reuse_address(true));
  a.bind(ep);
  a.listen();
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
  return a.local_endpoint().port();
}

void Server::stop() {
  if (!impl_ || impl_->stopping.exchange(true)) return;
  if (impl_->acceptor.is_open()) ::shutdown(impl_->acceptor.native_handle(), SHUT_RDWR);
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  std::unique_lock lock(impl_->mu);
  // A context restarted after stop() keeps running, so signal until drained.
  while (impl_->active > 0) {
    for (auto* ioc : impl_->live) ioc->stop();
    impl_->cv.wait_for(lock, std::chrono::milliseconds(50));
  }
}

void Server::wait() {
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
}

std::size_t Server::saved() const { return impl_->writer.appended(); }

void run_server(const ServerOptions& options) {
  Server server(options);
  unsigned short port = server.start();
  std::cout << "serving on http://" << options.host << ":" << port << " (websocket on any path); "
            << "appending demonstrations to " << options.demos_path << std::endl;
  server.wait();
}

}  // namespace tamp::bridge
