#pragma once

#include <cstdint>
#include <memory>
#include <string>

namespace tamp::bridge {

struct ServerOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8765;
  std::string demos_path;
  std::uint64_t seed_base = 0;  // start messages without a seed count up from here
  std::string static_dir;       // empty: a placeholder page
  double idle_timeout_s = 600.0;
};

/// HTTP server for static files plus one demonstration session per
/// websocket connection (any path). Each connection runs on its own thread.
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();

  /// Binds and starts accepting; returns the bound port.
  unsigned short start();
  /// Closes the listener and every connection, then waits for them.
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();
  std::size_t saved() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// start() and wait(); prints the address first.
void run_server(const ServerOptions& options);

}  // namespace tamp::bridge
