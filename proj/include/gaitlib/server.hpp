#pragma once

#include "gaitlib/protocol.hpp"

#include <atomic>
#include <cstdint>
#include <string>

namespace gaitlib {

/// Single-client TCP server speaking the reference line protocol.
/// Clients are served one after another; each new connection starts from a
/// freshly initialised engine.
class ReferenceServer {
 public:
  /// Binds and listens immediately; port 0 picks an ephemeral port.
  ReferenceServer(const GaitLibrary& lib, EngineConfig config, std::uint16_t port,
                  const std::string& address = "127.0.0.1");
  ~ReferenceServer();

  ReferenceServer(const ReferenceServer&) = delete;
  ReferenceServer& operator=(const ReferenceServer&) = delete;

  std::uint16_t port() const { return port_; }

  /// Serves until stop() is called or `max_clients` connections have
  /// closed (0 means no limit).
  void serve(std::size_t max_clients = 0);
  void stop() { stopping_ = true; }

 private:
  void serve_connection(int fd);

  ProtocolSession session_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
};

/// Blocking line client, used by tests and the bench tool.
class LineClient {
 public:
  LineClient(const std::string& host, std::uint16_t port);
  ~LineClient();

  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  void send_line(const std::string& line);
  /// Throws std::runtime_error when the server closed the connection.
  std::string read_line();
  std::string request(const std::string& line) {
    send_line(line);
    return read_line();
  }
  void close();

 private:
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace gaitlib
