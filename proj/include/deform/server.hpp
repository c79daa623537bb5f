#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "deform/protocol.hpp"

namespace deform::protocol {

/// TCP endpoint on 127.0.0.1. Clients are served one message at a time on a
/// single thread, so all sessions edits stay serialized.
class Server {
 public:
  /// Port 0 picks a free port.
  Server(EndpointOptions options, std::uint16_t port);
  ~Server();

  std::uint16_t port() const;
  /// Blocks until stop() is called.
  void run();
  /// Safe from any thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocking client, mainly for tests and scripting.
class Client {
 public:
  Client(const std::string& host, std::uint16_t port);
  ~Client();

  void send(const json& message);
  json receive();
  json request(const json& message) {
    send(message);
    return receive();
  }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace deform::protocol
