#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssvd/protocol.hpp"

// Minimal blocking TCP helpers for the dispatcher/worker protocol.
namespace ssvd::net {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  std::string str() const { return host + ":" + std::to_string(port); }
};

/// Parses "host:port" (port 0 allowed for listening). Throws ConfigError.
Endpoint parse_endpoint(std::string_view address);
/// Comma-separated list of endpoints.
std::vector<Endpoint> parse_endpoints(std::string_view addresses);

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  bool valid() const noexcept { return fd_ >= 0; }
  int fd() const noexcept { return fd_; }
  int release() noexcept;
  void close() noexcept;
  /// Shuts down both directions without releasing the descriptor; unblocks
  /// pending reads in other threads.
  void shutdown() noexcept;

  /// Throws IoError on failure.
  void send_all(std::span<const std::uint8_t> bytes);
  /// Fills `out` completely. Returns false on orderly close before the first
  /// byte; throws IoError on errors or a close mid-buffer.
  bool recv_exact(std::span<std::uint8_t> out);
  /// True when data (or EOF) is available within `timeout_ms`.
  bool wait_readable(int timeout_ms);

 private:
  int fd_ = -1;
};

Socket connect_to(const Endpoint& endpoint);

class Listener {
 public:
  /// Binds and listens; port 0 picks a free port.
  explicit Listener(const Endpoint& endpoint);

  std::uint16_t port() const noexcept { return port_; }
  const std::string& host() const noexcept { return host_; }
  /// Waits up to `timeout_ms` for a connection.
  std::optional<Socket> accept(int timeout_ms);

 private:
  Socket sock_;
  std::string host_;
  std::uint16_t port_ = 0;
};

void send_message(Socket& sock, const Message& message);
/// Reads one frame and returns its payload (type byte + body), or nullopt on
/// orderly close. A declared length above kMaxFrameBytes throws ProtocolError.
std::optional<std::vector<std::uint8_t>> recv_payload(Socket& sock);

}  // namespace ssvd::net
