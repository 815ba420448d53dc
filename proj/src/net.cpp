#include "ssvd/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "binary_io.hpp"
#include "ssvd/errors.hpp"

namespace ssvd::net {
namespace {

std::string sys_error(const std::string& what) { return what + ": " + std::strerror(errno); }

struct AddrInfo {
  addrinfo* head = nullptr;
  ~AddrInfo() {
    if (head) ::freeaddrinfo(head);
  }
};

AddrInfo resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  AddrInfo info;
  const std::string port = std::to_string(ep.port);
  const int rc = ::getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(), &hints, &info.head);
  if (rc != 0) throw IoError("cannot resolve " + ep.str() + ": " + ::gai_strerror(rc));
  return info;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

Endpoint parse_endpoint(std::string_view address) {
  const auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon + 1 == address.size())
    throw ConfigError("address must be host:port, got '" + std::string(address) + "'");
  Endpoint ep;
  ep.host = std::string(address.substr(0, colon));
  if (ep.host.size() >= 2 && ep.host.front() == '[' && ep.host.back() == ']') ep.host = ep.host.substr(1, ep.host.size() - 2);
  const auto port = address.substr(colon + 1);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || ptr != port.data() + port.size() || value > 65535)
    throw ConfigError("invalid port in address '" + std::string(address) + "'");
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

std::vector<Endpoint> parse_endpoints(std::string_view addresses) {
  std::vector<Endpoint> out;
  std::size_t start = 0;
  while (start <= addresses.size()) {
    const auto comma = addresses.find(',', start);
    const auto item = addresses.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!item.empty()) out.push_back(parse_endpoint(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("no worker addresses given");
  return out;
}

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = o.release();
  }
  return *this;
}

int Socket::release() noexcept {
  const int fd = fd_;
  fd_ = -1;
  return fd;
}

void Socket::close() noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Socket::shutdown() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::send_all(std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(sys_error("send"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

bool Socket::recv_exact(std::span<std::uint8_t> out) {
  std::size_t got = 0;
  while (got < out.size()) {
    const ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(sys_error("recv"));
    }
    if (n == 0) {
      if (got == 0) return false;
      throw IoError("connection closed mid-frame");
    }
    got += static_cast<std::size_t>(n);
  }
  return true;
}

bool Socket::wait_readable(int timeout_ms) {
  pollfd p{fd_, POLLIN, 0};
  for (;;) {
    const int rc = ::poll(&p, 1, timeout_ms);
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw IoError(sys_error("poll"));
    return rc > 0;
  }
}

Socket connect_to(const Endpoint& endpoint) {
  AddrInfo info = resolve(endpoint, false);
  int last_errno = 0;
  for (addrinfo* ai = info.head; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) {
      last_errno = errno;
      continue;
    }
    if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      set_nodelay(s.fd());
      return s;
    }
    last_errno = errno;
  }
  errno = last_errno;
  throw IoError(sys_error("cannot connect to " + endpoint.str()));
}

Listener::Listener(const Endpoint& endpoint) : host_(endpoint.host) {
  AddrInfo info = resolve(endpoint, true);
  int last_errno = 0;
  for (addrinfo* ai = info.head; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) {
      last_errno = errno;
      continue;
    }
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(s.fd(), 16) == 0) {
      sockaddr_storage addr{};
      socklen_t len = sizeof addr;
      ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
      if (addr.ss_family == AF_INET)
        port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
      else
        port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
      sock_ = std::move(s);
      return;
    }
    last_errno = errno;
  }
  errno = last_errno;
  throw IoError(sys_error("cannot listen on " + endpoint.str()));
}

std::optional<Socket> Listener::accept(int timeout_ms) {
  if (!sock_.wait_readable(timeout_ms)) return std::nullopt;
  const int fd = ::accept(sock_.fd(), nullptr, nullptr);
  if (fd < 0) {
    if (errno == EINTR || errno == EAGAIN || errno == ECONNABORTED) return std::nullopt;
    throw IoError(sys_error("accept"));
  }
  set_nodelay(fd);
  return Socket(fd);
}

void send_message(Socket& sock, const Message& message) { sock.send_all(encode_frame(message)); }

std::optional<std::vector<std::uint8_t>> recv_payload(Socket& sock) {
  std::uint8_t header[4];
  if (!sock.recv_exact(header)) return std::nullopt;
  std::uint32_t len = 0;
  std::memcpy(&len, header, 4);
  len = detail::byteswap_if_big(len);
  if (len > kMaxFrameBytes)
    throw ProtocolError("protocol: frame length " + std::to_string(len) + " exceeds limit (at byte 0)");
  if (len == 0) throw ProtocolError("protocol: empty frame (at byte 0)");
  std::vector<std::uint8_t> payload(len);
  if (!sock.recv_exact(payload)) throw IoError("connection closed mid-frame");
  return payload;
}

}  // namespace ssvd::net
