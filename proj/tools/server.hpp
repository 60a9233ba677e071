#pragma once

// Newline-delimited request/response transport over standard streams or a
// local TCP socket. Each connection gets its own Service and thread.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>
#include <vector>

#include "service.hpp"

namespace skizze::service {

inline void serve_stream(std::istream& in, std::ostream& out, const Caps& caps = {}) {
  Service svc(caps);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    out << svc.handle(line) << '\n' << std::flush;
  }
}

namespace detail {

inline bool send_all(int fd, const std::string& s) {
  std::size_t sent = 0;
  while (sent < s.size()) {
    ssize_t k = ::send(fd, s.data() + sent, s.size() - sent, MSG_NOSIGNAL);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    sent += static_cast<std::size_t>(k);
  }
  return true;
}

inline void serve_connection(int fd, Caps caps) {
  Service svc(caps);
  std::string buf;
  char chunk[4096];
  for (;;) {
    ssize_t k = ::recv(fd, chunk, sizeof chunk, 0);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(k));
    std::size_t nl;
    bool ok = true;
    while (ok && (nl = buf.find('\n')) != std::string::npos) {
      std::string line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      if (trim(line).empty()) continue;
      ok = send_all(fd, svc.handle(line) + "\n");
    }
    if (!ok) break;
  }
  ::close(fd);
}

}  // namespace detail

/// Listens on host:port (port 0 picks a free one); connections are served
/// concurrently, requests within one connection in order.
class TcpServer {
 public:
  explicit TcpServer(Caps caps = {}) : caps_(caps) {}
  ~TcpServer() { stop(); }
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  int bind(const std::string& host, int port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw Error(ErrorKind::InvalidArgument, std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
      throw Error(ErrorKind::ParseError, "bad IPv4 address '" + host + "'");
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd_, 16) < 0)
      throw Error(ErrorKind::InvalidArgument, "cannot listen on " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
  }

  /// Accepts until stop(); blocks the calling thread.
  void run() {
    while (!stopping_) {
      int c = ::accept(fd_, nullptr, nullptr);
      if (c < 0) {
        if (errno == EINTR) continue;
        break;
      }
      std::lock_guard<std::mutex> lock(mu_);
      workers_.emplace_back(detail::serve_connection, c, caps_);
    }
  }

  void stop() {
    if (stopping_.exchange(true)) return;
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
    }
    std::lock_guard<std::mutex> lock(mu_);
    for (auto& w : workers_)
      if (w.joinable()) w.detach();
  }

 private:
  Caps caps_;
  int fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::vector<std::thread> workers_;
};

}  // namespace skizze::service
