#include "martsia/authority/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "martsia/authority/wire.hpp"
#include "martsia/error.hpp"

namespace martsia::authority {

AuthorityServer::AuthorityServer(KeyIssuer& issuer, std::string endpoint, int io_timeout_ms)
    : issuer_(issuer), io_timeout_ms_(io_timeout_ms) {
  auto [host, port] = split_endpoint(endpoint);
  host_ = host;
  port_ = port;
}

AuthorityServer::~AuthorityServer() { stop(); }

std::string AuthorityServer::endpoint() const { return host_ + ":" + std::to_string(port_); }

void AuthorityServer::start() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host_.c_str(), std::to_string(port_).c_str(), &hints, &res); rc != 0) {
    fail(Errc::BindFailure, "cannot resolve " + endpoint() + ": " + ::gai_strerror(rc), endpoint());
  }
  int fd = -1;
  int err = 0;
  for (auto* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) break;
    err = errno;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) fail(Errc::BindFailure, "cannot bind " + endpoint() + ": " + std::strerror(err), endpoint());

  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                                           : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  listen_fd_ = fd;
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void AuthorityServer::serve() {
  start();
  acceptor_.join();
}

void AuthorityServer::stop() {
  if (!running_.exchange(false)) {
    if (acceptor_.joinable()) acceptor_.join();
    return;
  }
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable() && acceptor_.get_id() != std::this_thread::get_id()) acceptor_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  std::list<Worker> workers;
  {
    std::lock_guard lock(workers_mu_);
    for (int fd : live_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.thread.join();
}

void AuthorityServer::reap_locked() {
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (it->done->load()) {
      it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

void AuthorityServer::accept_loop() {
  while (running_) {
    int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;  // listening socket shut down
    }
    std::lock_guard lock(workers_mu_);
    if (!running_) {
      ::close(fd);
      break;
    }
    reap_locked();
    live_fds_.push_back(fd);
    auto done = std::make_shared<std::atomic<bool>>(false);
    workers_.push_back({std::thread([this, fd, done] {
                          handle(fd);
                          *done = true;
                        }),
                        done});
  }
}

void AuthorityServer::handle(int fd) {
  Connection conn(fd);
  conn.set_timeout(io_timeout_ms_);
  auto reply_error = [&](const Error& e) {
    try {
      conn.send({MessageType::Error, encode_error(e.code(), e.what())});
    } catch (const Error&) {
    }
  };
  try {
    // Well-formed frames out of sequence get an ERROR reply; bytes that do
    // not parse as a frame get nothing.
    auto expect = [&](const Frame& f, MessageType type, const char* name) {
      if (f.type == type) return;
      Error e(Errc::ProtocolError, std::string("expected ") + name);
      reply_error(e);
      throw e;
    };
    auto hello_frame = conn.receive();
    expect(hello_frame, MessageType::Hello, "HELLO");
    auto reader = decode_hello(hello_frame.payload);
    Hello hello;
    try {
      hello = issuer_.handle_hello(reader);
    } catch (const Error& e) {
      reply_error(e);
      throw;
    }
    conn.send({MessageType::Challenge, encode_challenge(hello)});

    auto auth_frame = conn.receive();
    expect(auth_frame, MessageType::Auth, "AUTH");
    auto [session, signature] = decode_auth(auth_frame.payload);
    if (session != hello.session_id) {
      // Sessions are confined to the connection that opened them.
      Error e(Errc::UnknownSession, "session does not belong to this connection");
      reply_error(e);
      throw e;
    }
    std::vector<crypto::KeyShare> shares;
    try {
      shares = issuer_.handle_auth(session, signature);
    } catch (const Error& e) {
      reply_error(e);
      throw;
    }
    conn.send({MessageType::Shares, encode_shares(shares)});
  } catch (const Error&) {
    // Malformed frames and I/O failures just drop the connection.
  }
  ++handled_;
  std::lock_guard lock(workers_mu_);
  live_fds_.remove(fd);
}

}  // namespace martsia::authority
