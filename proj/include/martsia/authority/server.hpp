#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "martsia/authority/issuer.hpp"

namespace martsia::authority {

/// TCP front-end for a KeyIssuer: one thread per connection, each running a
/// single HELLO/AUTH exchange.
class AuthorityServer {
 public:
  /// `endpoint` is host:port; port 0 picks an ephemeral port.
  AuthorityServer(KeyIssuer& issuer, std::string endpoint, int io_timeout_ms = 10000);
  ~AuthorityServer();
  AuthorityServer(const AuthorityServer&) = delete;
  AuthorityServer& operator=(const AuthorityServer&) = delete;

  /// Binds and starts accepting in the background. Throws BindFailure.
  void start();
  /// start() then block until stop().
  void serve();
  void stop();

  std::uint16_t port() const { return port_; }
  std::string endpoint() const;
  std::uint64_t connections_handled() const { return handled_.load(); }

 private:
  void accept_loop();
  void handle(int fd);

  KeyIssuer& issuer_;
  std::string host_;
  std::uint16_t port_ = 0;
  int io_timeout_ms_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> handled_{0};
  std::thread acceptor_;
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  void reap_locked();

  std::mutex workers_mu_;
  std::list<Worker> workers_;
  std::list<int> live_fds_;
};

}  // namespace martsia::authority
