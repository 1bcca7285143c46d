#include "martsia/authority/wire.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace martsia::authority {

namespace {

bool known_type(std::uint8_t t) {
  switch (static_cast<MessageType>(t)) {
    case MessageType::Hello:
    case MessageType::Challenge:
    case MessageType::Auth:
    case MessageType::Shares:
    case MessageType::Error:
      return true;
  }
  return false;
}

// Payload decoders turn any codec failure into ProtocolError.
template <typename F>
auto protocol_guard(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    fail(Errc::ProtocolError, std::string("bad ") + what + " payload: " + e.what());
  }
}

}  // namespace

Bytes encode_frame(const Frame& frame) {
  auto body_len = static_cast<std::uint32_t>(2 + frame.payload.size());
  if (body_len > kMaxFrameBody) fail(Errc::ProtocolError, "frame exceeds 1 MiB");
  Bytes out(4 + body_len);
  out[0] = static_cast<std::uint8_t>(body_len >> 24);
  out[1] = static_cast<std::uint8_t>(body_len >> 16);
  out[2] = static_cast<std::uint8_t>(body_len >> 8);
  out[3] = static_cast<std::uint8_t>(body_len);
  out[4] = kProtocolVersion;
  out[5] = static_cast<std::uint8_t>(frame.type);
  std::copy(frame.payload.begin(), frame.payload.end(), out.begin() + 6);
  return out;
}

Frame decode_body(ByteView body) {
  if (body.size() < 2) fail(Errc::ProtocolError, "frame body too short");
  if (body[0] != kProtocolVersion) {
    fail(Errc::ProtocolError, "unsupported protocol version " + std::to_string(body[0]));
  }
  if (!known_type(body[1])) fail(Errc::ProtocolError, "unknown message type " + std::to_string(body[1]));
  return {static_cast<MessageType>(body[1]), Bytes(body.begin() + 2, body.end())};
}

Bytes encode_hello(const std::string& reader_address) {
  ByteWriter w;
  w.str(reader_address);
  return std::move(w).take();
}

std::string decode_hello(ByteView payload) {
  return protocol_guard("HELLO", [&] {
    ByteReader r(payload);
    auto s = r.str();
    r.expect_end();
    return s;
  });
}

Bytes encode_challenge(const Hello& hello) {
  ByteWriter w;
  w.raw(hello.session_id).raw(hello.challenge);
  return std::move(w).take();
}

Hello decode_challenge(ByteView payload) {
  return protocol_guard("CHALLENGE", [&] {
    ByteReader r(payload);
    Hello h{r.fixed<16>(), r.fixed<32>()};
    r.expect_end();
    return h;
  });
}

Bytes encode_auth(const SessionId& session_id, ByteView signature) {
  ByteWriter w;
  w.raw(session_id).bytes(signature);
  return std::move(w).take();
}

std::pair<SessionId, Bytes> decode_auth(ByteView payload) {
  return protocol_guard("AUTH", [&] {
    ByteReader r(payload);
    auto id = r.fixed<16>();
    auto sig = r.bytes();
    r.expect_end();
    return std::pair{id, sig};
  });
}

Bytes encode_shares(const std::vector<crypto::KeyShare>& shares) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(shares.size()));
  for (const auto& s : shares) w.bytes(s.serialize());
  return std::move(w).take();
}

std::vector<crypto::KeyShare> decode_shares(ByteView payload) {
  return protocol_guard("SHARES", [&] {
    ByteReader r(payload);
    auto n = r.u32();
    if (n > r.remaining()) fail(Errc::Malformed, "share count exceeds payload");
    std::vector<crypto::KeyShare> out;
    for (std::uint32_t i = 0; i < n; ++i) out.push_back(crypto::KeyShare::deserialize(r.bytes()));
    r.expect_end();
    return out;
  });
}

Bytes encode_error(Errc code, const std::string& message) {
  ByteWriter w;
  w.str(errc_name(code)).str(message);
  return std::move(w).take();
}

Error decode_error(ByteView payload) {
  return protocol_guard("ERROR", [&] {
    ByteReader r(payload);
    auto name = r.str();
    auto message = r.str();
    r.expect_end();
    auto code = errc_from_name(name).value_or(Errc::ProtocolError);
    return Error(code, "remote: " + message);
  });
}

// ---- sockets --------------------------------------------------------------

std::pair<std::string, std::uint16_t> split_endpoint(const std::string& endpoint) {
  auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size()) {
    fail(Errc::InvalidArgument, "endpoint must be host:port, got '" + endpoint + "'", endpoint);
  }
  unsigned port = 0;
  auto tail = std::string_view(endpoint).substr(colon + 1);
  auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), port);
  if (ec != std::errc() || ptr != tail.data() + tail.size() || port > 65535) {
    fail(Errc::InvalidArgument, "bad port in endpoint '" + endpoint + "'", endpoint);
  }
  return {endpoint.substr(0, colon), static_cast<std::uint16_t>(port)};
}

Connection::Connection(int fd) : fd_(fd) {}

Connection::Connection(Connection&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }

Connection::~Connection() {
  if (fd_ >= 0) ::close(fd_);
}

void Connection::set_timeout(int timeout_ms) {
  timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

void Connection::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Connection Connection::dial(const std::string& endpoint, int timeout_ms) {
  auto [host, port] = split_endpoint(endpoint);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res); rc != 0) {
    fail(Errc::NetworkError, "cannot resolve " + endpoint + ": " + ::gai_strerror(rc), endpoint);
  }
  int fd = -1;
  int last_errno = 0;
  for (auto* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    Connection probe(fd);
    probe.set_timeout(timeout_ms);
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return probe;
    }
    last_errno = errno;
  }
  ::freeaddrinfo(res);
  fail(Errc::NetworkError, "cannot connect to " + endpoint + ": " + std::strerror(last_errno), endpoint);
}

void Connection::send(const Frame& frame) {
  auto bytes = encode_frame(frame);
  std::size_t done = 0;
  while (done < bytes.size()) {
    auto n = ::send(fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(Errc::NetworkError, std::string("send failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

namespace {

void read_exact(int fd, std::uint8_t* out, std::size_t n) {
  std::size_t done = 0;
  while (done < n) {
    auto got = ::recv(fd, out + done, n - done, 0);
    if (got == 0) fail(Errc::NetworkError, "connection closed by peer");
    if (got < 0) {
      if (errno == EINTR) continue;
      fail(Errc::NetworkError, std::string("receive failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(got);
  }
}

}  // namespace

Frame Connection::receive() {
  std::uint8_t header[4];
  read_exact(fd_, header, 4);
  std::uint32_t len = (std::uint32_t(header[0]) << 24) | (std::uint32_t(header[1]) << 16) |
                      (std::uint32_t(header[2]) << 8) | header[3];
  if (len < 2 || len > kMaxFrameBody) {
    fail(Errc::ProtocolError, "frame length " + std::to_string(len) + " out of range");
  }
  Bytes body(len);
  read_exact(fd_, body.data(), len);
  return decode_body(body);
}

// ---- client ---------------------------------------------------------------

namespace {

Frame expect(Connection& conn, MessageType type) {
  auto frame = conn.receive();
  if (frame.type == MessageType::Error) throw decode_error(frame.payload);
  if (frame.type != type) {
    fail(Errc::ProtocolError, "unexpected message type " +
                                  std::to_string(static_cast<int>(frame.type)));
  }
  return frame;
}

}  // namespace

std::vector<crypto::KeyShare> request_shares(const std::string& endpoint,
                                             const std::string& reader_address,
                                             const crypto::SigningKey& signing_key,
                                             int timeout_ms) {
  auto conn = Connection::dial(endpoint, timeout_ms);
  conn.send({MessageType::Hello, encode_hello(reader_address)});
  auto hello = decode_challenge(expect(conn, MessageType::Challenge).payload);
  auto signature = crypto::sign_challenge(signing_key, hello.challenge);
  conn.send({MessageType::Auth, encode_auth(hello.session_id, signature)});
  return decode_shares(expect(conn, MessageType::Shares).payload);
}

}  // namespace martsia::authority
