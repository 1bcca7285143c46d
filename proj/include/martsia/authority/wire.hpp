#pragma once

// Key-request wire protocol. A frame is a 4-byte big-endian body length,
// then the body: protocol version, message type, canonical payload.
//
//   reader                      authority
//     HELLO(address)       ->
//                          <-   CHALLENGE(session_id, challenge)
//     AUTH(session_id, sig) ->
//                          <-   SHARES(share...) | ERROR(code, message)

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "martsia/authority/issuer.hpp"
#include "martsia/bytes.hpp"
#include "martsia/crypto/abe.hpp"
#include "martsia/crypto/signature.hpp"
#include "martsia/error.hpp"

namespace martsia::authority {

inline constexpr std::uint8_t kProtocolVersion = 0x01;
inline constexpr std::size_t kMaxFrameBody = 1 << 20;

enum class MessageType : std::uint8_t {
  Hello = 0x01,
  Challenge = 0x02,
  Auth = 0x03,
  Shares = 0x04,
  Error = 0x7F,
};

struct Frame {
  MessageType type;
  Bytes payload;
};

Bytes encode_frame(const Frame& frame);
/// Parses a complete body (version + type + payload). Throws ProtocolError.
Frame decode_body(ByteView body);

Bytes encode_hello(const std::string& reader_address);
std::string decode_hello(ByteView payload);
Bytes encode_challenge(const Hello& hello);
Hello decode_challenge(ByteView payload);
Bytes encode_auth(const SessionId& session_id, ByteView signature);
std::pair<SessionId, Bytes> decode_auth(ByteView payload);
Bytes encode_shares(const std::vector<crypto::KeyShare>& shares);
std::vector<crypto::KeyShare> decode_shares(ByteView payload);
Bytes encode_error(Errc code, const std::string& message);
/// The remote error, rebuilt as a local Error.
Error decode_error(ByteView payload);

/// Blocking framed socket. Owns the descriptor.
class Connection {
 public:
  explicit Connection(int fd);
  ~Connection();
  Connection(Connection&& o) noexcept;
  Connection& operator=(Connection&&) = delete;
  Connection(const Connection&) = delete;

  /// Throws NetworkError.
  static Connection dial(const std::string& endpoint, int timeout_ms);

  void send(const Frame& frame);
  /// Throws NetworkError on I/O failure or EOF, ProtocolError on a bad frame.
  Frame receive();
  void set_timeout(int timeout_ms);
  void shutdown();
  int fd() const { return fd_; }

 private:
  int fd_;
};

/// Splits `host:port`. Throws InvalidArgument.
std::pair<std::string, std::uint16_t> split_endpoint(const std::string& endpoint);

/// Runs HELLO/AUTH against one authority and returns its shares. Remote
/// failures are rethrown with the authority's error code.
std::vector<crypto::KeyShare> request_shares(const std::string& endpoint,
                                             const std::string& reader_address,
                                             const crypto::SigningKey& signing_key,
                                             int timeout_ms = 10000);

}  // namespace martsia::authority
