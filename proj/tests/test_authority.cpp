#include <gtest/gtest.h>

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <thread>

#include "martsia/authority/attestation.hpp"
#include "martsia/authority/issuer.hpp"
#include "martsia/authority/server.hpp"
#include "martsia/authority/wire.hpp"
#include "martsia/policy/ast.hpp"
#include "support.hpp"

namespace martsia::authority {
namespace {

using testing::address;
using testing::error_of;
using testing::rsa_key;

constexpr std::size_t kReaderKey = 10;
constexpr std::size_t kOtherKey = 11;

class IssuerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { net_ = new testing::Network(testing::run_ceremony(2, 9)); }
  static void TearDownTestSuite() { delete net_; }

  void SetUp() override {
    issuer_ = std::make_unique<KeyIssuer>("Auth1", *net_->ledger, *net_->store);
    issuer_->ready(net_->params, net_->keypairs.at("Auth1"));
  }

  static void certify(const std::string& reader, std::vector<std::string> attributes,
                      std::size_t key, std::size_t certifier = 50) {
    AttestationDocument doc{reader, reader, std::move(attributes), rsa_key(key).verify_key()};
    auto rloc = net_->store->put(as_bytes(doc.encode()));
    net_->ledger->certifier_set(reader, rloc, address(certifier));
  }

  static std::vector<std::string> attributes_of(const std::vector<crypto::KeyShare>& shares) {
    std::vector<std::string> out;
    for (const auto& s : shares) out.push_back(s.attribute);
    return out;
  }

  static inline testing::Network* net_ = nullptr;
  std::unique_ptr<KeyIssuer> issuer_;
};

TEST_F(IssuerTest, AttestationDocumentRoundTrip) {
  AttestationDocument doc{address(1), address(1), {"Supplier", "43175279"}, rsa_key(kReaderKey).verify_key()};
  auto text = doc.encode();
  EXPECT_EQ(text.rfind("martsia-attestation/1\n", 0), 0u);
  auto back = AttestationDocument::decode(text);
  EXPECT_EQ(back.reader_address, doc.reader_address);
  EXPECT_EQ(back.attributes, (std::vector<std::string>{"43175279", "Supplier"}));
  EXPECT_EQ(back.verify_key, doc.verify_key);
  AttestationDocument empty{address(1), address(1), {}, rsa_key(kReaderKey).verify_key()};
  EXPECT_EQ(error_of([&] { empty.encode(); }), Errc::EmptyFields);
}

TEST_F(IssuerTest, SharesMatchOfflineKeygen) {
  auto reader = address(1);
  certify(reader, {"Supplier", "43175279"}, kReaderKey);
  auto hello = issuer_->handle_hello(reader);
  auto shares = issuer_->handle_auth(hello.session_id,
                                     crypto::sign_challenge(rsa_key(kReaderKey), hello.challenge));
  EXPECT_EQ(attributes_of(shares), (std::vector<std::string>{"43175279@Auth1", "Supplier@Auth1"}));
  for (const auto& s : shares) {
    EXPECT_EQ(s.gid, reader);
    EXPECT_TRUE(crypto::verify_share(net_->params, net_->keypairs.at("Auth1").public_key, s));
  }
}

TEST_F(IssuerTest, SessionsAreSingleUse) {
  auto reader = address(2);
  certify(reader, {"Customer"}, kReaderKey);
  auto hello = issuer_->handle_hello(reader);
  auto sig = crypto::sign_challenge(rsa_key(kReaderKey), hello.challenge);
  EXPECT_EQ(issuer_->handle_auth(hello.session_id, sig).size(), 1u);
  EXPECT_EQ(error_of([&] { issuer_->handle_auth(hello.session_id, sig); }), Errc::ReplayDetected);
}

TEST_F(IssuerTest, FailedAuthStillClosesTheSession) {
  auto reader = address(3);
  certify(reader, {"Customer"}, kReaderKey);
  auto hello = issuer_->handle_hello(reader);
  auto wrong = crypto::sign_challenge(rsa_key(kOtherKey), hello.challenge);
  EXPECT_EQ(error_of([&] { issuer_->handle_auth(hello.session_id, wrong); }), Errc::SignatureInvalid);
  auto right = crypto::sign_challenge(rsa_key(kReaderKey), hello.challenge);
  EXPECT_EQ(error_of([&] { issuer_->handle_auth(hello.session_id, right); }), Errc::ReplayDetected);
}

TEST_F(IssuerTest, SignatureOverAnotherChallengeIsRejected) {
  auto reader = address(4);
  certify(reader, {"Customer"}, kReaderKey);
  auto first = issuer_->handle_hello(reader);
  auto second = issuer_->handle_hello(reader);
  auto sig = crypto::sign_challenge(rsa_key(kReaderKey), first.challenge);
  EXPECT_EQ(error_of([&] { issuer_->handle_auth(second.session_id, sig); }), Errc::SignatureInvalid);
}

TEST_F(IssuerTest, UncertifiedReaderGetsNothing) {
  auto hello = issuer_->handle_hello(address(5));
  auto sig = crypto::sign_challenge(rsa_key(kReaderKey), hello.challenge);
  EXPECT_EQ(error_of([&] { issuer_->handle_auth(hello.session_id, sig); }), Errc::NoAttestations);
}

TEST_F(IssuerTest, OnlyAttestationsBoundToTheSigningKeyCount) {
  auto reader = address(6);
  certify(reader, {"Carrier"}, kReaderKey, 50);
  certify(reader, {"Customs"}, kOtherKey, 51);
  certify(reader, {"International"}, kReaderKey, 52);
  auto hello = issuer_->handle_hello(reader);
  auto shares = issuer_->handle_auth(hello.session_id,
                                     crypto::sign_challenge(rsa_key(kReaderKey), hello.challenge));
  EXPECT_EQ(attributes_of(shares),
            (std::vector<std::string>{"Carrier@Auth1", "International@Auth1"}));
}

TEST_F(IssuerTest, UnknownAndExpiredSessions) {
  SessionId bogus{};
  EXPECT_EQ(error_of([&] { issuer_->handle_auth(bogus, {}); }), Errc::UnknownSession);

  KeyIssuer short_lived("Auth1", *net_->ledger, *net_->store, IssuerOptions{2});
  short_lived.ready(net_->params, net_->keypairs.at("Auth1"));
  // Each hello or auth is one tick. A hello more than two ticks after a
  // session was opened sweeps it; an auth arriving that late finds it expired.
  auto swept = short_lived.handle_hello(address(7));
  for (int i = 0; i < 3; ++i) short_lived.handle_hello(address(8));
  EXPECT_EQ(error_of([&] { short_lived.handle_auth(swept.session_id, {}); }),
            Errc::UnknownSession);
  auto stale = short_lived.handle_hello(address(7));
  for (int i = 0; i < 2; ++i) error_of([&] { short_lived.handle_auth(bogus, {}); });
  EXPECT_EQ(error_of([&] { short_lived.handle_auth(stale.session_id, {}); }),
            Errc::SessionExpired);
}

TEST_F(IssuerTest, NotReadyAndBadAddress) {
  KeyIssuer idle("Auth1", *net_->ledger, *net_->store);
  EXPECT_FALSE(idle.is_ready());
  EXPECT_EQ(error_of([&] { idle.handle_hello(address(1)); }), Errc::ServerNotReady);
  EXPECT_EQ(error_of([&] { issuer_->handle_hello("someone"); }), Errc::BadAddress);
  EXPECT_EQ(error_of([&] { idle.ready(net_->params, net_->keypairs.at("Auth2")); }),
            Errc::InvalidArgument);
}

TEST(Wire, FramesRoundTrip) {
  Frame f{MessageType::Hello, encode_hello(address(1))};
  auto bytes = encode_frame(f);
  ASSERT_GE(bytes.size(), 6u);
  EXPECT_EQ(bytes[4], kProtocolVersion);
  auto back = decode_body(ByteView(bytes).subspan(4));
  EXPECT_EQ(back.type, MessageType::Hello);
  EXPECT_EQ(decode_hello(back.payload), address(1));

  auto err = decode_error(encode_error(Errc::NoAttestations, "nothing"));
  EXPECT_EQ(err.code(), Errc::NoAttestations);

  Hello h;
  h.session_id.fill(3);
  h.challenge.fill(9);
  auto hb = decode_challenge(encode_challenge(h));
  EXPECT_EQ(hb.session_id, h.session_id);
  EXPECT_EQ(hb.challenge, h.challenge);
}

TEST(Wire, MalformedBodiesAreProtocolErrors) {
  Bytes wrong_version = {0x02, 0x01};
  EXPECT_EQ(error_of([&] { decode_body(wrong_version); }), Errc::ProtocolError);
  Bytes unknown_type = {kProtocolVersion, 0x55};
  EXPECT_EQ(error_of([&] { decode_body(unknown_type); }), Errc::ProtocolError);
  EXPECT_EQ(error_of([&] { decode_hello(Bytes{1, 2}); }), Errc::ProtocolError);
  EXPECT_EQ(error_of([&] { decode_shares(Bytes{9, 9, 9, 9, 9}); }), Errc::ProtocolError);
}

TEST(Wire, SplitEndpoint) {
  EXPECT_EQ(split_endpoint("127.0.0.1:9001"), (std::pair<std::string, std::uint16_t>{"127.0.0.1", 9001}));
  EXPECT_EQ(error_of([] { split_endpoint("nohost"); }), Errc::InvalidArgument);
  EXPECT_EQ(error_of([] { split_endpoint("h:99999"); }), Errc::InvalidArgument);
}

class ServerTest : public IssuerTest {
 protected:
  void SetUp() override {
    IssuerTest::SetUp();
    server_ = std::make_unique<AuthorityServer>(*issuer_, "127.0.0.1:0", 5000);
    server_->start();
  }
  void TearDown() override { server_->stop(); }
  std::unique_ptr<AuthorityServer> server_;
};

TEST_F(ServerTest, RemoteSharesMatchOfflineKeygen) {
  auto reader = address(20);
  certify(reader, {"Manufacturer"}, kReaderKey);
  auto shares = request_shares(server_->endpoint(), reader, rsa_key(kReaderKey));
  ASSERT_EQ(shares.size(), 1u);
  EXPECT_EQ(shares[0].attribute, "Manufacturer@Auth1");
  EXPECT_TRUE(crypto::verify_share(net_->params, net_->keypairs.at("Auth1").public_key, shares[0]));
}

TEST_F(ServerTest, RemoteErrorsKeepTheirCode) {
  auto reader = address(21);
  EXPECT_EQ(error_of([&] { request_shares(server_->endpoint(), reader, rsa_key(kReaderKey)); }),
            Errc::NoAttestations);
  certify(reader, {"Manufacturer"}, kReaderKey);
  EXPECT_EQ(error_of([&] { request_shares(server_->endpoint(), reader, rsa_key(kOtherKey)); }),
            Errc::SignatureInvalid);
}

TEST_F(ServerTest, ConcurrentReaders) {
  constexpr int kReaders = 8;
  for (int i = 0; i < kReaders; ++i) certify(address(30 + i), {"Customer", "43175279"}, kReaderKey);
  std::vector<std::thread> threads;
  std::vector<std::size_t> counts(kReaders);
  for (int i = 0; i < kReaders; ++i) {
    threads.emplace_back([&, i] {
      counts[i] = request_shares(server_->endpoint(), address(30 + i), rsa_key(kReaderKey)).size();
    });
  }
  for (auto& t : threads) t.join();
  for (auto c : counts) EXPECT_EQ(c, 2u);
  server_->stop();  // joins the workers
  EXPECT_GE(server_->connections_handled(), std::uint64_t(kReaders));
}

TEST_F(ServerTest, GarbageConnectionDoesNotKillTheServer) {
  auto conn = Connection::dial(server_->endpoint(), 2000);
  const char junk[] = "\xff\xff\xff\xff garbage";
  ASSERT_GT(::send(conn.fd(), junk, sizeof junk, MSG_NOSIGNAL), 0);
  EXPECT_ANY_THROW(conn.receive());

  auto reader = address(40);
  certify(reader, {"Customer"}, kReaderKey);
  EXPECT_EQ(request_shares(server_->endpoint(), reader, rsa_key(kReaderKey)).size(), 1u);
}

TEST_F(ServerTest, AuthWithoutHelloIsRejected) {
  auto conn = Connection::dial(server_->endpoint(), 2000);
  SessionId bogus{};
  conn.send({MessageType::Auth, encode_auth(bogus, Bytes{1})});
  auto reply = conn.receive();
  ASSERT_EQ(reply.type, MessageType::Error);
  EXPECT_EQ(decode_error(reply.payload).code(), Errc::ProtocolError);
}

TEST_F(ServerTest, SessionsAreBoundToTheirConnection) {
  auto reader = address(41);
  certify(reader, {"Customer"}, kReaderKey);
  auto a = Connection::dial(server_->endpoint(), 2000);
  auto b = Connection::dial(server_->endpoint(), 2000);
  a.send({MessageType::Hello, encode_hello(reader)});
  b.send({MessageType::Hello, encode_hello(reader)});
  auto ha = decode_challenge(a.receive().payload);
  decode_challenge(b.receive().payload);
  b.send({MessageType::Auth,
          encode_auth(ha.session_id, crypto::sign_challenge(rsa_key(kReaderKey), ha.challenge))});
  auto reply = b.receive();
  ASSERT_EQ(reply.type, MessageType::Error);
  EXPECT_EQ(decode_error(reply.payload).code(), Errc::UnknownSession);
}

TEST(Server, BindFailureOnBusyPort) {
  auto net = testing::run_ceremony(1, 3);
  KeyIssuer issuer("Auth1", *net.ledger, *net.store);
  AuthorityServer a(issuer, "127.0.0.1:0");
  a.start();
  AuthorityServer b(issuer, a.endpoint());
  EXPECT_EQ(error_of([&] { b.start(); }), Errc::BindFailure);
  a.stop();
}

TEST(Server, UnreachableEndpointIsNetworkError) {
  auto port = testing::free_port();
  EXPECT_EQ(error_of([&] {
              request_shares("127.0.0.1:" + std::to_string(port), address(1), rsa_key(kReaderKey), 1000);
            }),
            Errc::NetworkError);
}

}  // namespace
}  // namespace martsia::authority
