#include "support.hpp"

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <map>
#include <mutex>
#include <set>

#include "martsia/crypto/hash.hpp"
#include "martsia/error.hpp"
#include "martsia/store/datastore.hpp"

namespace martsia::testing {

std::string address(std::size_t index) {
  auto d = crypto::hash256("test-address/" + std::to_string(index));
  return "0x" + hex_encode(ByteView(d.bytes).first(20));
}

const crypto::SigningKey& rsa_key(std::size_t index) {
  static std::mutex mu;
  static std::map<std::size_t, crypto::SigningKey> keys;
  std::lock_guard lock(mu);
  auto it = keys.find(index);
  if (it == keys.end()) it = keys.emplace(index, crypto::SigningKey::generate(kTestRsaBits)).first;
  return it->second;
}

const crypto::PublicParameters& params() {
  static const auto p = [] {
    crypto::Seed seed{};
    seed.fill(0x5a);
    return crypto::global_setup(seed);
  }();
  return p;
}

const crypto::AuthorityKeypair& AuthoritySet::keypair(const std::string& id) const {
  for (const auto& kp : keypairs) {
    if (kp.authority_id == id) return kp;
  }
  fail(Errc::UnknownAuthority, "no test authority " + id, id);
}

AuthoritySet make_authorities(std::size_t count, const std::string& prefix) {
  AuthoritySet set;
  SeededRng rng(0xA17u + count);
  for (std::size_t i = 1; i <= count; ++i) {
    auto id = prefix + std::to_string(i);
    auto kp = crypto::auth_setup(params(), id, rng);
    set.ids.push_back(id);
    set.public_keys.emplace(id, kp.public_key);
    set.keypairs.push_back(std::move(kp));
  }
  return set;
}

crypto::FullDecryptionKey issue_fdk(const AuthoritySet& authorities, const std::string& gid,
                                    const policy::AttestationSet& attestations, Rng& rng) {
  crypto::FullDecryptionKey fdk;
  fdk.gid = gid;
  for (const auto& [attr, auth] : attestations.entries) {
    auto share = crypto::keygen(params(), authorities.keypair(auth), gid,
                                policy::namespaced(attr, auth), rng);
    fdk.shares.emplace(share.attribute, std::move(share));
  }
  return fdk;
}

namespace {

std::uint32_t pick(Rng& rng, std::uint32_t bound) {
  auto b = rng.draw<4>();
  std::uint32_t v = b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t(b[3]) << 24);
  return v % bound;
}

policy::Node random_node(Rng& rng, const PolicyShape& shape, unsigned depth) {
  bool leaf = depth == 0 || pick(rng, 3) == 0;
  if (leaf) {
    const auto& attr = shape.attributes[pick(rng, shape.attributes.size())];
    if (pick(rng, 2) == 0) {
      const auto& auth = shape.authorities[pick(rng, shape.authorities.size())];
      return policy::Node::leaf(attr, policy::AuthSpec::named(auth));
    }
    auto n = 1 + pick(rng, shape.authorities.size());
    return policy::Node::leaf(attr, policy::AuthSpec::threshold(n));
  }
  std::vector<policy::Node> children;
  auto count = 2 + pick(rng, shape.max_children - 1);
  for (unsigned i = 0; i < count; ++i) children.push_back(random_node(rng, shape, depth - 1));
  return pick(rng, 2) == 0 ? policy::Node::all_of(std::move(children))
                           : policy::Node::any_of(std::move(children));
}

void collect_universe(const policy::Node& n, const std::vector<std::string>& authorities,
                      std::set<std::pair<std::string, std::string>>& out) {
  if (n.kind != policy::Node::Kind::Leaf) {
    for (const auto& c : n.children) collect_universe(c, authorities, out);
    return;
  }
  if (n.auth.kind == policy::AuthSpec::Kind::Named) {
    out.emplace(n.attribute, n.auth.authority);
  } else {
    for (const auto& a : authorities) out.emplace(n.attribute, a);
  }
}

}  // namespace

policy::Node random_policy(Rng& rng, const PolicyShape& shape) {
  return random_node(rng, shape, shape.max_depth);
}

std::vector<std::pair<std::string, std::string>> relevant_universe(
    const policy::Node& ast, const std::vector<std::string>& authorities) {
  std::set<std::pair<std::string, std::string>> out;
  collect_universe(ast, authorities, out);
  return {out.begin(), out.end()};
}

std::vector<policy::Node> policy_family(std::size_t count, const PolicyShape& shape,
                                        std::size_t max_universe, std::uint64_t seed) {
  SeededRng rng(seed);
  std::set<std::string> seen;
  std::vector<policy::Node> out;
  while (out.size() < count) {
    auto p = random_policy(rng, shape);
    if (relevant_universe(p, shape.authorities).size() > max_universe) continue;
    if (seen.insert(policy::to_string(p)).second) out.push_back(std::move(p));
  }
  return out;
}

policy::AttestationSet subset(const std::vector<std::pair<std::string, std::string>>& universe,
                              std::uint64_t mask) {
  policy::AttestationSet s;
  for (std::size_t i = 0; i < universe.size(); ++i) {
    if (mask >> i & 1) s.add(universe[i].first, universe[i].second);
  }
  return s;
}

TempDir::TempDir() {
  auto base = std::filesystem::temp_directory_path();
  SystemRng rng;
  path_ = (base / ("martsia-test-" + hex_encode(rng.draw(8)))).string();
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

crypto::AuthorityKeyMap Network::public_keys() const {
  crypto::AuthorityKeyMap out;
  for (const auto& [id, kp] : keypairs) out.emplace(id, kp.public_key);
  return out;
}

Network run_ceremony(std::size_t count, std::uint64_t seed, std::vector<std::string> endpoints) {
  Network net;
  net.ledger = ledger::Ledger::in_memory();
  net.store = std::make_unique<store::MemoryStore>();
  if (endpoints.empty()) endpoints.assign(count, "127.0.0.1:0");
  for (std::size_t i = 0; i < count; ++i) {
    net.metadata.authorities.push_back(
        {"Auth" + std::to_string(i + 1), endpoints.at(i), rsa_key(i).verify_key()});
    net.addresses.push_back(address(100 + i));
  }
  std::vector<ceremony::Participant> parts;
  for (std::size_t i = 0; i < count; ++i) {
    parts.emplace_back(net.metadata.authorities[i].authority_id, net.addresses[i], *net.ledger,
                       *net.store);
  }
  SeededRng rng(seed);
  for (auto& p : parts) p.publish_metadata(net.metadata);
  for (auto& p : parts) p.commit_round(rng);
  for (auto& p : parts) p.open_round();
  for (auto& p : parts) net.params = p.finalize();
  for (auto& p : parts) {
    auto keys = p.publish_keys(net.params, rng);
    net.keypairs.emplace(p.authority_id(), std::move(keys.keypair));
  }
  return net;
}

std::uint16_t free_port() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace martsia::testing
