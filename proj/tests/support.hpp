#pragma once

// Shared fixtures. RSA key generation is slow, so test identities use
// 2048-bit keys generated once per process and handed out by index.

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <map>
#include <memory>

#include "martsia/ceremony/ceremony.hpp"
#include "martsia/crypto/abe.hpp"
#include "martsia/error.hpp"
#include "martsia/crypto/signature.hpp"
#include "martsia/policy/oracle.hpp"

namespace martsia::testing {

inline constexpr int kTestRsaBits = 2048;

const crypto::SigningKey& rsa_key(std::size_t index);

/// Code of the martsia::Error raised by `f`; records a failure if none is.
template <class F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::InvalidArgument;
}

/// Deterministic well-formed ledger address for actor `index`.
std::string address(std::size_t index);

/// Parameters from a fixed seed, shared across a test binary.
const crypto::PublicParameters& params();

struct AuthoritySet {
  std::vector<std::string> ids;
  std::vector<crypto::AuthorityKeypair> keypairs;
  crypto::AuthorityKeyMap public_keys;

  const crypto::AuthorityKeypair& keypair(const std::string& id) const;
};

/// Authorities named `prefix1..prefixN`, keys from a fixed seed.
AuthoritySet make_authorities(std::size_t count, const std::string& prefix = "Auth");

/// Shares for every attestation of `gid`, one per (attribute, authority).
crypto::FullDecryptionKey issue_fdk(const AuthoritySet& authorities, const std::string& gid,
                                    const policy::AttestationSet& attestations, Rng& rng);

struct PolicyShape {
  std::vector<std::string> attributes;
  std::vector<std::string> authorities;
  unsigned max_depth = 3;
  unsigned max_children = 3;
};

/// Random policy AST over `shape`; leaves mix named authorities and `n+`
/// thresholds with n <= |authorities|. Connectives get at least 2 children.
policy::Node random_policy(Rng& rng, const PolicyShape& shape);

/// Deterministic family of `count` distinct policies whose relevant
/// attestation universe (see below) has at most `max_universe` entries.
std::vector<policy::Node> policy_family(std::size_t count, const PolicyShape& shape,
                                        std::size_t max_universe, std::uint64_t seed);

/// Every (attribute, authority) attestation that can influence `ast` when
/// thresholds range over `authorities`.
std::vector<std::pair<std::string, std::string>> relevant_universe(
    const policy::Node& ast, const std::vector<std::string>& authorities);

/// Attestation set made of the universe entries selected by `mask`.
policy::AttestationSet subset(const std::vector<std::pair<std::string, std::string>>& universe,
                              std::uint64_t mask);

/// Outcome of an honest parameter ceremony on a fresh in-memory ledger
/// and datastore. Authority i (0-based) acts from address(100 + i) and
/// signs with rsa_key(i).
struct Network {
  std::unique_ptr<ledger::Ledger> ledger;
  std::unique_ptr<store::DataStore> store;
  ceremony::MetadataDocument metadata;
  std::vector<std::string> addresses;
  crypto::PublicParameters params;
  std::map<std::string, crypto::AuthorityKeypair> keypairs;

  crypto::AuthorityKeyMap public_keys() const;
};

/// `endpoints` defaults to 127.0.0.1:0 for every authority.
Network run_ceremony(std::size_t count, std::uint64_t seed,
                     std::vector<std::string> endpoints = {});

/// A TCP port that was free a moment ago.
std::uint16_t free_port();

/// A unique scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace martsia::testing
