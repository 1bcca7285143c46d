#pragma once

// Decentralized ciphertext-policy multi-authority ABE in asymmetric-pairing
// form. Authorities hold (alpha, y); a reader's key for
// attribute u from authority A, bound to global identifier GID, is
//   K  = g1^alpha * H(GID)^y * F(u)^t      (G1)
//   K' = g2^t                              (G2)
// A ciphertext row x with authority rho(x) carries
//   C1 = e(g1,g2)^lambda_x * e(g1,g2)^(alpha * t_x)
//   C2 = g2^-t_x,  C3 = g2^(y * t_x) * g2^omega_x,  C4 = F(u_x)^t_x
// where lambda/omega are LSSS shares of z and 0. The 32-byte payload is
// masked with a KDF of e(g1,g2)^z.

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "martsia/bytes.hpp"
#include "martsia/crypto/aead.hpp"
#include "martsia/crypto/group.hpp"
#include "martsia/crypto/hash.hpp"
#include "martsia/exec.hpp"
#include "martsia/policy/ast.hpp"
#include "martsia/rng.hpp"

namespace martsia::crypto {

using Seed = std::array<std::uint8_t, 32>;

struct GroupDescription {
  std::string group_id{kGroupId};
  std::array<std::uint8_t, 32> order{};  // big-endian r
  std::array<std::uint8_t, G1::kCompressedSize> generator{};

  static GroupDescription bls12_381();
  bool operator==(const GroupDescription&) const = default;
};

struct PublicParameters {
  GroupDescription group;
  G1 shared_element;  // g1 = hash-to-G1(seed)
  G2 g2;              // hash-to-G2(seed)
  Gt egg;             // e(g1, g2)
  Digest params_digest;

  Bytes serialize() const;
  /// Verifies group membership and that params_digest matches.
  static PublicParameters deserialize(ByteView bytes);
  bool operator==(const PublicParameters& o) const;
};

/// Pure function of the seed.
PublicParameters global_setup(const Seed& seed);

struct AuthorityPublicKey {
  std::string authority_id;
  Gt egg_alpha;  // e(g1,g2)^alpha
  G2 g2_y;       // g2^y

  Bytes serialize() const;
  static AuthorityPublicKey deserialize(ByteView bytes);
  bool operator==(const AuthorityPublicKey& o) const;
};

struct AuthoritySecretKey {
  Scalar alpha;
  Scalar y;
};

struct AuthorityKeypair {
  std::string authority_id;
  AuthorityPublicKey public_key;
  AuthoritySecretKey secret_key;

  Bytes serialize() const;
  static AuthorityKeypair deserialize(ByteView bytes);
};

AuthorityKeypair auth_setup(const PublicParameters& params,
                            const std::string& authority_id, Rng& rng);

/// Pairing check e(g1^alpha, g2) == egg_alpha plus g2^y == g2_y.
bool keypair_consistent(const PublicParameters& params,
                        const AuthorityKeypair& keypair);

struct KeyShare {
  std::string gid;
  std::string authority_id;
  std::string attribute;  // ATTR@authority_id
  G1 k;
  G2 k_prime;

  Bytes serialize() const;
  static KeyShare deserialize(ByteView bytes);
  bool operator==(const KeyShare& o) const;
};

/// Throws Error(NamespaceMismatch) when the attribute's authority suffix is
/// not the issuing authority.
KeyShare keygen(const PublicParameters& params, const AuthorityKeypair& authority,
                const std::string& gid, const std::string& attribute, Rng& rng);

/// e(K, g2) == egg_alpha * e(H(gid), g2^y) * e(F(u), K').
bool verify_share(const PublicParameters& params, const AuthorityPublicKey& pk,
                  const KeyShare& share);

struct FullDecryptionKey {
  std::string gid;
  std::map<std::string, KeyShare> shares;  // keyed by namespaced attribute

  std::set<std::string> attributes() const;
  Bytes serialize() const;
  static FullDecryptionKey deserialize(ByteView bytes);
};

/// Throws Error(GidMismatch) on mixed gids, InvalidArgument on an empty set.
/// Duplicate (authority, attribute) pairs keep the first share.
FullDecryptionKey merge_shares(const std::vector<KeyShare>& shares);

using AuthorityKeyMap = std::map<std::string, AuthorityPublicKey>;

struct CiphertextRow {
  std::string attribute;
  Gt c1;
  G2 c2;
  G2 c3;
  G1 c4;
  bool operator==(const CiphertextRow& o) const;
};

struct AbeCiphertext {
  std::string policy_text;               // canonical policy, in clear
  std::vector<std::string> authorities;  // expansion set for `n+` leaves
  std::vector<CiphertextRow> rows;
  SymmetricKey wrapped_value{};
  Digest key_check;

  Bytes serialize() const;
  /// Re-parses and re-compiles the policy; throws Error(MalformedCiphertext)
  /// if the rows do not match the compiled access structure.
  static AbeCiphertext deserialize(ByteView bytes);
  bool operator==(const AbeCiphertext& o) const = default;
};

/// The `n+` expansion set is the key set of `authority_pks`.
/// Throws MissingAuthorityKey, ThresholdExceedsAuthorities.
AbeCiphertext abe_encrypt(const PublicParameters& params,
                          const AuthorityKeyMap& authority_pks,
                          const policy::Node& policy, const SymmetricKey& value,
                          Rng& rng, Exec exec = Exec::Parallel);

/// Throws PolicyNotSatisfied (detail = policy text) when the key's
/// attributes cannot reconstruct, DecryptionFailed when they can but the
/// recovered blinding element is wrong (e.g. shares from different gids),
/// MalformedCiphertext on structural problems.
SymmetricKey abe_decrypt(const PublicParameters& params, const AbeCiphertext& ct,
                         const FullDecryptionKey& fdk, Exec exec = Exec::Parallel);

}  // namespace martsia::crypto
