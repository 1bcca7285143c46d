#pragma once

// Per-row kernels behind abe_encrypt / abe_decrypt. Rows are independent, so
// the parallel variants split them across OpenMP threads; the serial variants
// are the reference the tests compare against.

#include <span>
#include <string>
#include <vector>

#include "martsia/crypto/abe.hpp"

namespace martsia::crypto::kernels {

struct EncryptRowInput {
  const std::string* attribute;
  const AuthorityPublicKey* authority;
  Scalar lambda;  // share of the blinding exponent z
  Scalar omega;   // share of zero
  Scalar t;       // per-row randomness
};

std::vector<CiphertextRow> encrypt_rows_serial(const PublicParameters& params,
                                               std::span<const EncryptRowInput> in);
std::vector<CiphertextRow> encrypt_rows_parallel(const PublicParameters& params,
                                                 std::span<const EncryptRowInput> in);

struct DecryptRowInput {
  const CiphertextRow* row;
  const KeyShare* share;
  Scalar coefficient;
};

/// prod_x (C1 * e(K, C2) * e(H(gid), C3) * e(C4, K'))^c_x.
Gt decrypt_rows_serial(const G1& hashed_gid, std::span<const DecryptRowInput> in);
Gt decrypt_rows_parallel(const G1& hashed_gid, std::span<const DecryptRowInput> in);

/// F(u): hash of a namespaced attribute into G1.
G1 hash_attribute(const std::string& attribute);
/// H(GID): hash of a reader's global identifier into G1.
G1 hash_gid(const std::string& gid);

}  // namespace martsia::crypto::kernels
