#include "martsia/crypto/abe_kernels.hpp"

#include <array>

namespace martsia::crypto::kernels {

namespace {

constexpr std::string_view kAttributeDst = "MARTSIA-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_ATTR_";
constexpr std::string_view kGidDst = "MARTSIA-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_GID_";

CiphertextRow encrypt_row(const PublicParameters& params, const EncryptRowInput& in) {
  CiphertextRow row;
  row.attribute = *in.attribute;
  row.c1 = params.egg.pow(in.lambda) * in.authority->egg_alpha.pow(in.t);
  row.c2 = -(params.g2 * in.t);
  row.c3 = in.authority->g2_y * in.t + params.g2 * in.omega;
  row.c4 = hash_attribute(row.attribute) * in.t;
  return row;
}

Gt decrypt_row(const G1& hashed_gid, const DecryptRowInput& in) {
  const std::array<std::pair<G1, G2>, 3> terms = {{
      {in.share->k, in.row->c2},
      {hashed_gid, in.row->c3},
      {in.row->c4, in.share->k_prime},
  }};
  return (in.row->c1 * multi_pairing(terms)).pow(in.coefficient);
}

}  // namespace

G1 hash_attribute(const std::string& attribute) {
  return G1::hash(as_bytes(attribute), kAttributeDst);
}

G1 hash_gid(const std::string& gid) { return G1::hash(as_bytes(gid), kGidDst); }

std::vector<CiphertextRow> encrypt_rows_serial(const PublicParameters& params,
                                               std::span<const EncryptRowInput> in) {
  std::vector<CiphertextRow> out;
  out.reserve(in.size());
  for (const auto& row : in) out.push_back(encrypt_row(params, row));
  return out;
}

std::vector<CiphertextRow> encrypt_rows_parallel(const PublicParameters& params,
                                                 std::span<const EncryptRowInput> in) {
  std::vector<CiphertextRow> out(in.size());
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = encrypt_row(params, in[static_cast<std::size_t>(i)]);
  }
  return out;
}

Gt decrypt_rows_serial(const G1& hashed_gid, std::span<const DecryptRowInput> in) {
  Gt acc;
  for (const auto& row : in) acc *= decrypt_row(hashed_gid, row);
  return acc;
}

Gt decrypt_rows_parallel(const G1& hashed_gid, std::span<const DecryptRowInput> in) {
  std::vector<Gt> terms(in.size());
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    terms[static_cast<std::size_t>(i)] = decrypt_row(hashed_gid, in[static_cast<std::size_t>(i)]);
  }
  Gt acc;
  for (const auto& t : terms) acc *= t;
  return acc;
}

}  // namespace martsia::crypto::kernels
