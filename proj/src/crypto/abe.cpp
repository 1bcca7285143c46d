#include "martsia/crypto/abe.hpp"

#include <algorithm>

#include "martsia/crypto/abe_kernels.hpp"
#include "martsia/error.hpp"
#include "martsia/policy/lsss.hpp"

namespace martsia::crypto {

namespace {

constexpr std::string_view kParamsG1Dst = "MARTSIA-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_PARAMS_";
constexpr std::string_view kParamsG2Dst = "MARTSIA-V01-CS01-with-BLS12381G2_XMD:SHA-256_SSWU_RO_PARAMS_";
constexpr std::uint8_t kCiphertextVersion = 1;

// r, big-endian.
constexpr std::array<std::uint8_t, 32> kOrder = {
    0x73, 0xed, 0xa7, 0x53, 0x29, 0x9d, 0x7d, 0x48, 0x33, 0x39, 0xd8,
    0x08, 0x09, 0xa1, 0xd8, 0x05, 0x53, 0xbd, 0xa4, 0x02, 0xff, 0xfe,
    0x5b, 0xfe, 0xff, 0xff, 0xff, 0xff, 0x00, 0x00, 0x00, 0x01};

Bytes params_body(const PublicParameters& p) {
  ByteWriter w;
  w.str(p.group.group_id)
      .raw(p.group.order)
      .raw(p.group.generator)
      .raw(p.shared_element.compress())
      .raw(p.g2.compress())
      .raw(p.egg.to_bytes());
  return std::move(w).take();
}

G1 read_g1(ByteReader& r) { return G1::decompress(r.raw(G1::kCompressedSize)); }
G2 read_g2(ByteReader& r) { return G2::decompress(r.raw(G2::kCompressedSize)); }
Gt read_gt(ByteReader& r) { return Gt::from_bytes(r.raw(Gt::kSize)); }

void write_public_key(ByteWriter& w, const AuthorityPublicKey& pk) {
  w.str(pk.authority_id).raw(pk.egg_alpha.to_bytes()).raw(pk.g2_y.compress());
}

AuthorityPublicKey read_public_key(ByteReader& r) {
  AuthorityPublicKey pk;
  pk.authority_id = r.str();
  pk.egg_alpha = read_gt(r);
  pk.g2_y = read_g2(r);
  return pk;
}

struct KemOutput {
  SymmetricKey mask;
  Digest check;
};

KemOutput kem(const Gt& blinding) {
  auto enc = blinding.to_bytes();
  KemOutput out;
  out.mask = hash256({as_bytes("martsia/abe-kem/mask"), enc}).bytes;
  out.check = hash256({as_bytes("martsia/abe-kem/check"), enc});
  return out;
}

policy::AccessStructure structure_for(const std::string& policy_text,
                                      const std::vector<std::string>& authorities) {
  auto ast = policy::parse_policy(policy_text);
  return policy::compile_lsss(policy::expand_thresholds(ast, authorities));
}

void check_rows_match(const AbeCiphertext& ct, const policy::AccessStructure& lsss) {
  if (lsss.rows.size() != ct.rows.size()) {
    fail(Errc::MalformedCiphertext, "row count does not match compiled policy");
  }
  for (std::size_t i = 0; i < ct.rows.size(); ++i) {
    if (lsss.rows[i].attribute != ct.rows[i].attribute) {
      fail(Errc::MalformedCiphertext, "row attribute does not match compiled policy");
    }
  }
}

}  // namespace

GroupDescription GroupDescription::bls12_381() {
  GroupDescription g;
  g.group_id = std::string(kGroupId);
  g.order = kOrder;
  g.generator = G1::generator().compress();
  return g;
}

// ---- parameters -----------------------------------------------------------

Bytes PublicParameters::serialize() const {
  auto body = params_body(*this);
  body.insert(body.end(), params_digest.bytes.begin(), params_digest.bytes.end());
  return body;
}

PublicParameters PublicParameters::deserialize(ByteView bytes) {
  ByteReader r(bytes);
  PublicParameters p;
  p.group.group_id = r.str();
  p.group.order = r.fixed<32>();
  p.group.generator = r.fixed<G1::kCompressedSize>();
  if (!(p.group == GroupDescription::bls12_381())) {
    fail(Errc::Malformed, "unsupported pairing group " + p.group.group_id);
  }
  p.shared_element = read_g1(r);
  p.g2 = read_g2(r);
  p.egg = read_gt(r);
  p.params_digest.bytes = r.fixed<32>();
  r.expect_end();
  if (hash256(params_body(p)) != p.params_digest) {
    fail(Errc::IntegrityFailure, "params_digest does not match parameters");
  }
  return p;
}

bool PublicParameters::operator==(const PublicParameters& o) const {
  return serialize() == o.serialize();
}

PublicParameters global_setup(const Seed& seed) {
  PublicParameters p;
  p.group = GroupDescription::bls12_381();
  p.shared_element = G1::hash(seed, kParamsG1Dst);
  p.g2 = G2::hash(seed, kParamsG2Dst);
  p.egg = pairing(p.shared_element, p.g2);
  p.params_digest = hash256(params_body(p));
  return p;
}

// ---- authority keys -------------------------------------------------------

Bytes AuthorityPublicKey::serialize() const {
  ByteWriter w;
  write_public_key(w, *this);
  return std::move(w).take();
}

AuthorityPublicKey AuthorityPublicKey::deserialize(ByteView bytes) {
  ByteReader r(bytes);
  auto pk = read_public_key(r);
  r.expect_end();
  return pk;
}

bool AuthorityPublicKey::operator==(const AuthorityPublicKey& o) const {
  return authority_id == o.authority_id && egg_alpha == o.egg_alpha && g2_y == o.g2_y;
}

Bytes AuthorityKeypair::serialize() const {
  ByteWriter w;
  w.str(authority_id);
  write_public_key(w, public_key);
  w.raw(secret_key.alpha.to_bytes()).raw(secret_key.y.to_bytes());
  return std::move(w).take();
}

AuthorityKeypair AuthorityKeypair::deserialize(ByteView bytes) {
  ByteReader r(bytes);
  AuthorityKeypair kp;
  kp.authority_id = r.str();
  kp.public_key = read_public_key(r);
  kp.secret_key.alpha = Scalar::from_bytes(r.raw(32));
  kp.secret_key.y = Scalar::from_bytes(r.raw(32));
  r.expect_end();
  return kp;
}

AuthorityKeypair auth_setup(const PublicParameters& params,
                            const std::string& authority_id, Rng& rng) {
  AuthorityKeypair kp;
  kp.authority_id = authority_id;
  kp.secret_key.alpha = Scalar::random(rng);
  kp.secret_key.y = Scalar::random(rng);
  kp.public_key.authority_id = authority_id;
  kp.public_key.egg_alpha = params.egg.pow(kp.secret_key.alpha);
  kp.public_key.g2_y = params.g2 * kp.secret_key.y;
  return kp;
}

bool keypair_consistent(const PublicParameters& params, const AuthorityKeypair& kp) {
  return kp.public_key.authority_id == kp.authority_id &&
         pairing(params.shared_element * kp.secret_key.alpha, params.g2) ==
             kp.public_key.egg_alpha &&
         params.g2 * kp.secret_key.y == kp.public_key.g2_y;
}

// ---- key shares -----------------------------------------------------------

Bytes KeyShare::serialize() const {
  ByteWriter w;
  w.str(gid).str(authority_id).str(attribute).raw(k.compress()).raw(k_prime.compress());
  return std::move(w).take();
}

KeyShare KeyShare::deserialize(ByteView bytes) {
  ByteReader r(bytes);
  KeyShare s;
  s.gid = r.str();
  s.authority_id = r.str();
  s.attribute = r.str();
  s.k = read_g1(r);
  s.k_prime = read_g2(r);
  r.expect_end();
  return s;
}

bool KeyShare::operator==(const KeyShare& o) const {
  return gid == o.gid && authority_id == o.authority_id && attribute == o.attribute &&
         k == o.k && k_prime == o.k_prime;
}

KeyShare keygen(const PublicParameters& params, const AuthorityKeypair& authority,
                const std::string& gid, const std::string& attribute, Rng& rng) {
  auto [name, owner] = policy::split_namespaced(attribute);
  if (owner != authority.authority_id || !policy::is_attribute_name(name)) {
    fail(Errc::NamespaceMismatch,
         "authority " + authority.authority_id + " cannot issue " + attribute, attribute);
  }
  Scalar t = Scalar::random(rng);
  KeyShare s;
  s.gid = gid;
  s.authority_id = authority.authority_id;
  s.attribute = attribute;
  s.k = params.shared_element * authority.secret_key.alpha +
        kernels::hash_gid(gid) * authority.secret_key.y +
        kernels::hash_attribute(attribute) * t;
  s.k_prime = params.g2 * t;
  return s;
}

bool verify_share(const PublicParameters& params, const AuthorityPublicKey& pk,
                  const KeyShare& share) {
  if (share.authority_id != pk.authority_id) return false;
  try {
    if (policy::split_namespaced(share.attribute).second != pk.authority_id) return false;
  } catch (const Error&) {
    return false;
  }
  const std::array<std::pair<G1, G2>, 3> terms = {{
      {share.k, params.g2},
      {-kernels::hash_gid(share.gid), pk.g2_y},
      {-kernels::hash_attribute(share.attribute), share.k_prime},
  }};
  return multi_pairing(terms) == pk.egg_alpha;
}

std::set<std::string> FullDecryptionKey::attributes() const {
  std::set<std::string> out;
  for (const auto& [attr, _] : shares) out.insert(attr);
  return out;
}

Bytes FullDecryptionKey::serialize() const {
  ByteWriter w;
  w.str(gid).u32(static_cast<std::uint32_t>(shares.size()));
  for (const auto& [_, s] : shares) w.bytes(s.serialize());
  return std::move(w).take();
}

FullDecryptionKey FullDecryptionKey::deserialize(ByteView bytes) {
  ByteReader r(bytes);
  FullDecryptionKey fdk;
  fdk.gid = r.str();
  auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto s = KeyShare::deserialize(r.bytes());
    fdk.shares.emplace(s.attribute, std::move(s));
  }
  r.expect_end();
  return fdk;
}

FullDecryptionKey merge_shares(const std::vector<KeyShare>& shares) {
  if (shares.empty()) fail(Errc::InvalidArgument, "no shares to merge");
  FullDecryptionKey fdk;
  fdk.gid = shares.front().gid;
  for (const auto& s : shares) {
    if (s.gid != fdk.gid) {
      fail(Errc::GidMismatch, "shares belong to different readers", s.gid);
    }
    if (policy::split_namespaced(s.attribute).second != s.authority_id) {
      fail(Errc::NamespaceMismatch, "share attribute not owned by its authority", s.attribute);
    }
    fdk.shares.emplace(s.attribute, s);
  }
  return fdk;
}

// ---- ciphertexts ----------------------------------------------------------

bool CiphertextRow::operator==(const CiphertextRow& o) const {
  return attribute == o.attribute && c1 == o.c1 && c2 == o.c2 && c3 == o.c3 && c4 == o.c4;
}

Bytes AbeCiphertext::serialize() const {
  ByteWriter w;
  w.u8(kCiphertextVersion).str(kGroupId).str(policy_text);
  w.u32(static_cast<std::uint32_t>(authorities.size()));
  for (const auto& a : authorities) w.str(a);
  w.u32(static_cast<std::uint32_t>(rows.size()));
  for (const auto& row : rows) {
    w.str(row.attribute)
        .raw(row.c1.to_bytes())
        .raw(row.c2.compress())
        .raw(row.c3.compress())
        .raw(row.c4.compress());
  }
  w.raw(wrapped_value).raw(key_check.bytes);
  return std::move(w).take();
}

AbeCiphertext AbeCiphertext::deserialize(ByteView bytes) {
  try {
    ByteReader r(bytes);
    if (r.u8() != kCiphertextVersion) fail(Errc::MalformedCiphertext, "unknown version");
    if (r.str() != kGroupId) fail(Errc::MalformedCiphertext, "unknown pairing group");
    AbeCiphertext ct;
    ct.policy_text = r.str();
    auto na = r.u32();
    if (na > r.remaining()) fail(Errc::MalformedCiphertext, "bad authority count");
    for (std::uint32_t i = 0; i < na; ++i) ct.authorities.push_back(r.str());
    auto nr = r.u32();
    if (nr > r.remaining()) fail(Errc::MalformedCiphertext, "bad row count");
    for (std::uint32_t i = 0; i < nr; ++i) {
      CiphertextRow row;
      row.attribute = r.str();
      row.c1 = read_gt(r);
      row.c2 = read_g2(r);
      row.c3 = read_g2(r);
      row.c4 = read_g1(r);
      ct.rows.push_back(std::move(row));
    }
    ct.wrapped_value = r.fixed<32>();
    ct.key_check.bytes = r.fixed<32>();
    r.expect_end();
    check_rows_match(ct, structure_for(ct.policy_text, ct.authorities));
    return ct;
  } catch (const Error& e) {
    if (e.code() == Errc::MalformedCiphertext) throw;
    fail(Errc::MalformedCiphertext, e.what());
  }
}

AbeCiphertext abe_encrypt(const PublicParameters& params,
                          const AuthorityKeyMap& authority_pks,
                          const policy::Node& policy, const SymmetricKey& value,
                          Rng& rng, Exec exec) {
  std::vector<std::string> authorities;
  for (const auto& [id, _] : authority_pks) authorities.push_back(id);
  auto expanded = policy::expand_thresholds(policy, authorities);
  for (const auto& id : policy::referenced_authorities(expanded)) {
    if (!authority_pks.count(id)) {
      fail(Errc::MissingAuthorityKey, "no public key for authority " + id, id);
    }
  }
  auto lsss = policy::compile_lsss(expanded);

  // Randomness is drawn serially in a fixed order so both kernels agree.
  std::vector<Scalar> v(lsss.width), w(lsss.width);
  for (auto& x : v) x = Scalar::random(rng);
  for (std::size_t j = 1; j < w.size(); ++j) w[j] = Scalar::random(rng);
  auto lambda = policy::share(lsss, v);
  auto omega = policy::share(lsss, w);

  std::vector<kernels::EncryptRowInput> inputs;
  inputs.reserve(lsss.rows.size());
  for (std::size_t i = 0; i < lsss.rows.size(); ++i) {
    const auto& attr = lsss.rows[i].attribute;
    auto owner = policy::split_namespaced(attr).second;
    inputs.push_back({&attr, &authority_pks.at(owner), lambda[i], omega[i], Scalar::random(rng)});
  }

  AbeCiphertext ct;
  ct.policy_text = policy::to_string(policy);
  ct.authorities = std::move(authorities);
  ct.rows = exec == Exec::Parallel ? kernels::encrypt_rows_parallel(params, inputs)
                                   : kernels::encrypt_rows_serial(params, inputs);
  auto k = kem(params.egg.pow(v[0]));
  for (std::size_t i = 0; i < value.size(); ++i) ct.wrapped_value[i] = value[i] ^ k.mask[i];
  ct.key_check = k.check;
  return ct;
}

SymmetricKey abe_decrypt(const PublicParameters& params, const AbeCiphertext& ct,
                         const FullDecryptionKey& fdk, Exec exec) {
  (void)params;
  policy::AccessStructure lsss;
  try {
    lsss = structure_for(ct.policy_text, ct.authorities);
  } catch (const Error& e) {
    fail(Errc::MalformedCiphertext, e.what());
  }
  check_rows_match(ct, lsss);

  auto coeffs = policy::reconstruct(lsss, fdk.attributes());
  if (!coeffs) {
    fail(Errc::PolicyNotSatisfied, "key attributes do not satisfy " + ct.policy_text,
         ct.policy_text);
  }
  std::vector<kernels::DecryptRowInput> inputs;
  inputs.reserve(coeffs->size());
  for (const auto& [row, c] : *coeffs) {
    inputs.push_back({&ct.rows[row], &fdk.shares.at(ct.rows[row].attribute), c});
  }
  auto hashed_gid = kernels::hash_gid(fdk.gid);
  Gt blinding = exec == Exec::Parallel ? kernels::decrypt_rows_parallel(hashed_gid, inputs)
                                       : kernels::decrypt_rows_serial(hashed_gid, inputs);
  auto k = kem(blinding);
  if (k.check != ct.key_check) {
    fail(Errc::DecryptionFailed, "recovered key does not match ciphertext check");
  }
  SymmetricKey out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ct.wrapped_value[i] ^ k.mask[i];
  return out;
}

}  // namespace martsia::crypto
