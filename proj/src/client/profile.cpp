#include <openssl/evp.h>
#include <sys/stat.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "martsia/client/client.hpp"
#include "martsia/crypto/aead.hpp"
#include "martsia/error.hpp"

namespace martsia::client {

namespace {

constexpr std::string_view kProfileMagic = "martsia-profile/1";
constexpr std::string_view kCacheMagic = "martsia-fdk-cache/1";
constexpr unsigned kPbkdf2Iterations = 100000;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::NotFound, "cannot read " + path.string(), path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_private(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoError, "cannot write " + tmp.string(), tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(Errc::IoError, "cannot write " + tmp.string(), tmp.string());
  }
  ::chmod(tmp.c_str(), 0600);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(Errc::IoError, "cannot replace " + path.string(), ec.message());
}

std::map<std::string, std::string> parse_kv(std::string_view text, std::string_view magic,
                                            const std::string& what) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != magic) {
    fail(Errc::Malformed, what + " lacks the " + std::string(magic) + " header");
  }
  std::map<std::string, std::string> kv;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::Malformed, what + " line without '='");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

crypto::SymmetricKey derive_key(const std::string& passphrase, ByteView salt) {
  crypto::SymmetricKey key{};
  if (PKCS5_PBKDF2_HMAC(passphrase.data(), static_cast<int>(passphrase.size()), salt.data(),
                        static_cast<int>(salt.size()), kPbkdf2Iterations, EVP_sha256(),
                        static_cast<int>(key.size()), key.data()) != 1) {
    fail(Errc::InvalidArgument, "key derivation failed");
  }
  return key;
}

}  // namespace

std::string_view role_name(Role role) {
  switch (role) {
    case Role::Owner: return "owner";
    case Role::Reader: return "reader";
    case Role::Certifier: return "certifier";
    case Role::Authority: return "authority";
  }
  return "?";
}

Role parse_role(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto r : {Role::Owner, Role::Reader, Role::Certifier, Role::Authority}) {
    if (role_name(r) == lower) return r;
  }
  fail(Errc::InvalidArgument, "unknown role '" + std::string(name) + "'", std::string(name));
}

ActorProfile ActorProfile::create(Role role, std::string address,
                                  std::filesystem::path key_store_path, crypto::SigningKey key) {
  if (!ledger::is_address(address)) {
    fail(Errc::BadAddress, "malformed address '" + address + "'", address);
  }
  ActorProfile p{role, std::move(address), std::move(key), std::move(key_store_path)};
  p.save();
  return p;
}

void ActorProfile::save() const {
  std::error_code ec;
  std::filesystem::create_directories(key_store_path, ec);
  if (ec) fail(Errc::IoError, "cannot create " + key_store_path.string(), ec.message());
  ::chmod(key_store_path.c_str(), 0700);
  std::string profile(kProfileMagic);
  profile += "\naddress=" + address + "\nrole=" + std::string(role_name(role)) + "\n";
  write_private(key_store_path / "profile", profile);
  write_private(key_store_path / "signing_key.pem", signing_key.pem());
  write_private(key_store_path / "verify_key.pem", verify_key().pem());
}

ActorProfile ActorProfile::load(const std::filesystem::path& key_store_path) {
  auto kv = parse_kv(read_file(key_store_path / "profile"), kProfileMagic, "profile");
  if (!kv.count("address") || !kv.count("role")) fail(Errc::Malformed, "profile is incomplete");
  auto key = crypto::SigningKey::from_pem(read_file(key_store_path / "signing_key.pem"));
  if (!ledger::is_address(kv["address"])) {
    fail(Errc::BadAddress, "profile holds a malformed address", kv["address"]);
  }
  return ActorProfile{parse_role(kv["role"]), kv["address"], std::move(key), key_store_path};
}

namespace fdk_cache {

void save(const std::filesystem::path& path, const crypto::FullDecryptionKey& fdk,
          const std::string& passphrase, Rng& rng) {
  auto salt = rng.draw<16>();
  auto nonce = rng.draw<12>();
  auto ct = crypto::aead_encrypt(derive_key(passphrase, salt), nonce, fdk.serialize(),
                                 as_bytes(kCacheMagic));
  std::string out(kCacheMagic);
  out += "\nciphertext=" + base64_encode(ct) + "\nnonce=" + base64_encode(nonce) +
         "\nsalt=" + base64_encode(salt) + "\n";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_private(path, out);
}

std::optional<crypto::FullDecryptionKey> load(const std::filesystem::path& path,
                                              const std::string& passphrase) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    auto kv = parse_kv(read_file(path), kCacheMagic, "key cache");
    auto salt = base64_decode(kv.at("salt"));
    auto nonce_bytes = base64_decode(kv.at("nonce"));
    crypto::Nonce nonce{};
    if (nonce_bytes.size() != nonce.size()) fail(Errc::Malformed, "bad nonce");
    std::copy(nonce_bytes.begin(), nonce_bytes.end(), nonce.begin());
    auto plain = crypto::aead_decrypt(derive_key(passphrase, salt), nonce,
                                      base64_decode(kv.at("ciphertext")), as_bytes(kCacheMagic));
    return crypto::FullDecryptionKey::deserialize(plain);
  } catch (const std::exception& e) {
    fail(Errc::AuthenticationFailed, "cannot open key cache " + path.string() + ": " + e.what(),
         path.string());
  }
}

}  // namespace fdk_cache

}  // namespace martsia::client
