#pragma once

// Actor-side workflows tying the ceremony artifacts, ledger, datastore,
// envelope format and key-request protocol together.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "martsia/ceremony/ceremony.hpp"
#include "martsia/crypto/abe.hpp"
#include "martsia/crypto/signature.hpp"
#include "martsia/envelope/envelope.hpp"
#include "martsia/ledger/ledger.hpp"
#include "martsia/store/datastore.hpp"

namespace martsia::client {

enum class Role { Owner, Reader, Certifier, Authority };
std::string_view role_name(Role role);
/// Case-insensitive. Throws InvalidArgument.
Role parse_role(std::string_view name);

/// An actor's identity: ledger account plus RSA signing key, persisted in a
/// key-store directory (`profile` text file and `signing_key.pem`, 0600).
struct ActorProfile {
  Role role;
  std::string address;
  crypto::SigningKey signing_key;
  std::filesystem::path key_store_path;

  crypto::VerifyKey verify_key() const { return signing_key.verify_key(); }

  /// Validates the address and writes the key store. Throws BadAddress.
  static ActorProfile create(Role role, std::string address, std::filesystem::path key_store_path,
                             crypto::SigningKey key);
  /// Throws NotFound, Malformed.
  static ActorProfile load(const std::filesystem::path& key_store_path);
  void save() const;
};

/// Shared infrastructure every actor reaches: the ledger and the datastore.
struct Deployment {
  ledger::Ledger& ledger;
  store::DataStore& store;
};

// ---- certifier ------------------------------------------------------------

/// Stores an AttestationDocument and posts its rloc. The gid is the reader's
/// address. Throws EmptyFields, BadAddress, InvalidArgument.
std::uint64_t certify_reader(const ActorProfile& certifier, Deployment dep,
                             const std::string& reader_address, const std::string& gid,
                             const std::vector<std::string>& attributes,
                             const crypto::VerifyKey& reader_verify_key);

// ---- consistency ----------------------------------------------------------

/// Agreement of one artifact class across the registered authorities.
struct ArtifactAgreement {
  std::optional<store::Rloc> majority;
  std::vector<std::string> divergent;  // authority ids whose rloc differs
  std::vector<std::string> missing;    // authority ids that posted nothing

  bool agree() const { return majority && divergent.empty() && missing.empty(); }
};

struct ConsistencyReport {
  std::vector<std::string> authorities;
  ArtifactAgreement metadata;
  ArtifactAgreement params;
  std::vector<std::string> missing_public_keys;
  std::vector<std::string> problems;  // artifacts that fail to load or verify

  bool consistent() const;
  std::string to_text() const;
};

/// Compares what every authority posted; never throws on disagreement.
/// Throws MissingArtifacts when no ceremony exists on the ledger.
ConsistencyReport verify_authority_consistency(Deployment dep);

/// Parameters, authority public keys and network description as agreed on
/// the ledger.
struct PublicMaterial {
  crypto::PublicParameters params;
  crypto::AuthorityKeyMap public_keys;
  ceremony::MetadataDocument metadata;
};

/// Throws MissingArtifacts, ConsistencyCheckFailed.
PublicMaterial load_public_material(Deployment dep);

// ---- owner ----------------------------------------------------------------

struct SendReceipt {
  std::string message_id;
  store::Rloc rloc;
  std::uint64_t tx_index = 0;
};

/// Seals, stores and announces a message under a fresh message id; id
/// collisions are retried. Throws ConsistencyCheckFailed plus sealing errors.
SendReceipt send_message(const ActorProfile& owner, Deployment dep, const std::string& case_id,
                         const std::vector<envelope::SliceSpec>& slices, Rng& rng);

// ---- reader ---------------------------------------------------------------

struct KeyRequestResult {
  crypto::FullDecryptionKey fdk;
  std::map<std::string, std::size_t> shares_per_authority;
  std::vector<std::string> warnings;  // one per authority that contributed nothing
};

/// Runs the key request against every authority (endpoints from the
/// metadata document unless overridden), verifies each share and merges
/// them. Throws NoSharesObtained, SignatureRejected (every reachable
/// authority refused the reader's signature).
KeyRequestResult request_keys(const ActorProfile& reader, Deployment dep,
                              const std::map<std::string, std::string>& endpoint_overrides = {},
                              int timeout_ms = 10000);

/// Throws NotFound, BadMessageId, IntegrityFailure, MalformedEnvelope.
std::vector<envelope::SliceResult> read_message(const ActorProfile& reader, Deployment dep,
                                                const std::string& message_id,
                                                const crypto::FullDecryptionKey& fdk);

/// The message announced with `rloc`. Throws NotFound.
ledger::MessageEntry find_message_by_rloc(Deployment dep, const store::Rloc& rloc);

/// Passphrase-protected on-disk FDK cache: PBKDF2-HMAC-SHA256 derives an
/// AES-256-GCM key.
namespace fdk_cache {
void save(const std::filesystem::path& path, const crypto::FullDecryptionKey& fdk,
          const std::string& passphrase, Rng& rng);
/// nullopt when the file does not exist. Throws AuthenticationFailed on a
/// wrong passphrase or a damaged file.
std::optional<crypto::FullDecryptionKey> load(const std::filesystem::path& path,
                                              const std::string& passphrase);
}  // namespace fdk_cache

// ---- slice-spec files -----------------------------------------------------

/// `martsia-slices/1` format:
///
///   martsia-slices/1
///   # comment
///   [slice]
///   policy = Customs@3+ or (43175279@2+ and Manufacturer@1+)
///   field clearance_number = CC-2291-PT
///
/// Throws Malformed naming the line.
std::vector<envelope::SliceSpec> parse_slice_specs(std::string_view text);
std::string format_slice_specs(const std::vector<envelope::SliceSpec>& specs);

// ---- process-engine interception ------------------------------------------

inline constexpr std::string_view kInterceptMarker = "@MARTSIA:";

struct InterceptedArgument {
  std::string raw;
  bool secured = false;
  std::optional<std::string> replacement;  // rloc text, present iff secured
};

struct InterceptResult {
  std::vector<std::string> arguments;  // what the engine receives
  std::vector<InterceptedArgument> details;
  std::vector<SendReceipt> receipts;  // one per secured argument
};

/// `k=v;k=v` suffixes become one field per pair; anything else is stored
/// under the single field `data`.
envelope::FieldMap intercept_fields(std::string_view suffix);

/// Seals each marked argument's suffix as a single-slice message and
/// replaces the argument by `@MARTSIA:h256:<digest>`. Unmarked arguments
/// pass through untouched.
InterceptResult intercept(const std::vector<std::string>& arguments, const ActorProfile& owner,
                          Deployment dep, const std::string& case_id,
                          const std::string& policy_text, Rng& rng);

// ---- audit ----------------------------------------------------------------

struct AuditReport {
  std::size_t records = 0;
  std::size_t objects_checked = 0;
  std::size_t references_checked = 0;
  std::vector<std::string> problems;

  bool ok() const { return problems.empty(); }
  std::string to_text() const;
};

/// Re-verifies the deployment from public state alone: replays the log,
/// re-hashes every stored object, decodes every referenced artifact, checks
/// ceremony openings and authority consistency.
AuditReport audit(Deployment dep);

}  // namespace martsia::client
