#pragma once

// Multi-slice message envelopes. Each slice gets a fresh symmetric key,
// wrapped under the slice policy with MA-ABE; the field map and the list of
// field names are AEAD-encrypted under keys derived from it. Associated
// data binds every slice to its envelope's metadata and slice id.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "martsia/crypto/abe.hpp"
#include "martsia/crypto/aead.hpp"
#include "martsia/error.hpp"

namespace martsia::envelope {

using FieldMap = std::vector<std::pair<std::string, std::string>>;

struct MessageMetadata {
  std::string sender_address;
  std::string case_id;     // decimal
  std::string message_id;  // 8 decimal digits

  /// Throws BadAddress, BadMessageId, InvalidArgument.
  void validate() const;
  bool operator==(const MessageMetadata&) const = default;
};

struct Slice {
  std::string slice_id;  // 8 decimal digits, unique within the envelope
  std::string policy_text;
  crypto::AbeCiphertext wrapped_key;
  crypto::Nonce nonce{};
  Bytes encrypted_fields;
  Bytes encrypted_field_index;
  bool operator==(const Slice&) const = default;
};

struct MessageEnvelope {
  MessageMetadata metadata;
  std::vector<Slice> slices;

  /// `martsia-envelope/1` magic line, then key-sorted `k=v` lines with
  /// binary values in base64. Byte-stable.
  std::string serialize() const;
  /// Throws MalformedEnvelope.
  static MessageEnvelope parse(std::string_view text);
  bool operator==(const MessageEnvelope&) const = default;
};

struct SliceSpec {
  FieldMap fields;
  std::string policy_text;
};

/// Eight random decimal digits.
std::string random_id8(Rng& rng);

/// Throws EmptyFields, PolicyError (unparseable or unsatisfiable policy),
/// MissingAuthorityKey, InvalidArgument (duplicate field names).
Slice seal_slice(const FieldMap& fields, const std::string& policy_text,
                 const crypto::PublicParameters& params, const crypto::AuthorityKeyMap& authority_pks,
                 const MessageMetadata& metadata, const std::string& slice_id, Rng& rng);

/// Throws PolicyNotSatisfied, DecryptionFailed, IntegrityFailure.
FieldMap open_slice(const Slice& slice, const crypto::PublicParameters& params,
                    const crypto::FullDecryptionKey& fdk, const MessageMetadata& metadata);

/// Assigns fresh, distinct slice ids.
MessageEnvelope seal_message(const MessageMetadata& metadata, const std::vector<SliceSpec>& specs,
                             const crypto::PublicParameters& params,
                             const crypto::AuthorityKeyMap& authority_pks, Rng& rng);

struct SliceResult {
  std::string slice_id;
  std::optional<FieldMap> fields;  // empty when unreadable
  Errc reason = Errc::PolicyNotSatisfied;  // meaningful when unreadable

  bool readable() const { return fields.has_value(); }
};

/// Unreadable slices (policy not satisfied, key unwrap failed) are marked
/// rather than failing the message. Integrity failures still throw.
std::vector<SliceResult> open_message(const MessageEnvelope& envelope,
                                      const crypto::PublicParameters& params,
                                      const crypto::FullDecryptionKey& fdk);

}  // namespace martsia::envelope
