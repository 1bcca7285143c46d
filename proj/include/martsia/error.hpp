#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace martsia {

enum class Errc {
  // crypto-core
  NamespaceMismatch,
  GidMismatch,
  MissingAuthorityKey,
  PolicyNotSatisfied,
  MalformedCiphertext,
  DecryptionFailed,
  AuthenticationFailed,
  MalformedKey,
  // policy
  SyntaxError,
  EmptyPolicy,
  ThresholdExceedsAuthorities,
  // datastore
  EmptyContent,
  StorageFailure,
  NotFound,
  IntegrityFailure,
  // ledger
  BadAddress,
  UnresolvableRloc,
  DuplicateMessageId,
  BadMessageId,
  OpeningBeforeAllCommitments,
  UnknownAuthority,
  DuplicateCommitment,
  DuplicateEntry,
  // ceremony
  WrongPhase,
  CommitmentMismatch,
  IncompleteOpenings,
  // authority
  ServerNotReady,
  UnknownSession,
  SessionExpired,
  SignatureInvalid,
  NoAttestations,
  ReplayDetected,
  BindFailure,
  ProtocolError,
  NetworkError,
  // envelope
  EmptyFields,
  PolicyError,
  MalformedEnvelope,
  // client
  MissingArtifacts,
  ConsistencyCheckFailed,
  NoSharesObtained,
  SignatureRejected,
  // generic
  InvalidArgument,
  Malformed,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;
/// Inverse of errc_name; nullopt for unknown names.
std::optional<Errc> errc_from_name(std::string_view name) noexcept;

/// Domain error raised by every module. `detail()` carries the subject of
/// the failure where one exists (offending authority id, unsatisfied policy
/// text, missing path).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string detail = {});

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

/// Policy parse failure with the byte offset of the offending token.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& message);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

[[noreturn]] void fail(Errc code, const std::string& message,
                       std::string detail = {});

}  // namespace martsia
