#include "martsia/error.hpp"

namespace martsia {

std::optional<Errc> errc_from_name(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(Errc::IoError); ++i) {
    auto code = static_cast<Errc>(i);
    if (errc_name(code) == name) return code;
  }
  return std::nullopt;
}

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NamespaceMismatch: return "NamespaceMismatch";
    case Errc::GidMismatch: return "GidMismatch";
    case Errc::MissingAuthorityKey: return "MissingAuthorityKey";
    case Errc::PolicyNotSatisfied: return "PolicyNotSatisfied";
    case Errc::MalformedCiphertext: return "MalformedCiphertext";
    case Errc::DecryptionFailed: return "DecryptionFailed";
    case Errc::AuthenticationFailed: return "AuthenticationFailed";
    case Errc::MalformedKey: return "MalformedKey";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::EmptyPolicy: return "EmptyPolicy";
    case Errc::ThresholdExceedsAuthorities: return "ThresholdExceedsAuthorities";
    case Errc::EmptyContent: return "EmptyContent";
    case Errc::StorageFailure: return "StorageFailure";
    case Errc::NotFound: return "NotFound";
    case Errc::IntegrityFailure: return "IntegrityFailure";
    case Errc::BadAddress: return "BadAddress";
    case Errc::UnresolvableRloc: return "UnresolvableRloc";
    case Errc::DuplicateMessageId: return "DuplicateMessageId";
    case Errc::BadMessageId: return "BadMessageId";
    case Errc::OpeningBeforeAllCommitments: return "OpeningBeforeAllCommitments";
    case Errc::UnknownAuthority: return "UnknownAuthority";
    case Errc::DuplicateCommitment: return "DuplicateCommitment";
    case Errc::DuplicateEntry: return "DuplicateEntry";
    case Errc::WrongPhase: return "WrongPhase";
    case Errc::CommitmentMismatch: return "CommitmentMismatch";
    case Errc::IncompleteOpenings: return "IncompleteOpenings";
    case Errc::ServerNotReady: return "ServerNotReady";
    case Errc::UnknownSession: return "UnknownSession";
    case Errc::SessionExpired: return "SessionExpired";
    case Errc::SignatureInvalid: return "SignatureInvalid";
    case Errc::NoAttestations: return "NoAttestations";
    case Errc::ReplayDetected: return "ReplayDetected";
    case Errc::BindFailure: return "BindFailure";
    case Errc::ProtocolError: return "ProtocolError";
    case Errc::NetworkError: return "NetworkError";
    case Errc::EmptyFields: return "EmptyFields";
    case Errc::PolicyError: return "PolicyError";
    case Errc::MalformedEnvelope: return "MalformedEnvelope";
    case Errc::MissingArtifacts: return "MissingArtifacts";
    case Errc::ConsistencyCheckFailed: return "ConsistencyCheckFailed";
    case Errc::NoSharesObtained: return "NoSharesObtained";
    case Errc::SignatureRejected: return "SignatureRejected";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Malformed: return "Malformed";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message, std::string detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code),
      detail_(std::move(detail)) {}

SyntaxError::SyntaxError(std::size_t offset, const std::string& message)
    : Error(Errc::SyntaxError,
            message + " at offset " + std::to_string(offset)),
      offset_(offset) {}

void fail(Errc code, const std::string& message, std::string detail) {
  throw Error(code, message, std::move(detail));
}

}  // namespace martsia
