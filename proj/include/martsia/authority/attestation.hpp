#pragma once

#include <string>
#include <vector>

#include "martsia/crypto/signature.hpp"

namespace martsia::authority {

/// What an attribute certifier vouches for about one reader. The reader's
/// verify key travels with it, so the certifier anchors reader identity.
struct AttestationDocument {
  std::string reader_address;
  std::string gid;  // equal to reader_address
  std::vector<std::string> attributes;  // un-namespaced, e.g. Supplier, 43175279
  crypto::VerifyKey verify_key;

  /// `martsia-attestation/1` magic line, then key-sorted `k=v` lines.
  /// Throws EmptyFields on an empty attribute list.
  std::string encode() const;
  static AttestationDocument decode(std::string_view text);
};

}  // namespace martsia::authority
