#include "martsia/authority/attestation.hpp"

#include <map>
#include <set>
#include <sstream>

#include "martsia/error.hpp"
#include "martsia/ledger/ledger.hpp"
#include "martsia/policy/ast.hpp"

namespace martsia::authority {

namespace {
constexpr std::string_view kMagic = "martsia-attestation/1";
}

std::string AttestationDocument::encode() const {
  if (attributes.empty()) fail(Errc::EmptyFields, "attestation lists no attributes", reader_address);
  if (!ledger::is_address(reader_address)) {
    fail(Errc::BadAddress, "malformed reader address '" + reader_address + "'", reader_address);
  }
  std::set<std::string> sorted;
  for (const auto& a : attributes) {
    if (!policy::is_attribute_name(a)) fail(Errc::InvalidArgument, "invalid attribute '" + a + "'", a);
    sorted.insert(a);
  }
  std::string list;
  for (const auto& a : sorted) list += (list.empty() ? "" : ",") + a;
  std::string out(kMagic);
  out += "\nattributes=" + list;
  out += "\ngid=" + gid;
  out += "\nreader=" + reader_address;
  out += "\nverify_key=" + base64_encode(verify_key.der());
  out += "\n";
  return out;
}

AttestationDocument AttestationDocument::decode(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    fail(Errc::Malformed, "attestation lacks the martsia-attestation/1 header");
  }
  std::map<std::string, std::string> kv;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::Malformed, "attestation line without '='");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (auto key : {"attributes", "gid", "reader", "verify_key"}) {
    if (!kv.count(key)) fail(Errc::Malformed, std::string("attestation lacks ") + key);
  }
  std::vector<std::string> attrs;
  std::istringstream list(kv["attributes"]);
  std::string a;
  while (std::getline(list, a, ',')) attrs.push_back(a);
  AttestationDocument doc{kv["reader"], kv["gid"], std::move(attrs),
                          crypto::VerifyKey::from_der(base64_decode(kv["verify_key"]))};
  if (doc.encode() != text) fail(Errc::Malformed, "attestation is not canonical");
  return doc;
}

}  // namespace martsia::authority
