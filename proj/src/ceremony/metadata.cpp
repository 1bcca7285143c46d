#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "martsia/ceremony/ceremony.hpp"
#include "martsia/error.hpp"

namespace martsia::ceremony {

namespace {

constexpr std::string_view kMagic = "martsia-authorities/1";

bool valid_id(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

}  // namespace

std::string MetadataDocument::encode() const {
  std::map<std::string, std::string> kv;
  std::string order;
  for (const auto& a : authorities) {
    if (!valid_id(a.authority_id)) {
      fail(Errc::InvalidArgument, "invalid authority id '" + a.authority_id + "'");
    }
    if (!order.empty()) order += ',';
    order += a.authority_id;
    kv["authority." + a.authority_id + ".endpoint"] = a.endpoint;
    kv["authority." + a.authority_id + ".verify_key"] = base64_encode(a.verify_key.der());
  }
  kv["authorities"] = order;
  std::string out(kMagic);
  out += '\n';
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

MetadataDocument MetadataDocument::decode(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    fail(Errc::Malformed, "metadata document lacks the martsia-authorities/1 header");
  }
  std::map<std::string, std::string> kv;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::Malformed, "metadata line without '='");
    if (!kv.emplace(line.substr(0, eq), line.substr(eq + 1)).second) {
      fail(Errc::Malformed, "duplicate metadata key " + line.substr(0, eq));
    }
  }
  auto order = kv.find("authorities");
  if (order == kv.end() || order->second.empty()) fail(Errc::Malformed, "metadata lists no authorities");

  MetadataDocument doc;
  std::set<std::string> seen;
  std::istringstream ids(order->second);
  std::string id;
  while (std::getline(ids, id, ',')) {
    if (!valid_id(id) || !seen.insert(id).second) fail(Errc::Malformed, "bad authority id '" + id + "'");
    auto ep = kv.find("authority." + id + ".endpoint");
    auto vk = kv.find("authority." + id + ".verify_key");
    if (ep == kv.end() || vk == kv.end()) fail(Errc::Malformed, "incomplete entry for " + id);
    doc.authorities.push_back({id, ep->second, crypto::VerifyKey::from_der(base64_decode(vk->second))});
  }
  if (kv.size() != 1 + 2 * doc.authorities.size()) fail(Errc::Malformed, "unexpected metadata keys");
  if (doc.encode() != text) fail(Errc::Malformed, "metadata document is not canonical");
  return doc;
}

std::vector<std::string> MetadataDocument::ids() const {
  std::vector<std::string> out;
  for (const auto& a : authorities) out.push_back(a.authority_id);
  return out;
}

const AuthorityInfo* MetadataDocument::find(const std::string& authority_id) const {
  for (const auto& a : authorities) {
    if (a.authority_id == authority_id) return &a;
  }
  return nullptr;
}

}  // namespace martsia::ceremony
