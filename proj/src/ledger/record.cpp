#include <charconv>
#include <regex>

#include "martsia/error.hpp"
#include "martsia/ledger/ledger.hpp"

namespace martsia::ledger {

std::string_view contract_name(Contract c) {
  switch (c) {
    case Contract::Authority: return "Authority";
    case Contract::Certifier: return "Certifier";
    case Contract::Message: return "Message";
  }
  return "?";
}

Contract parse_contract(std::string_view name) {
  for (auto c : {Contract::Authority, Contract::Certifier, Contract::Message}) {
    if (contract_name(c) == name) return c;
  }
  fail(Errc::Malformed, "unknown contract '" + std::string(name) + "'");
}

bool is_address(std::string_view s) {
  static const std::regex re("0x[0-9a-fA-F]{40}");
  return std::regex_match(s.begin(), s.end(), re);
}

bool is_message_id(std::string_view s) {
  static const std::regex re("[0-9]{8}");
  return std::regex_match(s.begin(), s.end(), re);
}

std::string LedgerRecord::encode() const {
  std::string out;
  out += "action=" + action;
  out += " contract=" + std::string(contract_name(contract));
  out += " payload=" + hex_encode(payload);
  out += " sender=" + sender;
  out += " timestamp=" + std::to_string(timestamp);
  out += " tx=" + std::to_string(tx_index);
  return out;
}

namespace {

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    fail(Errc::Malformed, "bad integer '" + std::string(s) + "' in ledger record");
  }
  return v;
}

}  // namespace

LedgerRecord LedgerRecord::decode(std::string_view line) {
  static constexpr std::string_view kKeys[] = {"action", "contract", "payload",
                                               "sender", "timestamp", "tx"};
  LedgerRecord r;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < std::size(kKeys); ++k) {
    auto end = line.find(' ', pos);
    if (end == std::string_view::npos) end = line.size();
    auto field = line.substr(pos, end - pos);
    auto eq = field.find('=');
    if (eq == std::string_view::npos || field.substr(0, eq) != kKeys[k]) {
      fail(Errc::Malformed, "ledger record field " + std::to_string(k) + " is not '" +
                                std::string(kKeys[k]) + "'");
    }
    auto value = field.substr(eq + 1);
    switch (k) {
      case 0: r.action = value; break;
      case 1: r.contract = parse_contract(value); break;
      case 2: r.payload = hex_decode(value); break;
      case 3: r.sender = value; break;
      case 4: r.timestamp = parse_u64(value); break;
      case 5: r.tx_index = parse_u64(value); break;
    }
    pos = end + 1;
    if (k + 1 < std::size(kKeys) && end == line.size()) {
      fail(Errc::Malformed, "truncated ledger record");
    }
  }
  if (pos < line.size()) fail(Errc::Malformed, "trailing data in ledger record");
  return r;
}

}  // namespace martsia::ledger
