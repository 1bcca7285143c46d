#include <sstream>

#include "martsia/client/client.hpp"
#include "martsia/error.hpp"

namespace martsia::client {

namespace {

constexpr std::string_view kMagic = "martsia-slices/1";

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<envelope::SliceSpec> parse_slice_specs(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 1;
  auto bad = [&](const std::string& why) {
    fail(Errc::Malformed, "slice spec line " + std::to_string(lineno) + ": " + why);
  };
  if (!std::getline(in, line) || trim(line) != kMagic) bad("expected martsia-slices/1 header");

  std::vector<envelope::SliceSpec> out;
  std::vector<bool> has_policy;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t == "[slice]") {
      out.emplace_back();
      has_policy.push_back(false);
      continue;
    }
    if (out.empty()) bad("content before the first [slice]");
    auto eq = t.find('=');
    if (eq == std::string::npos) bad("expected 'policy = ...' or 'field NAME = VALUE'");
    auto key = trim(std::string_view(t).substr(0, eq));
    auto value = trim(std::string_view(t).substr(eq + 1));
    if (key == "policy") {
      if (has_policy.back()) bad("second policy in one slice");
      out.back().policy_text = value;
      has_policy.back() = true;
    } else if (key.rfind("field ", 0) == 0) {
      auto name = trim(std::string_view(key).substr(6));
      if (name.empty() || name.find_first_of(" \t") != std::string::npos) bad("bad field name");
      for (const auto& [k, _] : out.back().fields) {
        if (k == name) bad("duplicate field '" + name + "'");
      }
      out.back().fields.emplace_back(name, value);
    } else {
      bad("unknown key '" + key + "'");
    }
  }
  if (out.empty()) fail(Errc::Malformed, "slice spec declares no slices");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!has_policy[i]) fail(Errc::Malformed, "slice " + std::to_string(i + 1) + " has no policy");
  }
  return out;
}

std::string format_slice_specs(const std::vector<envelope::SliceSpec>& specs) {
  std::string out(kMagic);
  out += '\n';
  for (const auto& s : specs) {
    out += "[slice]\npolicy = " + s.policy_text + "\n";
    for (const auto& [k, v] : s.fields) out += "field " + k + " = " + v + "\n";
  }
  return out;
}

}  // namespace martsia::client
