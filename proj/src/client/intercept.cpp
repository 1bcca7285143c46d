#include "martsia/client/client.hpp"
#include "martsia/error.hpp"

namespace martsia::client {

envelope::FieldMap intercept_fields(std::string_view suffix) {
  envelope::FieldMap fields;
  std::size_t pos = 0;
  while (pos <= suffix.size()) {
    auto end = suffix.find(';', pos);
    if (end == std::string_view::npos) end = suffix.size();
    auto part = suffix.substr(pos, end - pos);
    auto eq = part.find('=');
    bool duplicate = false;
    if (eq != std::string_view::npos) {
      for (const auto& [k, _] : fields) duplicate |= k == part.substr(0, eq);
    }
    if (eq == std::string_view::npos || eq == 0 || duplicate) {
      return {{"data", std::string(suffix)}};
    }
    fields.emplace_back(std::string(part.substr(0, eq)), std::string(part.substr(eq + 1)));
    pos = end + 1;
  }
  return fields;
}

InterceptResult intercept(const std::vector<std::string>& arguments, const ActorProfile& owner,
                          Deployment dep, const std::string& case_id,
                          const std::string& policy_text, Rng& rng) {
  InterceptResult out;
  for (const auto& arg : arguments) {
    InterceptedArgument detail{arg, arg.rfind(kInterceptMarker, 0) == 0, std::nullopt};
    if (!detail.secured) {
      out.arguments.push_back(arg);
      out.details.push_back(std::move(detail));
      continue;
    }
    auto suffix = std::string_view(arg).substr(kInterceptMarker.size());
    if (suffix.empty()) fail(Errc::EmptyFields, "marked argument carries no data");
    auto receipt = send_message(owner, dep, case_id, {{intercept_fields(suffix), policy_text}}, rng);
    detail.replacement = receipt.rloc.text();
    out.arguments.push_back(std::string(kInterceptMarker) + *detail.replacement);
    out.details.push_back(std::move(detail));
    out.receipts.push_back(std::move(receipt));
  }
  return out;
}

}  // namespace martsia::client
