#pragma once

#include <set>
#include <span>
#include <string>
#include <utility>

#include "martsia/policy/ast.hpp"

namespace martsia::policy {

/// Attestations a reader holds: (un-namespaced attribute, authority id).
struct AttestationSet {
  std::set<std::pair<std::string, std::string>> entries;

  void add(std::string attribute, std::string authority) {
    entries.emplace(std::move(attribute), std::move(authority));
  }
  bool contains(const std::string& attribute, const std::string& authority) const {
    return entries.count({attribute, authority}) != 0;
  }
  /// Namespaced view (`ATTR@AUTH`) as consumed by the scheme.
  std::set<std::string> namespaced() const;
};

inline constexpr std::size_t kOracleMaxAuthorities = 5;

/// Boolean rewrite: `T@n+` becomes an Or over every n-subset of the
/// authorities, each an And of `T@A_i` leaves. Exponential; only valid for
/// at most kOracleMaxAuthorities authorities (throws InvalidArgument beyond).
Node expand_boolean(const Node& ast, std::span<const std::string> authorities);

/// Reference semantics: truth-table evaluation of the boolean expansion.
bool satisfies_oracle(const Node& ast, const AttestationSet& attestations,
                      std::span<const std::string> authorities);

}  // namespace martsia::policy
