#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace martsia::policy {

/// Authority part of a `T@x` token: either a named authority or `n+`.
struct AuthSpec {
  enum class Kind { Named, Threshold };

  Kind kind = Kind::Named;
  std::string authority;  // Named
  unsigned n = 0;         // Threshold

  static AuthSpec named(std::string id) { return {Kind::Named, std::move(id), 0}; }
  static AuthSpec threshold(unsigned n) { return {Kind::Threshold, {}, n}; }

  bool operator==(const AuthSpec&) const = default;
};

/// Policy formula. `Gate` (k-of-n) only appears after threshold expansion.
struct Node {
  enum class Kind { Leaf, And, Or, Gate };

  Kind kind = Kind::Leaf;
  std::string attribute;  // Leaf
  AuthSpec auth;          // Leaf
  unsigned threshold = 0;  // Gate
  std::vector<Node> children;

  static Node leaf(std::string attribute, AuthSpec auth);
  static Node all_of(std::vector<Node> children);
  static Node any_of(std::vector<Node> children);
  static Node gate(unsigned k, std::vector<Node> children);

  bool operator==(const Node&) const = default;
};

/// `ATTR@AUTHORITY`: the scheme-level attribute a reader holds when
/// authority AUTHORITY attests ATTR.
std::string namespaced(std::string_view attribute, std::string_view authority);
/// Splits at the last '@'. Throws Error(Malformed) if absent.
std::pair<std::string, std::string> split_namespaced(std::string_view attr);

bool is_attribute_name(std::string_view s);

/// Grammar:
///   policy  := or_expr
///   or_expr := and_expr ("or" and_expr)*
///   and_expr:= primary ("and" primary)*
///   primary := LEAF | "(" policy ")"
///   LEAF    := ATTR "@" (AUTHID | INT "+")
/// Keywords are case-insensitive; `and` binds tighter than `or`.
/// Throws SyntaxError (with byte offset) or Error(EmptyPolicy).
Node parse_policy(std::string_view text);

/// Canonical text. parse_policy(to_string(n)) == n for any parser output.
std::string to_string(const Node& node);

/// Replaces every `T@n+` leaf with an n-of-N gate over `T@A_i` for the N
/// given authorities (n == N == 1 collapses to the leaf). Throws
/// Error(ThresholdExceedsAuthorities) when n > N.
Node expand_thresholds(const Node& ast, std::span<const std::string> authorities);

/// Every named authority referenced by an expanded formula.
std::vector<std::string> referenced_authorities(const Node& expanded);

}  // namespace martsia::policy
