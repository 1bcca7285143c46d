#include "martsia/policy/oracle.hpp"

#include <algorithm>

#include "martsia/error.hpp"

namespace martsia::policy {

std::set<std::string> AttestationSet::namespaced() const {
  std::set<std::string> out;
  for (const auto& [attr, auth] : entries) out.insert(policy::namespaced(attr, auth));
  return out;
}

namespace {

void subsets(std::span<const std::string> pool, unsigned k, std::size_t start,
             std::vector<std::string>& current,
             std::vector<std::vector<std::string>>& out) {
  if (current.size() == k) {
    out.push_back(current);
    return;
  }
  for (std::size_t i = start; i < pool.size(); ++i) {
    current.push_back(pool[i]);
    subsets(pool, k, i + 1, current, out);
    current.pop_back();
  }
}

bool evaluate(const Node& n, const AttestationSet& att) {
  switch (n.kind) {
    case Node::Kind::Leaf:
      return att.contains(n.attribute, n.auth.authority);
    case Node::Kind::And:
      return std::all_of(n.children.begin(), n.children.end(),
                         [&](const Node& c) { return evaluate(c, att); });
    case Node::Kind::Or:
      return std::any_of(n.children.begin(), n.children.end(),
                         [&](const Node& c) { return evaluate(c, att); });
    case Node::Kind::Gate: {
      auto hits = std::count_if(n.children.begin(), n.children.end(),
                                [&](const Node& c) { return evaluate(c, att); });
      return static_cast<unsigned>(hits) >= n.threshold;
    }
  }
  return false;
}

}  // namespace

Node expand_boolean(const Node& ast, std::span<const std::string> authorities) {
  if (authorities.size() > kOracleMaxAuthorities) {
    fail(Errc::InvalidArgument, "boolean expansion limited to 5 authorities");
  }
  if (ast.kind != Node::Kind::Leaf) {
    Node out = ast;
    for (auto& c : out.children) c = expand_boolean(c, authorities);
    return out;
  }
  if (ast.auth.kind == AuthSpec::Kind::Named) return ast;
  unsigned n = ast.auth.n;
  // n > N leaves no subsets: an empty Or, which evaluates to false.
  std::vector<std::vector<std::string>> picks;
  std::vector<std::string> current;
  subsets(authorities, n, 0, current, picks);
  std::vector<Node> alternatives;
  for (const auto& pick : picks) {
    std::vector<Node> leaves;
    for (const auto& a : pick) leaves.push_back(Node::leaf(ast.attribute, AuthSpec::named(a)));
    alternatives.push_back(leaves.size() == 1 ? std::move(leaves.front())
                                              : Node::all_of(std::move(leaves)));
  }
  return alternatives.size() == 1 ? std::move(alternatives.front())
                                  : Node::any_of(std::move(alternatives));
}

bool satisfies_oracle(const Node& ast, const AttestationSet& attestations,
                      std::span<const std::string> authorities) {
  return evaluate(expand_boolean(ast, authorities), attestations);
}

}  // namespace martsia::policy
