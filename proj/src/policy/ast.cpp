#include "martsia/policy/ast.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <set>

#include "martsia/error.hpp"

namespace martsia::policy {

Node Node::leaf(std::string attribute, AuthSpec auth) {
  Node n;
  n.kind = Kind::Leaf;
  n.attribute = std::move(attribute);
  n.auth = std::move(auth);
  return n;
}

Node Node::all_of(std::vector<Node> children) {
  Node n;
  n.kind = Kind::And;
  n.children = std::move(children);
  return n;
}

Node Node::any_of(std::vector<Node> children) {
  Node n;
  n.kind = Kind::Or;
  n.children = std::move(children);
  return n;
}

Node Node::gate(unsigned k, std::vector<Node> children) {
  Node n;
  n.kind = Kind::Gate;
  n.threshold = k;
  n.children = std::move(children);
  return n;
}

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Node parse() {
    skip_ws();
    if (pos_ == text_.size()) fail(Errc::EmptyPolicy, "policy text is empty");
    Node root = parse_or();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError(pos_, "unexpected input");
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  std::string_view peek_word() const {
    std::size_t end = pos_;
    while (end < text_.size() && is_word_char(text_[end])) ++end;
    return text_.substr(pos_, end - pos_);
  }

  // A keyword is a bare word not immediately followed by '@'.
  bool at_keyword(std::string_view kw) {
    skip_ws();
    auto w = peek_word();
    if (w.empty() || !iequals(w, kw)) return false;
    std::size_t after = pos_ + w.size();
    return after >= text_.size() || text_[after] != '@';
  }

  Node parse_or() {
    std::vector<Node> terms;
    terms.push_back(parse_and());
    while (at_keyword("or")) {
      pos_ += 2;
      terms.push_back(parse_and());
    }
    return terms.size() == 1 ? std::move(terms.front()) : Node::any_of(std::move(terms));
  }

  Node parse_and() {
    std::vector<Node> terms;
    terms.push_back(parse_primary());
    while (at_keyword("and")) {
      pos_ += 3;
      terms.push_back(parse_primary());
    }
    return terms.size() == 1 ? std::move(terms.front()) : Node::all_of(std::move(terms));
  }

  Node parse_primary() {
    skip_ws();
    if (pos_ == text_.size()) throw SyntaxError(pos_, "unexpected end of policy");
    if (text_[pos_] == '(') {
      ++pos_;
      Node inner = parse_or();
      skip_ws();
      if (pos_ == text_.size() || text_[pos_] != ')') {
        throw SyntaxError(pos_, "expected ')'");
      }
      ++pos_;
      return inner;
    }
    return parse_leaf();
  }

  Node parse_leaf() {
    auto attr = peek_word();
    if (attr.empty()) throw SyntaxError(pos_, "expected attribute");
    pos_ += attr.size();
    if (pos_ == text_.size() || text_[pos_] != '@') {
      throw SyntaxError(pos_, "expected '@' after attribute '" + std::string(attr) + "'");
    }
    std::size_t at = pos_++;
    auto auth = peek_word();
    if (auth.empty()) throw SyntaxError(at, "dangling '@' without authority");
    pos_ += auth.size();
    if (pos_ < text_.size() && text_[pos_] == '+') {
      if (!std::all_of(auth.begin(), auth.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw SyntaxError(at + 1, "threshold must be a decimal integer");
      }
      ++pos_;
      unsigned long long n = 0;
      for (char c : auth) {
        n = n * 10 + static_cast<unsigned>(c - '0');
        if (n > std::numeric_limits<unsigned>::max()) {
          throw SyntaxError(at + 1, "threshold too large");
        }
      }
      if (n == 0) throw SyntaxError(at + 1, "threshold must be at least 1");
      return Node::leaf(std::string(attr), AuthSpec::threshold(static_cast<unsigned>(n)));
    }
    return Node::leaf(std::string(attr), AuthSpec::named(std::string(auth)));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print(const Node& n, std::string& out) {
  auto print_child = [&](const Node& child, bool wrap) {
    if (wrap) out.push_back('(');
    print(child, out);
    if (wrap) out.push_back(')');
  };
  switch (n.kind) {
    case Node::Kind::Leaf:
      out += n.attribute;
      out.push_back('@');
      if (n.auth.kind == AuthSpec::Kind::Named) {
        out += n.auth.authority;
      } else {
        out += std::to_string(n.auth.n);
        out.push_back('+');
      }
      return;
    case Node::Kind::And:
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += " and ";
        const auto& c = n.children[i];
        print_child(c, c.kind == Node::Kind::And || c.kind == Node::Kind::Or);
      }
      return;
    case Node::Kind::Or:
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += " or ";
        const auto& c = n.children[i];
        print_child(c, c.kind == Node::Kind::Or);
      }
      return;
    case Node::Kind::Gate:
      out += std::to_string(n.threshold) + "-of(";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ", ";
        print(n.children[i], out);
      }
      out.push_back(')');
      return;
  }
}

void collect_authorities(const Node& n, std::set<std::string>& out) {
  if (n.kind == Node::Kind::Leaf) {
    if (n.auth.kind == AuthSpec::Kind::Named) out.insert(n.auth.authority);
    return;
  }
  for (const auto& c : n.children) collect_authorities(c, out);
}

}  // namespace

bool is_attribute_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_word_char);
}

std::string namespaced(std::string_view attribute, std::string_view authority) {
  std::string out(attribute);
  out.push_back('@');
  out += authority;
  return out;
}

std::pair<std::string, std::string> split_namespaced(std::string_view attr) {
  auto at = attr.rfind('@');
  if (at == std::string_view::npos || at == 0 || at + 1 == attr.size()) {
    fail(Errc::Malformed, "attribute is not namespaced: " + std::string(attr));
  }
  return {std::string(attr.substr(0, at)), std::string(attr.substr(at + 1))};
}

Node parse_policy(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Node& node) {
  std::string out;
  print(node, out);
  return out;
}

Node expand_thresholds(const Node& ast, std::span<const std::string> authorities) {
  switch (ast.kind) {
    case Node::Kind::Leaf: {
      if (ast.auth.kind == AuthSpec::Kind::Named) return ast;
      unsigned n = ast.auth.n;
      if (n > authorities.size()) {
        fail(Errc::ThresholdExceedsAuthorities,
             to_string(ast) + " needs " + std::to_string(n) + " authorities, " +
                 std::to_string(authorities.size()) + " known");
      }
      if (authorities.size() == 1) return Node::leaf(ast.attribute, AuthSpec::named(authorities[0]));
      std::vector<Node> leaves;
      leaves.reserve(authorities.size());
      for (const auto& a : authorities) {
        leaves.push_back(Node::leaf(ast.attribute, AuthSpec::named(a)));
      }
      return Node::gate(n, std::move(leaves));
    }
    case Node::Kind::And:
    case Node::Kind::Or:
    case Node::Kind::Gate: {
      Node out = ast;
      for (auto& c : out.children) c = expand_thresholds(c, authorities);
      return out;
    }
  }
  return ast;
}

std::vector<std::string> referenced_authorities(const Node& expanded) {
  std::set<std::string> out;
  collect_authorities(expanded, out);
  return {out.begin(), out.end()};
}

}  // namespace martsia::policy
