#include <gtest/gtest.h>

#include "martsia/error.hpp"
#include "martsia/policy/ast.hpp"
#include "martsia/policy/lsss.hpp"
#include "martsia/policy/oracle.hpp"
#include "martsia/rng.hpp"
#include "support.hpp"

namespace martsia::policy {
namespace {

using martsia::testing::PolicyShape;

const std::vector<std::string> kFour = {"Auth1", "Auth2", "Auth3", "Auth4"};

constexpr const char* kShipmentPolicy =
    "Customs@3+ or (43175279@2+ and ((Supplier@1+ and International@1+) or "
    "Manufacturer@1+ or (Carrier@1+ and International@1+)))";

Node named(const char* attr, const char* auth) { return Node::leaf(attr, AuthSpec::named(auth)); }
Node thresh(const char* attr, unsigned n) { return Node::leaf(attr, AuthSpec::threshold(n)); }

// ---- parsing --------------------------------------------------------------

TEST(Parse, ShipmentPolicyHasTopLevelOrOfTwo) {
  auto ast = parse_policy(kShipmentPolicy);
  ASSERT_EQ(ast.kind, Node::Kind::Or);
  ASSERT_EQ(ast.children.size(), 2u);
  EXPECT_EQ(ast.children[0], thresh("Customs", 3));
  EXPECT_EQ(ast.children[1].kind, Node::Kind::And);
}

TEST(Parse, MixedNamedAndThresholdLeaves) {
  EXPECT_EQ(parse_policy("(Customs@A or Supplier@1+)"),
            Node::any_of({named("Customs", "A"), thresh("Supplier", 1)}));
}

TEST(Parse, DanglingAtIsSyntaxErrorAtItsOffset) {
  try {
    parse_policy("Manufacturer@");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.code(), Errc::SyntaxError);
    EXPECT_EQ(e.offset(), 12u);
  }
}

TEST(Parse, EmptyPolicy) {
  for (auto text : {"", "   ", "\t\n"}) {
    try {
      parse_policy(text);
      FAIL() << "accepted '" << text << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::EmptyPolicy);
    }
  }
}

TEST(Parse, RejectsMalformedInputs) {
  for (auto text : {"A@1 and", "(A@X", "A@X)", "A@0+", "A@X or or B@Y", "A@X B@Y",
                    "A@+", "A B@X", "A@X and ()", "A!@X"}) {
    EXPECT_THROW(parse_policy(text), SyntaxError) << text;
  }
}

TEST(Parse, KeywordsAreCaseInsensitiveAttributesAreNot) {
  auto a = parse_policy("a@X AND b@Y Or c@Z");
  auto b = parse_policy("a@X and b@Y or c@Z");
  EXPECT_EQ(a, b);
  EXPECT_NE(parse_policy("A@X"), parse_policy("a@X"));
}

TEST(Parse, AndBindsTighterThanOr) {
  EXPECT_EQ(parse_policy("a@X or b@X and c@X"),
            Node::any_of({named("a", "X"), Node::all_of({named("b", "X"), named("c", "X")})}));
}

TEST(Parse, KeywordLikeAttributesAreAllowedBeforeAt) {
  EXPECT_EQ(parse_policy("and@X or or@Y"), Node::any_of({named("and", "X"), named("or", "Y")}));
}

TEST(Parse, RedundantParenthesesAroundLeavesVanish) {
  EXPECT_EQ(parse_policy("((a@X)) and b@X and c@X"),
            Node::all_of({named("a", "X"), named("b", "X"), named("c", "X")}));
  // Explicit grouping is kept; it prints back with its parentheses.
  auto grouped = parse_policy("a@X and (b@X and c@X)");
  EXPECT_EQ(grouped.children.size(), 2u);
  EXPECT_EQ(to_string(grouped), "a@X and (b@X and c@X)");
}

TEST(PrettyPrint, RandomAstsRoundTrip) {
  PolicyShape shape{{"a", "B_2", "43175279", "x-y"}, {"A1", "A2", "Auth3"}, 5, 3};
  SeededRng rng(99);
  for (int i = 0; i < 500; ++i) {
    auto ast = parse_policy(to_string(martsia::testing::random_policy(rng, shape)));
    EXPECT_EQ(parse_policy(to_string(ast)), ast) << to_string(ast);
  }
}

TEST(PrettyPrint, CanonicalText) {
  EXPECT_EQ(to_string(parse_policy("  a@X   and(b@2+ or c@Y) ")), "a@X and (b@2+ or c@Y)");
}

// ---- threshold expansion --------------------------------------------------

TEST(Expand, TwoOfFourGate) {
  auto ex = expand_thresholds(thresh("43175279", 2), kFour);
  ASSERT_EQ(ex.kind, Node::Kind::Gate);
  EXPECT_EQ(ex.threshold, 2u);
  ASSERT_EQ(ex.children.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(ex.children[i], named("43175279", kFour[i].c_str()));
}

TEST(Expand, OneOfOneCollapsesToLeaf) {
  std::vector<std::string> one = {"A1"};
  EXPECT_EQ(expand_thresholds(thresh("X", 1), one), named("X", "A1"));
}

TEST(Expand, ThresholdExceedingAuthorities) {
  std::vector<std::string> two = {"A1", "A2"};
  try {
    expand_thresholds(thresh("X", 3), two);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ThresholdExceedsAuthorities);
  }
}

TEST(Expand, NamedLeavesUntouchedAndAuthoritiesCollected) {
  auto ex = expand_thresholds(parse_policy("a@Zed and b@2+"), kFour);
  EXPECT_EQ(ex.children[0], named("a", "Zed"));
  auto refs = referenced_authorities(ex);
  EXPECT_EQ(refs.size(), 5u);
}

// ---- LSSS -----------------------------------------------------------------

std::set<std::string> rows_to_attrs(const AccessStructure& lsss, std::uint64_t mask) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < lsss.rows.size(); ++i) {
    if (mask >> i & 1) out.insert(lsss.rows[i].attribute);
  }
  return out;
}

TEST(Lsss, AndNeedsBothRows) {
  auto lsss = compile_lsss(Node::all_of({named("a", "X"), named("b", "X")}));
  EXPECT_EQ(lsss.rows.size(), 2u);
  EXPECT_EQ(lsss.width, 2u);
  EXPECT_FALSE(reconstruct(lsss, {"a@X"}));
  EXPECT_FALSE(reconstruct(lsss, {"b@X"}));
  EXPECT_TRUE(reconstruct(lsss, {"a@X", "b@X"}));
}

TEST(Lsss, OrTakesEitherRow) {
  auto lsss = compile_lsss(Node::any_of({named("a", "X"), named("b", "X")}));
  EXPECT_EQ(lsss.rows.size(), 2u);
  EXPECT_TRUE(reconstruct(lsss, {"a@X"}));
  EXPECT_TRUE(reconstruct(lsss, {"b@X"}));
  EXPECT_FALSE(reconstruct(lsss, {}));
}

TEST(Lsss, CoefficientsReconstructTheSecret) {
  auto lsss = compile_lsss(expand_thresholds(parse_policy(kShipmentPolicy), kFour));
  SeededRng rng(5);
  std::vector<crypto::Scalar> v(lsss.width);
  for (auto& x : v) x = crypto::Scalar::random(rng);
  auto lambda = share(lsss, v);
  auto c = reconstruct(lsss, {"Customs@Auth1", "Customs@Auth3", "Customs@Auth4"});
  ASSERT_TRUE(c);
  crypto::Scalar sum;
  for (auto [row, coeff] : *c) sum += coeff * lambda[row];
  EXPECT_EQ(sum, v[0]);
}

TEST(Lsss, MatchesOracleOnAllRowSubsetsOfSmallPolicies) {
  PolicyShape shape{{"a", "b", "c", "d"}, {"A1", "A2", "A3"}, 3, 3};
  SeededRng rng(123);
  int checked = 0;
  while (checked < 150) {
    auto ast = martsia::testing::random_policy(rng, shape);
    auto lsss = compile_lsss(expand_thresholds(ast, shape.authorities));
    if (lsss.rows.size() > 12) continue;
    ++checked;
    for (std::uint64_t mask = 0; mask < (1ull << lsss.rows.size()); ++mask) {
      auto held = rows_to_attrs(lsss, mask);
      AttestationSet att;
      for (const auto& a : held) {
        auto [name, auth] = split_namespaced(a);
        att.add(name, auth);
      }
      ASSERT_EQ(reconstruct(lsss, held).has_value(),
                satisfies_oracle(ast, att, shape.authorities))
          << to_string(ast) << " mask " << mask;
    }
  }
}

TEST(Lsss, ShipmentPolicyOverFourAuthoritiesMatchesOracle) {
  // Every leaf is a threshold, so satisfaction depends only on how many
  // authorities attest each attribute. Enumerate all count vectors, rotating
  // which authorities attest so every authority appears in each position.
  auto ast = parse_policy(kShipmentPolicy);
  auto lsss = compile_lsss(expand_thresholds(ast, kFour));
  EXPECT_EQ(lsss.rows.size(), 28u);
  const std::vector<std::string> attrs = {"Customs", "43175279", "Supplier",
                                          "International", "Manufacturer", "Carrier"};
  std::size_t combos = 1;
  for (std::size_t i = 0; i < attrs.size(); ++i) combos *= 5;
  for (std::size_t code = 0; code < combos; ++code) {
    AttestationSet att;
    std::size_t c = code;
    for (std::size_t i = 0; i < attrs.size(); ++i, c /= 5) {
      for (std::size_t k = 0; k < c % 5; ++k) att.add(attrs[i], kFour[(code + i + k) % 4]);
    }
    ASSERT_EQ(reconstruct(lsss, att.namespaced()).has_value(),
              satisfies_oracle(ast, att, kFour))
        << code;
  }
}

// ---- oracle ---------------------------------------------------------------

TEST(Oracle, CustomsClearanceNeedsThreeCustomsAttestations) {
  auto ast = parse_policy("Customs@3+ or (43175279@2+ and Manufacturer@1+)");
  AttestationSet three;
  for (auto a : {"Auth1", "Auth2", "Auth3"}) three.add("Customs", a);
  EXPECT_TRUE(satisfies_oracle(ast, three, kFour));
  AttestationSet one;
  one.add("Customs", "Auth1");
  EXPECT_FALSE(satisfies_oracle(ast, one, kFour));
}

TEST(Oracle, EmptyAttestationsNeverSatisfy) {
  PolicyShape shape{{"a", "b"}, {"A1", "A2"}, 3, 3};
  SeededRng rng(8);
  for (int i = 0; i < 100; ++i) {
    EXPECT_FALSE(satisfies_oracle(martsia::testing::random_policy(rng, shape), {}, shape.authorities));
  }
}

TEST(Oracle, Monotone) {
  PolicyShape shape{{"a", "b", "c"}, {"A1", "A2", "A3"}, 3, 3};
  SeededRng rng(9);
  for (int i = 0; i < 60; ++i) {
    auto ast = martsia::testing::random_policy(rng, shape);
    auto universe = martsia::testing::relevant_universe(ast, shape.authorities);
    if (universe.size() > 9) continue;
    for (std::uint64_t m = 0; m < (1ull << universe.size()); ++m) {
      if (!satisfies_oracle(ast, martsia::testing::subset(universe, m), shape.authorities)) continue;
      for (std::size_t bit = 0; bit < universe.size(); ++bit) {
        ASSERT_TRUE(satisfies_oracle(ast, martsia::testing::subset(universe, m | (1ull << bit)),
                                     shape.authorities));
      }
    }
  }
}

TEST(Oracle, BooleanExpansionLimitedToSmallAuthoritySets) {
  std::vector<std::string> six = {"A1", "A2", "A3", "A4", "A5", "A6"};
  EXPECT_THROW(expand_boolean(thresh("x", 2), six), Error);
  auto ex = expand_boolean(thresh("x", 2), kFour);
  EXPECT_EQ(ex.kind, Node::Kind::Or);
  EXPECT_EQ(ex.children.size(), 6u);  // C(4,2)
}

TEST(Oracle, ThresholdAboveAuthorityCountIsFalse) {
  AttestationSet all;
  for (const auto& a : kFour) all.add("x", a);
  std::vector<std::string> two = {"Auth1", "Auth2"};
  EXPECT_FALSE(satisfies_oracle(thresh("x", 3), all, two));
}

}  // namespace
}  // namespace martsia::policy
