#include "martsia/policy/lsss.hpp"

#include "martsia/error.hpp"

namespace martsia::policy {

using crypto::Scalar;

namespace {

struct Compiler {
  AccessStructure out;
  std::size_t columns = 1;

  // `vec` is the share vector of `node` over the first `columns` columns.
  void visit(const Node& node, const std::vector<Scalar>& vec) {
    switch (node.kind) {
      case Node::Kind::Leaf:
        if (node.auth.kind != AuthSpec::Kind::Named) {
          fail(Errc::InvalidArgument, "compile_lsss needs an expanded policy");
        }
        out.rows.push_back({namespaced(node.attribute, node.auth.authority), vec});
        return;
      case Node::Kind::Or:
        for (const auto& c : node.children) visit(c, vec);
        return;
      case Node::Kind::And:
        threshold(static_cast<unsigned>(node.children.size()), node.children, vec);
        return;
      case Node::Kind::Gate:
        threshold(node.threshold, node.children, vec);
        return;
    }
  }

  // k-of-n: child i receives vec + (i, i^2, ..., i^(k-1)) in fresh columns,
  // i.e. the degree k-1 polynomial with constant term vec evaluated at i.
  void threshold(unsigned k, const std::vector<Node>& children,
                 const std::vector<Scalar>& vec) {
    if (k == 0 || k > children.size()) {
      fail(Errc::InvalidArgument, "threshold gate out of range");
    }
    if (k == 1) {
      for (const auto& c : children) visit(c, vec);
      return;
    }
    std::size_t base = columns;
    columns += k - 1;
    for (std::size_t i = 0; i < children.size(); ++i) {
      std::vector<Scalar> child = vec;
      child.resize(base);
      Scalar x = Scalar::from_u64(i + 1);
      Scalar power = x;
      for (unsigned j = 1; j < k; ++j) {
        child.push_back(power);
        power = power * x;
      }
      visit(children[i], child);
    }
  }
};

}  // namespace

AccessStructure compile_lsss(const Node& expanded) {
  Compiler c;
  c.visit(expanded, {Scalar::from_u64(1)});
  c.out.width = c.columns;
  for (auto& row : c.out.rows) row.vector.resize(c.out.width);
  return std::move(c.out);
}

std::vector<Scalar> share(const AccessStructure& lsss, const std::vector<Scalar>& v) {
  if (v.size() != lsss.width) fail(Errc::InvalidArgument, "share vector width mismatch");
  std::vector<Scalar> out;
  out.reserve(lsss.rows.size());
  for (const auto& row : lsss.rows) {
    Scalar acc;
    for (std::size_t j = 0; j < lsss.width; ++j) acc += row.vector[j] * v[j];
    out.push_back(acc);
  }
  return out;
}

std::optional<std::vector<std::pair<std::size_t, Scalar>>>
reconstruct(const AccessStructure& lsss, const std::set<std::string>& held) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < lsss.rows.size(); ++i) {
    if (held.count(lsss.rows[i].attribute)) usable.push_back(i);
  }
  if (usable.empty()) return std::nullopt;

  // Solve M_S^T c = e1: `width` equations in |S| unknowns, augmented.
  const std::size_t rows = lsss.width;
  const std::size_t cols = usable.size();
  std::vector<std::vector<Scalar>> a(rows, std::vector<Scalar>(cols + 1));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) a[r][c] = lsss.rows[usable[c]].vector[r];
  }
  a[0][cols] = Scalar::from_u64(1);

  std::vector<std::size_t> pivot_col;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t p = rank;
    while (p < rows && a[p][c].is_zero()) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[rank]);
    Scalar inv = a[rank][c].inverse();
    for (auto& x : a[rank]) x = x * inv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || a[r][c].is_zero()) continue;
      Scalar f = a[r][c];
      for (std::size_t k = c; k <= cols; ++k) a[r][k] = a[r][k] - f * a[rank][k];
    }
    pivot_col.push_back(c);
    ++rank;
  }
  for (std::size_t r = rank; r < rows; ++r) {
    if (!a[r][cols].is_zero()) return std::nullopt;
  }

  std::vector<std::pair<std::size_t, Scalar>> coeffs;
  for (std::size_t r = 0; r < rank; ++r) {
    if (!a[r][cols].is_zero()) coeffs.emplace_back(usable[pivot_col[r]], a[r][cols]);
  }
  return coeffs;
}

}  // namespace martsia::policy
